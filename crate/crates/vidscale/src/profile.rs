//! Thread-local instrumentation: live/peak tensor bytes and multiply-add counts.
//!
//! Every [`crate::tensor::Tensor`] registers its buffer here on construction and
//! unregisters on drop, so `peak_bytes()` reports the high-water mark of live
//! tensor + tape memory on the current thread. Training runs are single-threaded
//! per run, which keeps the accounting exact and lets independent runs (e.g.
//! sweep workers) measure themselves without interference.

use std::cell::Cell;

thread_local! {
    static LIVE_BYTES: Cell<u64> = const { Cell::new(0) };
    static PEAK_BYTES: Cell<u64> = const { Cell::new(0) };
    static FLOPS: Cell<u64> = const { Cell::new(0) };
}

pub(crate) fn register_alloc(bytes: usize) {
    LIVE_BYTES.with(|l| {
        let live = l.get() + bytes as u64;
        l.set(live);
        PEAK_BYTES.with(|p| {
            if live > p.get() {
                p.set(live);
            }
        });
    });
}

pub(crate) fn register_free(bytes: usize) {
    LIVE_BYTES.with(|l| l.set(l.get().saturating_sub(bytes as u64)));
}

/// Bytes of tensor data currently alive on this thread.
pub fn live_bytes() -> u64 {
    LIVE_BYTES.with(|l| l.get())
}

/// High-water mark of live tensor bytes since the last [`reset_peak`].
pub fn peak_bytes() -> u64 {
    PEAK_BYTES.with(|p| p.get())
}

/// Resets the peak to the current live byte count.
pub fn reset_peak() {
    PEAK_BYTES.with(|p| LIVE_BYTES.with(|l| p.set(l.get())));
}

pub(crate) fn add_flops(n: u64) {
    FLOPS.with(|f| f.set(f.get() + n));
}

/// Multiply-add operations (counted as 2 FLOPs each) executed by gemm kernels
/// on this thread since the last [`reset_flops`].
pub fn flops() -> u64 {
    FLOPS.with(|f| f.get())
}

pub fn reset_flops() {
    FLOPS.with(|f| f.set(0));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    #[test]
    fn tracks_alloc_and_free() {
        reset_peak();
        let before = live_bytes();
        let t = Tensor::<f32>::zeros(&[64, 64]);
        assert_eq!(live_bytes(), before + 64 * 64 * 4);
        assert!(peak_bytes() >= before + 64 * 64 * 4);
        drop(t);
        assert_eq!(live_bytes(), before);
    }

    #[test]
    fn peak_survives_free() {
        reset_peak();
        let base = live_bytes();
        {
            let _a = Tensor::<f64>::zeros(&[1000]);
        }
        assert_eq!(live_bytes(), base);
        assert!(peak_bytes() >= base + 8000);
    }
}
