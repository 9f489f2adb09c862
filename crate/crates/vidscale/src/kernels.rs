//! Raw math kernels shared by the autodiff tape and eager evaluation paths.
//!
//! Everything here is pure: inputs are borrowed, outputs are fresh tensors.
//! Matrix products dispatch to gemm; the rest are straightforward loops.

use crate::tensor::{Element, Tensor};

/// C = A(m,k) @ B(k,n), both row-major contiguous.
pub fn matmul<S: Element>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let (m, k) = (a.rows(), a.cols());
    let (k2, n) = (b.rows(), b.cols());
    assert_eq!(k, k2, "matmul inner extents {k} vs {k2}");
    let mut c = Tensor::zeros(&[m, n]);
    unsafe {
        S::gemm(
            m,
            k,
            n,
            S::one(),
            a.data().as_ptr(),
            k as isize,
            1,
            b.data().as_ptr(),
            n as isize,
            1,
            S::zero(),
            c.data_mut().as_mut_ptr(),
            n as isize,
            1,
        );
    }
    c
}

/// C = A(m,k) @ B(n,k)^T.
pub fn matmul_nt<S: Element>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let (m, k) = (a.rows(), a.cols());
    let (n, k2) = (b.rows(), b.cols());
    assert_eq!(k, k2, "matmul_nt inner extents {k} vs {k2}");
    let mut c = Tensor::zeros(&[m, n]);
    unsafe {
        S::gemm(
            m,
            k,
            n,
            S::one(),
            a.data().as_ptr(),
            k as isize,
            1,
            b.data().as_ptr(),
            1,
            k as isize,
            S::zero(),
            c.data_mut().as_mut_ptr(),
            n as isize,
            1,
        );
    }
    c
}

/// C = A(k,m)^T @ B(k,n).
pub fn matmul_tn<S: Element>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let (k, m) = (a.rows(), a.cols());
    let (k2, n) = (b.rows(), b.cols());
    assert_eq!(k, k2, "matmul_tn inner extents {k} vs {k2}");
    let mut c = Tensor::zeros(&[m, n]);
    unsafe {
        S::gemm(
            m,
            k,
            n,
            S::one(),
            a.data().as_ptr(),
            1,
            m as isize,
            b.data().as_ptr(),
            n as isize,
            1,
            S::zero(),
            c.data_mut().as_mut_ptr(),
            n as isize,
            1,
        );
    }
    c
}

/// Strided gemm on raw slices; accumulates with `beta`.
#[allow(clippy::too_many_arguments)]
pub fn gemm_slices<S: Element>(
    m: usize,
    k: usize,
    n: usize,
    alpha: S,
    a: &[S],
    rsa: isize,
    csa: isize,
    b: &[S],
    rsb: isize,
    csb: isize,
    beta: S,
    c: &mut [S],
    rsc: isize,
    csc: isize,
) {
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    unsafe {
        S::gemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            rsc,
            csc,
        );
    }
}

pub fn transpose2d<S: Element>(x: &Tensor<S>) -> Tensor<S> {
    let (m, n) = (x.rows(), x.cols());
    let xd = x.data();
    let mut out = Tensor::zeros(&[n, m]);
    let od = out.data_mut();
    for i in 0..m {
        for j in 0..n {
            od[j * m + i] = xd[i * n + j];
        }
    }
    out
}

/// Numerically stabilized softmax along `axis`. Rows that are entirely -inf
/// map to all zeros.
pub fn softmax_axis<S: Element>(x: &Tensor<S>, axis: usize) -> Tensor<S> {
    assert!(axis < x.rank(), "softmax axis {axis} out of range for {:?}", x.shape());
    let shape = x.shape().to_vec();
    let axis_len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = Tensor::zeros(&shape);
    let xd = x.data();
    let od = out.data_mut();
    for o in 0..outer {
        for i in 0..inner {
            let base = o * axis_len * inner + i;
            let mut max = S::neg_infinity();
            for a in 0..axis_len {
                let v = xd[base + a * inner];
                if v > max {
                    max = v;
                }
            }
            if max == S::neg_infinity() {
                continue; // fully masked lane stays zero
            }
            let mut sum = S::zero();
            for a in 0..axis_len {
                let e = (xd[base + a * inner] - max).exp();
                od[base + a * inner] = e;
                sum += e;
            }
            let inv = S::one() / sum;
            for a in 0..axis_len {
                od[base + a * inner] *= inv;
            }
        }
    }
    out
}

/// Stabilized log-softmax over the last axis.
pub fn log_softmax_last<S: Element>(x: &Tensor<S>) -> Tensor<S> {
    let shape = x.shape().to_vec();
    let d = *shape.last().expect("log_softmax needs rank >= 1");
    let rows = x.numel() / d;
    let mut out = Tensor::zeros(&shape);
    let xd = x.data();
    let od = out.data_mut();
    for r in 0..rows {
        let row = &xd[r * d..(r + 1) * d];
        let max = row.iter().cloned().fold(S::neg_infinity(), S::max);
        let mut sum = S::zero();
        for &v in row {
            sum += (v - max).exp();
        }
        let lse = max + sum.ln();
        for (j, &v) in row.iter().enumerate() {
            od[r * d + j] = v - lse;
        }
    }
    out
}

/// Per-row layer norm over the last axis with affine gain/bias.
/// Returns (y, mean, inv_std); epsilon sits inside the square root.
pub fn layer_norm<S: Element>(
    x: &Tensor<S>,
    gain: &Tensor<S>,
    bias: &Tensor<S>,
) -> (Tensor<S>, Tensor<S>, Tensor<S>) {
    let d = *x.shape().last().expect("layer_norm needs rank >= 1");
    assert_eq!(gain.numel(), d, "layer_norm gain extent");
    assert_eq!(bias.numel(), d, "layer_norm bias extent");
    let rows = x.numel() / d;
    let eps = S::from_f64(1e-5);
    let mut y = Tensor::zeros(x.shape());
    let mut means = Tensor::zeros(&[rows]);
    let mut inv_stds = Tensor::zeros(&[rows]);
    let xd = x.data();
    let g = gain.data();
    let b = bias.data();
    {
        let yd = y.data_mut();
        for r in 0..rows {
            let row = &xd[r * d..(r + 1) * d];
            let mut mean = S::zero();
            for &v in row {
                mean += v;
            }
            mean = mean / S::from_f64(d as f64);
            let mut var = S::zero();
            for &v in row {
                let c = v - mean;
                var += c * c;
            }
            var = var / S::from_f64(d as f64);
            let inv_std = S::one() / (var + eps).sqrt();
            means.data_mut()[r] = mean;
            inv_stds.data_mut()[r] = inv_std;
            for j in 0..d {
                yd[r * d + j] = (row[j] - mean) * inv_std * g[j] + b[j];
            }
        }
    }
    (y, means, inv_stds)
}

/// GELU, tanh approximation.
pub fn gelu<S: Element>(x: &Tensor<S>) -> Tensor<S> {
    let mut out = Tensor::zeros(x.shape());
    let c = S::from_f64((2.0 / std::f64::consts::PI).sqrt());
    let k = S::from_f64(0.044715);
    let half = S::from_f64(0.5);
    for (o, &v) in out.data_mut().iter_mut().zip(x.data()) {
        let u = c * (v + k * v * v * v);
        *o = half * v * (S::one() + u.tanh());
    }
    out
}

pub fn gelu_vjp<S: Element>(x: &Tensor<S>, dy: &Tensor<S>) -> Tensor<S> {
    let mut out = Tensor::zeros(x.shape());
    let c = S::from_f64((2.0 / std::f64::consts::PI).sqrt());
    let k = S::from_f64(0.044715);
    let half = S::from_f64(0.5);
    let three = S::from_f64(3.0);
    for ((o, &v), &g) in out.data_mut().iter_mut().zip(x.data()).zip(dy.data()) {
        let u = c * (v + k * v * v * v);
        let t = u.tanh();
        let sech2 = S::one() - t * t;
        let du = c * (S::one() + three * k * v * v);
        let dydx = half * (S::one() + t) + half * v * sech2 * du;
        *o = g * dydx;
    }
    out
}

pub fn map_unary<S: Element>(x: &Tensor<S>, f: impl Fn(S) -> S) -> Tensor<S> {
    let mut out = Tensor::zeros(x.shape());
    for (o, &v) in out.data_mut().iter_mut().zip(x.data()) {
        *o = f(v);
    }
    out
}

pub fn zip_binary<S: Element>(a: &Tensor<S>, b: &Tensor<S>, f: impl Fn(S, S) -> S) -> Tensor<S> {
    assert_eq!(a.shape(), b.shape(), "elementwise shape mismatch");
    let mut out = Tensor::zeros(a.shape());
    for ((o, &x), &y) in out.data_mut().iter_mut().zip(a.data()).zip(b.data()) {
        *o = f(x, y);
    }
    out
}

pub fn sum_all<S: Element>(x: &Tensor<S>) -> S {
    let mut s = S::zero();
    for &v in x.data() {
        s += v;
    }
    s
}

/// Mean over axis 0 of a 2-D tensor.
pub fn mean_axis0<S: Element>(x: &Tensor<S>) -> Tensor<S> {
    let (n, d) = (x.rows(), x.cols());
    assert!(n > 0, "mean_axis0 over empty tensor");
    let mut out = Tensor::zeros(&[d]);
    let od = out.data_mut();
    let xd = x.data();
    for r in 0..n {
        for j in 0..d {
            od[j] += xd[r * d + j];
        }
    }
    let inv = S::one() / S::from_f64(n as f64);
    for v in od.iter_mut() {
        *v *= inv;
    }
    out
}

/// Rows of `x` at `idx` (with repetition allowed).
pub fn gather_rows<S: Element>(x: &Tensor<S>, idx: &[usize]) -> Tensor<S> {
    let (n, d) = (x.rows(), x.cols());
    let mut out = Tensor::zeros(&[idx.len(), d]);
    let od = out.data_mut();
    let xd = x.data();
    for (r, &i) in idx.iter().enumerate() {
        assert!(i < n, "gather index {i} out of range 0..{n}");
        od[r * d..(r + 1) * d].copy_from_slice(&xd[i * d..(i + 1) * d]);
    }
    out
}

/// Adds rows of `src` into `dst` at `idx`.
pub fn scatter_add_rows<S: Element>(dst: &mut Tensor<S>, src: &Tensor<S>, idx: &[usize]) {
    let d = dst.cols();
    assert_eq!(src.cols(), d, "scatter_add col mismatch");
    let dd = dst.data_mut();
    let sd = src.data();
    for (r, &i) in idx.iter().enumerate() {
        for j in 0..d {
            dd[i * d + j] += sd[r * d + j];
        }
    }
}

/// Per-row L2 normalization; returns (y, norms). Zero rows stay zero.
pub fn l2_normalize_rows<S: Element>(x: &Tensor<S>) -> (Tensor<S>, Tensor<S>) {
    let (n, d) = (x.rows(), x.cols());
    let mut y = Tensor::zeros(&[n, d]);
    let mut norms = Tensor::zeros(&[n]);
    let xd = x.data();
    {
        let yd = y.data_mut();
        for r in 0..n {
            let row = &xd[r * d..(r + 1) * d];
            let mut sq = S::zero();
            for &v in row {
                sq += v * v;
            }
            let norm = sq.sqrt();
            norms.data_mut()[r] = norm;
            if norm > S::zero() {
                let inv = S::one() / norm;
                for j in 0..d {
                    yd[r * d + j] = row[j] * inv;
                }
            }
        }
    }
    (y, norms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matmul_identity() {
        // [[1,2],[3,4]] x I = [[1,2],[3,4]]
        let a = Tensor::<f64>::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]);
        let i = Tensor::<f64>::from_vec(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(matmul(&a, &i), a);
    }

    #[test]
    fn matmul_hand_example() {
        // [[1,2],[3,4]] x [[5],[6]] = [[17],[39]]
        let a = Tensor::<f64>::from_vec(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]);
        let b = Tensor::<f64>::from_vec(&[2, 1], vec![5.0, 6.0]);
        let c = matmul(&a, &b);
        assert_eq!(c.data(), &[17.0, 39.0]);
    }

    #[test]
    fn matmul_variants_agree() {
        let a = Tensor::<f64>::from_vec(&[2, 3], (0..6).map(|i| i as f64 * 0.3 - 1.0).collect());
        let b = Tensor::<f64>::from_vec(&[3, 4], (0..12).map(|i| i as f64 * 0.1).collect());
        let c = matmul(&a, &b);
        let c_nt = matmul_nt(&a, &transpose2d(&b));
        let c_tn = matmul_tn(&transpose2d(&a), &b);
        assert!(c.max_abs_diff(&c_nt) < 1e-12);
        assert!(c.max_abs_diff(&c_tn) < 1e-12);
    }

    #[test]
    fn softmax_symmetry() {
        let x = Tensor::<f64>::from_vec(&[3], vec![0.0, 0.0, 0.0]);
        let y = softmax_axis(&x, 0);
        for &v in y.data() {
            assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn softmax_direct_evaluation() {
        // softmax([1,0]) = [e/(e+1), 1/(e+1)] ~ [0.7311, 0.2689]
        let x = Tensor::<f64>::from_vec(&[2], vec![1.0, 0.0]);
        let y = softmax_axis(&x, 0);
        assert!((y.data()[0] - 0.7311).abs() < 1e-4);
        assert!((y.data()[1] - 0.2689).abs() < 1e-4);
    }

    #[test]
    fn softmax_masked_entry() {
        let x = Tensor::<f64>::from_vec(&[2], vec![f64::NEG_INFINITY, 5.0]);
        let y = softmax_axis(&x, 0);
        assert_eq!(y.data(), &[0.0, 1.0]);
    }

    #[test]
    fn softmax_rows_sum_to_one_on_axis0() {
        let x = Tensor::<f64>::from_vec(&[2, 3], vec![0.5, -1.0, 2.0, 0.0, 0.1, -0.3]);
        let y = softmax_axis(&x, 0);
        for j in 0..3 {
            let s = y.data()[j] + y.data()[3 + j];
            assert_relative_eq!(s, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn layer_norm_constant_row_maps_to_bias() {
        let x = Tensor::<f64>::from_vec(&[1, 4], vec![5.0; 4]);
        let g = Tensor::<f64>::from_vec(&[4], vec![1.0; 4]);
        let b = Tensor::<f64>::zeros(&[4]);
        let (y, _, _) = layer_norm(&x, &g, &b);
        for &v in y.data() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn layer_norm_unit_variance() {
        let x = Tensor::<f64>::from_vec(&[1, 2], vec![1.0, -1.0]);
        let g = Tensor::<f64>::from_vec(&[2], vec![1.0; 2]);
        let b = Tensor::<f64>::zeros(&[2]);
        let (y, _, _) = layer_norm(&x, &g, &b);
        // variance 1, epsilon 1e-5 inside the sqrt pulls values just below 1
        assert!((y.data()[0] - 1.0).abs() < 1e-4);
        assert!((y.data()[1] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn l2_normalize_unit_norm() {
        let x = Tensor::<f64>::from_vec(&[2, 2], vec![3.0, 4.0, 0.0, 0.0]);
        let (y, norms) = l2_normalize_rows(&x);
        assert_relative_eq!(y.data()[0], 0.6);
        assert_relative_eq!(y.data()[1], 0.8);
        assert_eq!(norms.data()[0], 5.0);
        assert_eq!(y.data()[2], 0.0); // zero row stays zero
    }

    #[test]
    fn gather_then_scatter_roundtrip() {
        let x = Tensor::<f64>::from_vec(&[3, 2], vec![1., 2., 3., 4., 5., 6.]);
        let g = gather_rows(&x, &[2, 0]);
        assert_eq!(g.data(), &[5., 6., 1., 2.]);
        let mut acc = Tensor::<f64>::zeros(&[3, 2]);
        scatter_add_rows(&mut acc, &g, &[2, 0]);
        assert_eq!(acc.data(), &[1., 2., 0., 0., 5., 6.]);
    }
}
