//! Raw f64 kernels shared by the autodiff graph and the no-grad decode path.
//!
//! All loops use fixed summation orders so repeated runs are bit-identical.

/// Dot product with four independent accumulators. The split keeps the
/// reduction order fixed while letting the compiler vectorize.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    let chunks = n / 4;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    for i in 0..chunks {
        let j = i * 4;
        s0 += a[j] * b[j];
        s1 += a[j + 1] * b[j + 1];
        s2 += a[j + 2] * b[j + 2];
        s3 += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..n {
        tail += a[j] * b[j];
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// `c += a @ b` with `a: [m,k]`, `b: [k,n]`, `c: [m,n]`.
pub fn matmul_acc(a: &[f64], b: &[f64], c: &mut [f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let crow = &mut c[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            if av != 0.0 {
                let brow = &b[p * n..(p + 1) * n];
                for j in 0..n {
                    crow[j] += av * brow[j];
                }
            }
        }
    }
}

pub fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    matmul_acc(a, b, &mut c, m, k, n);
    c
}

/// `c += a @ b^T` with `a: [m,k]`, `b: [n,k]`, `c: [m,n]`.
pub fn matmul_nt_acc(a: &[f64], b: &[f64], c: &mut [f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(c.len(), m * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let crow = &mut c[i * n..(i + 1) * n];
        for j in 0..n {
            crow[j] += dot(arow, &b[j * k..(j + 1) * k]);
        }
    }
}

pub fn matmul_nt(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    matmul_nt_acc(a, b, &mut c, m, k, n);
    c
}

/// `c += a^T @ b` with `a: [m,k]`, `b: [m,n]`, `c: [k,n]`.
pub fn matmul_tn_acc(a: &[f64], b: &[f64], c: &mut [f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(c.len(), k * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let brow = &b[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            if av != 0.0 {
                let crow = &mut c[p * n..(p + 1) * n];
                for j in 0..n {
                    crow[j] += av * brow[j];
                }
            }
        }
    }
}

/// Standard normal CDF via the exact erf form.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// GELU in its exact form `x * Phi(x)`.
pub fn gelu(x: f64) -> f64 {
    x * norm_cdf(x)
}

/// d/dx of `x * Phi(x)` = `Phi(x) + x * phi(x)`.
pub fn gelu_deriv(x: f64) -> f64 {
    norm_cdf(x) + x * norm_pdf(x)
}

/// Numerically stable softmax of one row, in place. `mask[j] == false`
/// entries are treated as -inf before the exponentiation and come out
/// exactly zero. At least one entry must stay unmasked.
pub fn softmax_row_in_place(row: &mut [f64], mask: Option<&[bool]>) {
    let mut max = f64::NEG_INFINITY;
    for (j, &v) in row.iter().enumerate() {
        let allowed = mask.map_or(true, |m| m[j]);
        if allowed && v > max {
            max = v;
        }
    }
    let mut sum = 0.0;
    for (j, v) in row.iter_mut().enumerate() {
        let allowed = mask.map_or(true, |m| m[j]);
        if allowed {
            *v = (*v - max).exp();
            sum += *v;
        } else {
            *v = 0.0;
        }
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Rescale a row to Euclidean norm `sqrt(len)`. Returns the original norm.
pub fn normalize_row_sqrt_dim(row: &mut [f64]) -> f64 {
    let norm = dot(row, row).sqrt();
    let target = (row.len() as f64).sqrt();
    let scale = target / norm;
    for v in row.iter_mut() {
        *v *= scale;
    }
    norm
}
