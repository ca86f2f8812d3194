//! Eigenvalues of dense real nonsymmetric matrices.
//!
//! The general path balances the matrix, reduces it to upper Hessenberg form
//! with Householder reflections and runs the Francis implicit double-shift QR
//! iteration with deflation. Complex conjugate pairs come out of 2x2 blocks,
//! so the iteration itself never touches complex arithmetic.
//!
//! Symmetric tridiagonal matrices have a separate implicit QL path.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Subdiagonal entries at or below this multiple of the neighbouring diagonal
/// magnitudes are set to zero.
const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Order above which [`eigenvalues`] refuses to run.
pub const DEFAULT_ORDER_CAP: usize = 1024;

/// Sweeps allowed per unit of matrix order before giving up.
const SWEEPS_PER_ORDER: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub order_cap: usize,
    pub balance: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            order_cap: DEFAULT_ORDER_CAP,
            balance: true,
        }
    }
}

/// Eigenvalues of a matrix together with cheap residual diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// `|sum(lambda) - trace|`.
    pub trace_gap: f64,
    /// Relative gap between `prod(lambda)` and the determinant, for orders up
    /// to 16.
    pub det_gap: Option<f64>,
    /// QR sweeps spent.
    pub iterations: usize,
}

impl Spectrum {
    fn with_diagnostics(m: &DenseMatrix, eigenvalues: Vec<Complex64>, iterations: usize) -> Self {
        let trace_gap = trace_gap(m, &eigenvalues);
        let det_gap = (m.order() <= 16).then(|| det_gap(m, &eigenvalues));
        Self {
            eigenvalues,
            trace_gap,
            det_gap,
            iterations,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// All eigenvalues of `m` with default options.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Spectrum> {
    eigenvalues_with(m, EigenOptions::default())
}

pub fn eigenvalues_with(m: &DenseMatrix, opts: EigenOptions) -> Result<Spectrum> {
    let n = m.order();
    if n > opts.order_cap {
        return Err(Error::MatrixTooLarge {
            order: n,
            cap: opts.order_cap,
        });
    }
    let mut h = m.clone();
    if opts.balance {
        balance(&mut h);
    }
    reduce_to_hessenberg(&mut h);
    let (values, iterations) = hessenberg_qr(&mut h)?;
    Ok(Spectrum::with_diagnostics(m, values, iterations))
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off.len() == diag.len() - 1`), by implicit QL.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(n >= 1 && off.len() + 1 == n, "off-diagonal must have n - 1 entries");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let max_iter = SWEEPS_PER_ORDER * n;
    let mut total = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= UNIT_ROUNDOFF * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > max_iter {
                return Err(Error::NoConvergence { iterations: total });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Diagnostics comparing a matrix with a claimed spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumDiagnostics {
    pub trace_gap: f64,
    pub trace_tolerance: f64,
    pub det_gap: f64,
    /// Eigenvalues with a nonzero imaginary part and no conjugate partner.
    pub unpaired: usize,
    /// Distance from 1 to the nearest eigenvalue, for stochastic matrices.
    pub perron_gap: Option<f64>,
}

impl SpectrumDiagnostics {
    pub fn trace_flagged(&self) -> bool {
        self.trace_gap > self.trace_tolerance
    }

    pub fn is_clean(&self) -> bool {
        !self.trace_flagged()
            && self.unpaired == 0
            && self.perron_gap.is_none_or(|g| g <= 1e-8)
    }
}

pub fn spectrum_checks(m: &DenseMatrix, s: &Spectrum) -> SpectrumDiagnostics {
    let n = m.order();
    let values = &s.eigenvalues;
    let perron_gap = m.is_stochastic(1e-12).then(|| {
        values
            .iter()
            .map(|z| (z - 1.0).norm())
            .fold(f64::INFINITY, f64::min)
    });
    SpectrumDiagnostics {
        trace_gap: trace_gap(m, values),
        trace_tolerance: 1e-8 * n as f64 * m.norm_inf().max(f64::MIN_POSITIVE),
        det_gap: det_gap(m, values),
        unpaired: unpaired_count(values, 1e-10),
        perron_gap,
    }
}

fn trace_gap(m: &DenseMatrix, values: &[Complex64]) -> f64 {
    let sum: Complex64 = values.iter().sum();
    (sum - m.trace()).norm()
}

fn det_gap(m: &DenseMatrix, values: &[Complex64]) -> f64 {
    let prod: Complex64 = values.iter().product();
    let det = m.determinant();
    let scale = det
        .abs()
        .max(f64::EPSILON * m.norm_inf().powi(m.order() as i32));
    if scale == 0.0 {
        prod.norm()
    } else {
        (prod - det).norm() / scale
    }
}

fn unpaired_count(values: &[Complex64], tol: f64) -> usize {
    let mut used = vec![false; values.len()];
    let mut unpaired = 0;
    for i in 0..values.len() {
        if used[i] || values[i].im.abs() <= tol {
            continue;
        }
        used[i] = true;
        let target = values[i].conj();
        let partner = (0..values.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (values[a] - target)
                    .norm()
                    .total_cmp(&(values[b] - target).norm())
            })
            .filter(|&j| (values[j] - target).norm() <= tol);
        match partner {
            Some(j) => used[j] = true,
            None => unpaired += 1,
        }
    }
    unpaired
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable.
fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.order();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place.
fn reduce_to_hessenberg(a: &mut DenseMatrix) {
    let n = a.order();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let scale: f64 = (k + 1..n).map(|i| a[(i, k)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut norm2 = 0.0;
        for i in k + 1..n {
            v[i] = a[(i, k)] / scale;
            norm2 += v[i] * v[i];
        }
        let alpha = -norm2.sqrt().copysign(v[k + 1]);
        v[k + 1] -= alpha;
        let vtv: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vtv == 0.0 {
            continue;
        }
        // H A
        for j in k..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum();
            let f = 2.0 * s / vtv;
            for i in k + 1..n {
                a[(i, j)] -= f * v[i];
            }
        }
        // (H A) H
        for i in 0..n {
            let s: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            let f = 2.0 * s / vtv;
            for j in k + 1..n {
                a[(i, j)] -= f * v[j];
            }
        }
        a[(k + 1, k)] = alpha * scale;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Returns the
/// eigenvalues and the number of sweeps.
fn hessenberg_qr(a: &mut DenseMatrix) -> Result<(Vec<Complex64>, usize)> {
    let n = a.order();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let max_sweeps = SWEEPS_PER_ORDER * n;
    let mut sweeps = 0;
    // exceptional shifts accumulate into t
    let mut t = 0.0;
    // active block is rows/cols l..=nn
    let mut nn = n as isize - 1;
    let mut its = 0;
    while nn >= 0 {
        let nu = nn as usize;
        // look for a small subdiagonal element
        let mut l = nu;
        while l >= 1 {
            let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
            if s == 0.0 {
                s = anorm;
            }
            if a[(l, l - 1)].abs() <= UNIT_ROUNDOFF * s {
                a[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }
        let mut x = a[(nu, nu)];
        if l == nu {
            out[nu] = Complex64::new(x + t, 0.0);
            nn -= 1;
            its = 0;
            continue;
        }
        let mut y = a[(nu - 1, nu - 1)];
        let mut w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
        if l + 1 == nu {
            let p = 0.5 * (y - x);
            let q = p * p + w;
            let z = q.abs().sqrt();
            x += t;
            if q >= 0.0 {
                let z = p + z.copysign(p);
                let hi = x + z;
                let lo = if z != 0.0 { x - w / z } else { hi };
                out[nu - 1] = Complex64::new(hi, 0.0);
                out[nu] = Complex64::new(lo, 0.0);
            } else {
                out[nu - 1] = Complex64::new(x + p, z);
                out[nu] = Complex64::new(x + p, -z);
            }
            nn -= 2;
            its = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::NoConvergence { iterations: sweeps });
        }
        if its == 10 || its == 20 {
            t += x;
            for i in 0..=nu {
                a[(i, i)] -= x;
            }
            let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;
        // find two consecutive small subdiagonal elements
        let mut m = nu - 2;
        let (mut p, mut q, mut r);
        loop {
            let z = a[(m, m)];
            let r0 = x - z;
            let s0 = y - z;
            p = (r0 * s0 - w) / a[(m + 1, m)] + a[(m, m + 1)];
            q = a[(m + 1, m + 1)] - z - r0 - s0;
            r = a[(m + 2, m + 1)];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
            let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
            if u <= UNIT_ROUNDOFF * v {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=nu {
            a[(i, i - 2)] = 0.0;
            if i != m + 2 {
                a[(i, i - 3)] = 0.0;
            }
        }
        // double-shift sweep on rows/cols m..=nu
        for k in m..nu {
            if k != m {
                p = a[(k, k - 1)];
                q = a[(k + 1, k - 1)];
                r = if k + 1 != nu { a[(k + 2, k - 1)] } else { 0.0 };
                x = p.abs() + q.abs() + r.abs();
                if x != 0.0 {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            let s = (p * p + q * q + r * r).sqrt().copysign(p);
            if s == 0.0 {
                continue;
            }
            if k == m {
                if l != m {
                    a[(k, k - 1)] = -a[(k, k - 1)];
                }
            } else {
                a[(k, k - 1)] = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            let z = r / s;
            q /= p;
            r /= p;
            for j in k..=nu {
                let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                if k + 1 != nu {
                    pp += r * a[(k + 2, j)];
                    a[(k + 2, j)] -= pp * z;
                }
                a[(k + 1, j)] -= pp * y;
                a[(k, j)] -= pp * x;
            }
            let mmin = nu.min(k + 3);
            for i in l..=mmin {
                let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                if k + 1 != nu {
                    pp += z * a[(i, k + 2)];
                    a[(i, k + 2)] -= pp * r;
                }
                a[(i, k + 1)] -= pp * q;
                a[(i, k)] -= pp;
            }
        }
    }
    Ok((out, sweeps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_by_re_im(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_spectrum() {
        let m = DenseMatrix::from_diagonal(&[0.2, 0.9, 1.0]);
        let s = eigenvalues(&m).unwrap();
        let v = sorted_by_re_im(s.eigenvalues);
        for (z, want) in v.iter().zip([0.2, 0.9, 1.0]) {
            assert!((z - want).norm() < 1e-15);
        }
    }

    #[test]
    fn rotation_spectrum() {
        let m = DenseMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let v = sorted_by_re_im(eigenvalues(&m).unwrap().eigenvalues);
        assert!((v[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((v[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn companion_matrix_of_known_roots() {
        // (x-1)(x-2)(x-3)(x^2+1) = x^5 - 6x^4 + 12x^3 - 12x^2 + 11x - 6
        let coeffs = [-6.0, 11.0, -12.0, 12.0, -6.0];
        let n = coeffs.len();
        let mut m = DenseMatrix::zeros(n);
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        for (i, c) in coeffs.iter().enumerate() {
            m[(i, n - 1)] = -c;
        }
        let v = sorted_by_re_im(eigenvalues(&m).unwrap().eigenvalues);
        let want = [
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        for (z, w) in v.iter().zip(want) {
            assert!((z - w).norm() < 1e-9, "{z} vs {w}");
        }
    }

    #[test]
    fn order_cap_is_enforced() {
        let m = DenseMatrix::identity(5);
        let opts = EigenOptions {
            order_cap: 4,
            ..Default::default()
        };
        assert_eq!(
            eigenvalues_with(&m, opts),
            Err(Error::MatrixTooLarge { order: 5, cap: 4 })
        );
    }

    #[test]
    fn tridiagonal_ql_matches_general_path() {
        let diag = [0.5, 0.2, -0.3, 0.8, 0.1];
        let off = [0.4, 0.1, 0.7, 0.25];
        let mut ql = symmetric_tridiagonal_eigenvalues(&diag, &off).unwrap();
        ql.sort_by(f64::total_cmp);
        let mut m = DenseMatrix::zeros(5);
        for i in 0..5 {
            m[(i, i)] = diag[i];
            if i + 1 < 5 {
                m[(i, i + 1)] = off[i];
                m[(i + 1, i)] = off[i];
            }
        }
        let mut qr: Vec<f64> = eigenvalues(&m)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|z| {
                assert!(z.im.abs() < 1e-12);
                z.re
            })
            .collect();
        qr.sort_by(f64::total_cmp);
        for (a, b) in ql.iter().zip(&qr) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn checks_flag_perturbed_list() {
        let m = DenseMatrix::from_rows(&[[0.7, 0.3], [0.6, 0.4]]).unwrap();
        let mut s = eigenvalues(&m).unwrap();
        let clean = spectrum_checks(&m, &s);
        assert!(clean.is_clean());
        assert!(clean.trace_gap < 1e-15);
        assert!(clean.perron_gap.unwrap() < 1e-14);
        s.eigenvalues[0] += 1e-3;
        assert!(spectrum_checks(&m, &s).trace_flagged());
    }

    #[test]
    fn unpaired_complex_value_is_counted() {
        let m = DenseMatrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let s = Spectrum {
            eigenvalues: vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0)],
            trace_gap: 0.0,
            det_gap: None,
            iterations: 0,
        };
        assert_eq!(spectrum_checks(&m, &s).unpaired, 2);
    }
}
