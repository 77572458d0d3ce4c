//! Spherical harmonics and spherical tensor operators in the |S,m> basis.

use std::f64::consts::PI;

use crate::linalg::C64;

/// Normalized associated Legendre values `p[l][m]` for `0 <= m <= l <= lmax`,
/// including the Condon–Shortley phase, so that
/// `Y_lm(θ, φ) = p[l][m](cos θ) e^{imφ}` for `m >= 0`.
pub fn legendre_table(lmax: usize, theta: f64) -> Vec<Vec<f64>> {
    let (s, x) = theta.sin_cos();
    let s = s.abs();
    let mut p = vec![Vec::new(); lmax + 1];
    for (l, row) in p.iter_mut().enumerate() {
        *row = vec![0.0; l + 1];
    }
    p[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=lmax {
        p[m][m] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..lmax {
        p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * x * p[m][m];
    }
    for m in 0..=lmax {
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    p
}

/// All `Y_lm` for `l <= lmax` at one direction, laid out as `[l][m + l]`.
pub fn sph_harm_table(lmax: usize, theta: f64, phi: f64) -> Vec<Vec<C64>> {
    let p = legendre_table(lmax, theta);
    (0..=lmax)
        .map(|l| {
            let mut row = vec![C64::new(0.0, 0.0); 2 * l + 1];
            for m in 0..=l {
                let y = C64::from_polar(p[l][m], m as f64 * phi);
                row[l + m] = y;
                if m > 0 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    row[l - m] = y.conj() * sign;
                }
            }
            row
        })
        .collect()
}

/// Single `Y_lm(θ, φ)`.
pub fn sph_harm(l: usize, m: i64, theta: f64, phi: f64) -> C64 {
    assert!(m.unsigned_abs() as usize <= l, "|m| must not exceed l");
    sph_harm_table(l, theta, phi)[l][(l as i64 + m) as usize]
}

/// Colatitude and azimuth of a unit vector.
pub fn angles(n: [f64; 3]) -> (f64, f64) {
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = if n[0] == 0.0 && n[1] == 0.0 { 0.0 } else { n[1].atan2(n[0]) };
    (theta, phi)
}

/// Banded spherical tensor operator `T^(l)_q`: the only nonzero entries are
/// `(k + q, k)`, stored as `band[k]`.
#[derive(Debug, Clone)]
pub struct TensorBand {
    pub q: i64,
    pub band: Vec<f64>,
}

impl TensorBand {
    /// `<a|T|b>` for states given as amplitudes.
    pub fn sandwich(&self, a: &[C64], b: &[C64]) -> C64 {
        let n = a.len() as i64 - 1;
        let mut acc = C64::new(0.0, 0.0);
        for (k, t) in self.band.iter().enumerate() {
            let row = k as i64 + self.q;
            if *t != 0.0 && (0..=n).contains(&row) {
                acc += a[row as usize].conj() * b[k] * *t;
            }
        }
        acc
    }
}

fn s_plus(two_s: usize, k: usize) -> f64 {
    // <k+1|S+|k>
    (((k + 1) * (two_s - k)) as f64).sqrt()
}

fn s_minus(two_s: usize, k: usize) -> f64 {
    // <k-1|S-|k>
    ((k * (two_s + 1 - k)) as f64).sqrt()
}

/// The `2l + 1` operators `T^(l)_q`, `q = -l..=l` (index `q + l`), built as
/// `T^(l)_l ∝ (-1)^l (S+)^l` and lowered with
/// `[S-, T_q] = sqrt((l+q)(l-q+1)) T_{q-1}`, then scaled so that
/// `<S,S|T^(l)_0|S,S> = 1`.
pub fn tensor_operators(two_s: usize, l: usize) -> Vec<TensorBand> {
    assert!(l <= two_s, "tensor rank exceeds 2S");
    let n = two_s;
    let li = l as i64;
    let mut top = vec![0.0; n + 1];
    for (k, t) in top.iter_mut().enumerate() {
        if k + l <= n {
            let mut v = if l % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..l {
                v *= s_plus(n, k + i);
            }
            *t = v;
        }
    }
    let max = top.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if max > 0.0 {
        for t in top.iter_mut() {
            *t /= max;
        }
    }
    let mut ops = vec![TensorBand { q: li, band: top }];
    for q in ((-li + 1)..=li).rev() {
        let prev = &ops.last().unwrap().band;
        let mut next = vec![0.0; n + 1];
        let c = (((li + q) * (li - q + 1)) as f64).sqrt();
        for (k, slot) in next.iter_mut().enumerate() {
            // entry (k + q - 1, k) of [S-, T_q]
            let row = k as i64 + q - 1;
            if row < 0 || row > n as i64 {
                continue;
            }
            let mut v = 0.0;
            if k as i64 + q <= n as i64 && k as i64 + q >= 1 {
                v += s_minus(n, (k as i64 + q) as usize) * prev[k];
            }
            if k >= 1 {
                v -= prev[k - 1] * s_minus(n, k);
            }
            *slot = v / c;
        }
        ops.push(TensorBand { q: q - 1, band: next });
    }
    ops.reverse();
    let scale = ops[l].band[n];
    for op in ops.iter_mut() {
        for t in op.band.iter_mut() {
            *t /= scale;
        }
    }
    ops
}
