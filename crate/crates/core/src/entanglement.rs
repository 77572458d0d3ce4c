//! Degeneracy classification, entanglement measures, witnesses and
//! metrology quantities. Geometric shortcuts are reported next to an
//! algebraic evaluation of the same quantity.

use nalgebra::{Matrix2, Matrix3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::{icosphere, husimi_from_polynomial, pair_metrics, stellar_rank, MultipoleTable};
use crate::linalg::{sym3_eigen, C64};
use crate::spinstate::{binomial, SpinOperators, SpinState};
use crate::stellar::{dot, normalize, stars_to_state, Constellation};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyPartition {
    pub parts: Vec<usize>,
    pub tolerance: f64,
    pub slocc_label: String,
    pub petrov_label: Option<String>,
}

/// Multiplicity multiset of a constellation with its class labels.
pub fn classify(c: &Constellation) -> DegeneracyPartition {
    let parts = c.partition();
    let n = c.two_s;
    let slocc = slocc_label(&parts, n);
    let petrov = if n == 4 {
        let p = match parts.as_slice() {
            [1, 1, 1, 1] => "I",
            [2, 1, 1] => "II",
            [2, 2] => "D",
            [3, 1] => "III",
            _ => "N",
        };
        Some(p.to_string())
    } else {
        None
    };
    DegeneracyPartition { parts, tolerance: c.tolerance, slocc_label: slocc, petrov_label: petrov }
}

fn slocc_label(parts: &[usize], n: usize) -> String {
    if parts.len() == 1 {
        return "separable".into();
    }
    let label = match (n, parts) {
        (2, [1, 1]) => "generic",
        (3, [2, 1]) => "W-class",
        (3, [1, 1, 1]) => "GHZ-class",
        (4, [3, 1]) => "W-class",
        (4, [2, 2]) => "Dicke-class",
        (4, [2, 1, 1]) => "degenerate-pair",
        (4, [1, 1, 1, 1]) => "generic",
        _ => {
            let list: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
            return format!("partition-({})", list.join(","));
        }
    };
    label.into()
}

/// Number of integer partitions of `n` by Euler's pentagonal recurrence,
/// or `None` once the value leaves `u128`.
pub fn count_partitions(n: usize) -> Option<u128> {
    let mut p: Vec<i128> = vec![0; n + 1];
    p[0] = 1;
    for m in 1..=n {
        let mut acc: i128 = 0;
        for k in 1.. {
            let k = k as usize;
            let g1 = k * (3 * k - 1) / 2;
            if g1 > m {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.checked_add(sign * p[m - g1])?;
            let g2 = k * (3 * k + 1) / 2;
            if g2 <= m {
                acc = acc.checked_add(sign * p[m - g2])?;
            }
        }
        p[m] = acc;
    }
    u128::try_from(p[n]).ok()
}

/// Amplitudes of the symmetric state on `N` qubits, indexed by bit string
/// (bit `i` set means qubit `i` is excited). A string with `k` ones carries
/// `c_k / sqrt(C(N, k))`.
pub fn expand_symmetric(state: &SpinState) -> Result<Vec<C64>> {
    const LIMIT: usize = 24;
    let n = state.two_s();
    if n > LIMIT {
        return Err(Error::SizeGuard { n, limit: LIMIT });
    }
    let norms: Vec<f64> = (0..=n).map(|k| binomial(n, k).sqrt()).collect();
    let c = state.amplitudes();
    Ok((0..1usize << n).map(|b| {
        let k = b.count_ones() as usize;
        c[k] / norms[k]
    }).collect())
}

/// Single-qubit reduced density matrix in the basis `{|0>, |1>}`, from the
/// closed forms `rho_11 = sum |c_k|^2 k/N` and
/// `rho_01 = sum c_k conj(c_{k+1}) sqrt((N-k)(k+1))/N`.
pub fn reduced_single_qubit(state: &SpinState) -> Matrix2<C64> {
    let n = state.two_s();
    let c = state.amplitudes();
    let nf = n as f64;
    let mut r11 = 0.0;
    let mut r01 = ZERO;
    for k in 0..=n {
        r11 += c[k].norm_sqr() * k as f64 / nf;
        if k < n {
            r01 += c[k] * c[k + 1].conj() * (((n - k) * (k + 1)) as f64).sqrt() / nf;
        }
    }
    Matrix2::new(C64::new(1.0 - r11, 0.0), r01, r01.conj(), C64::new(r11, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcurrencePair {
    pub geometric: f64,
    pub oracle: f64,
}

/// Two-qubit concurrence: `sin(ϑ/2)` from the star separation, and
/// `2|c00 c11 - c01 c10|` on the expanded amplitudes.
pub fn concurrence(state: &SpinState) -> Result<ConcurrencePair> {
    if state.two_s() != 2 {
        return Err(Error::WrongSize { expected: 2, got: state.two_s() });
    }
    let c = crate::stellar::stars_of(state);
    let dirs = c.expanded_directions();
    let cos = dot(dirs[0], dirs[1]).clamp(-1.0, 1.0);
    let geometric = (0.5 * cos.acos()).sin();
    let a = state.amplitudes();
    let half = a[1] / 2f64.sqrt();
    let oracle = 2.0 * (a[0] * a[2] - half * half).norm();
    Ok(ConcurrencePair { geometric, oracle })
}

/// One-versus-rest concurrence: the mean-pair-dot formula and the purity
/// evaluation `sqrt(2 (1 - Tr rho_1^2))` of the exact single-qubit reduction.
pub fn concurrence_one_vs_rest(c: &Constellation) -> Result<ConcurrencePair> {
    if c.two_s < 2 {
        return Err(Error::TooFewStars { min: 2, got: c.two_s });
    }
    let n = c.two_s as f64;
    let mean = pair_metrics(c, false)?.mean_pair_dot.unwrap_or(1.0);
    let geometric = ((n - 1.0) / n * (1.0 - mean)).max(0.0).sqrt();
    let rho = reduced_single_qubit(&stars_to_state(c)?);
    let purity = (rho * rho).trace().re;
    let oracle = (2.0 * (1.0 - purity)).max(0.0).sqrt();
    Ok(ConcurrencePair { geometric, oracle })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeTangle {
    pub oracle: f64,
    /// Same quantity from the discriminant of `det(A0 + x A1)`.
    pub oracle_discriminant: f64,
    pub geometric_product: f64,
    pub fitted_constant: Option<f64>,
}

/// Three-tangle of a symmetric three-qubit state.
pub fn three_tangle(state: &SpinState) -> Result<ThreeTangle> {
    if state.two_s() != 3 {
        return Err(Error::WrongSize { expected: 3, got: state.two_s() });
    }
    let t = expand_symmetric(state)?;
    let oracle = cayley_tangle(&t);
    let oracle_discriminant = discriminant_tangle(&t);
    let c = crate::stellar::stars_of(state);
    let geometric_product = pair_metrics(&c, false)?.distance_product;
    let fitted_constant = (geometric_product > 1e-12).then(|| oracle / geometric_product);
    Ok(ThreeTangle { oracle, oracle_discriminant, geometric_product, fitted_constant })
}

/// `4 |d1 - 2 d2 + 4 d3|` with `a[ijk]` at index `4i + 2j + k`.
fn cayley_tangle(a: &[C64]) -> f64 {
    let x = |i: usize, j: usize, k: usize| a[4 * i + 2 * j + k];
    let (a000, a001, a010, a011) = (x(0, 0, 0), x(0, 0, 1), x(0, 1, 0), x(0, 1, 1));
    let (a100, a101, a110, a111) = (x(1, 0, 0), x(1, 0, 1), x(1, 1, 0), x(1, 1, 1));
    let d1 = a000 * a000 * a111 * a111 + a001 * a001 * a110 * a110 + a010 * a010 * a101 * a101
        + a100 * a100 * a011 * a011;
    let d2 = a000 * a111 * a011 * a100
        + a000 * a111 * a101 * a010
        + a000 * a111 * a110 * a001
        + a011 * a100 * a101 * a010
        + a011 * a100 * a110 * a001
        + a101 * a010 * a110 * a001;
    let d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100;
    4.0 * (d1 - d2 * 2.0 + d3 * 4.0).norm()
}

/// `4 |p1^2 - 4 p0 p2|` where `det(A0 + x A1) = p0 + p1 x + p2 x^2` and
/// `A_i` are the slices of the tensor on the first qubit.
fn discriminant_tangle(a: &[C64]) -> f64 {
    let m = |i: usize, j: usize, k: usize| a[4 * i + 2 * j + k];
    let p0 = m(0, 0, 0) * m(0, 1, 1) - m(0, 0, 1) * m(0, 1, 0);
    let p2 = m(1, 0, 0) * m(1, 1, 1) - m(1, 0, 1) * m(1, 1, 0);
    let p1 = m(0, 0, 0) * m(1, 1, 1) + m(1, 0, 0) * m(0, 1, 1) - m(0, 0, 1) * m(1, 1, 0) - m(1, 0, 1) * m(0, 1, 0);
    4.0 * (p1 * p1 - p0 * p2 * 4.0).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricEntanglement {
    pub value: f64,
    pub max_overlap: f64,
    pub direction: [f64; 3],
    /// `-log2 max_k prod_{l != k} (1 + n_k·n_l)/2`, with the additive
    /// constant taken as zero.
    pub star_surrogate: f64,
    pub converged: bool,
    pub seeds: usize,
}

const GRID_SEEDS: usize = 6;
const MAX_SWEEPS: usize = 400;

/// `E_g = -log2 max_n |<n|ψ>|^2` by multi-start golden-section ascent seeded
/// at every star and at the largest Husimi values on an icosphere grid.
pub fn geometric_entanglement(c: &Constellation, exec: Exec) -> Result<GeometricEntanglement> {
    if c.two_s == 0 {
        return Err(Error::TooFewStars { min: 1, got: 0 });
    }
    let poly = stars_to_state(c)?.to_polynomial();
    let q = |n: [f64; 3]| husimi_from_polynomial(&poly, n);

    let mut seeds: Vec<[f64; 3]> = c.stars.iter().map(|s| s.n).collect();
    let grid = icosphere(2);
    let mut scored: Vec<(f64, usize)> = grid.iter().enumerate().map(|(i, n)| (q(*n), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    seeds.extend(scored.iter().take(GRID_SEEDS).map(|(_, i)| grid[*i]));

    let runs = exec.map_slice(&seeds, |s| ascend(&q, *s));
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.1 > runs[best].1 {
            best = i;
        }
    }
    let (direction, max_overlap, converged) = runs[best];

    let dirs = c.expanded_directions();
    let mut surrogate_max = 0.0f64;
    for (k, nk) in dirs.iter().enumerate() {
        let p: f64 = dirs.iter().enumerate().filter(|(l, _)| *l != k).map(|(_, nl)| 0.5 * (1.0 + dot(*nk, *nl))).product();
        surrogate_max = surrogate_max.max(p);
    }
    Ok(GeometricEntanglement {
        value: -max_overlap.log2(),
        max_overlap,
        direction,
        star_surrogate: -surrogate_max.log2(),
        converged,
        seeds: seeds.len(),
    })
}

fn tangent_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(helper, n);
    let u = normalize([helper[0] - d * n[0], helper[1] - d * n[1], helper[2] - d * n[2]]).unwrap();
    let w = [n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]];
    (u, w)
}

fn along(n: [f64; 3], u: [f64; 3], t: f64) -> [f64; 3] {
    let (s, c) = t.sin_cos();
    let v = [c * n[0] + s * u[0], c * n[1] + s * u[1], c * n[2] + s * u[2]];
    normalize(v).unwrap_or(n)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-12 * (1.0 + hi - lo) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 { (x1, f1) } else { (x2, f2) }
}

fn ascend<F: Fn([f64; 3]) -> f64>(q: &F, start: [f64; 3]) -> ([f64; 3], f64, bool) {
    let mut n = start;
    let mut v = q(n);
    let mut h = 0.3f64;
    for _ in 0..MAX_SWEEPS {
        let before = v;
        let mut moved = 0.0f64;
        let (u, w) = tangent_basis(n);
        for dir in [u, w] {
            let (t, val) = golden_max(|t| q(along(n, dir, t)), -h, h);
            if val > v {
                n = along(n, dir, t);
                v = val;
                moved = moved.max(t.abs());
            }
        }
        if moved < 1e-9 && v - before < 1e-14 {
            return (n, v, true);
        }
        h = (2.0 * moved).clamp(1e-8, 0.3);
    }
    (n, v, false)
}

/// `1 - max_A (1/(k(k-1))) sum_{i != j in A} n_i·n_j` over cyclically
/// contiguous windows `A` of size `2 <= k <= N - 1` in star order. An
/// approximation; absent for `N < 3`.
pub fn gm_concurrence_approx(c: &Constellation) -> Option<f64> {
    let dirs = c.expanded_directions();
    let n = dirs.len();
    if n < 3 {
        return None;
    }
    let mut best = f64::NEG_INFINITY;
    for k in 2..n {
        for start in 0..n {
            let idx: Vec<usize> = (0..k).map(|i| (start + i) % n).collect();
            let mut s = 0.0;
            for &i in &idx {
                for &j in &idx {
                    if i != j {
                        s += dot(dirs[i], dirs[j]);
                    }
                }
            }
            best = best.max(s / (k * (k - 1)) as f64);
        }
    }
    Some(1.0 - best)
}

/// Necessary-condition witnesses of genuine multipartite entanglement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRecord {
    pub distance_product: f64,
    pub distance_product_positive: bool,
    pub anticoherence_order: usize,
    pub stellar_rank: usize,
    pub effective_rank: f64,
    pub degenerate: bool,
}

pub fn witnesses(c: &Constellation, multipoles: &MultipoleTable) -> Result<WitnessRecord> {
    let pm = pair_metrics(c, false)?;
    let (rank, eff) = stellar_rank(c);
    Ok(WitnessRecord {
        distance_product: pm.distance_product,
        distance_product_positive: pm.distance_product > 0.0,
        anticoherence_order: multipoles.anticoherence_order,
        stellar_rank: rank,
        effective_rank: eff,
        degenerate: c.stars.iter().any(|s| s.multiplicity > 1),
    })
}

/// First and symmetrized second moments of the collective spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinMoments {
    pub mean: [f64; 3],
    /// `½<S_a S_b + S_b S_a>`.
    pub second: [[f64; 3]; 3],
}

impl SpinMoments {
    pub fn of(state: &SpinState) -> Self {
        let ops = SpinOperators::new(state.two_s());
        let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
        let v: Vec<_> = ops.components().iter().map(|s| *s * &psi).collect();
        let mut mean = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for a in 0..3 {
            mean[a] = psi.dotc(&v[a]).re;
            for b in 0..3 {
                second[a][b] = v[a].dotc(&v[b]).re;
            }
        }
        SpinMoments { mean, second }
    }

    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let mut c = self.second;
        for (a, row) in c.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                *x -= self.mean[a] * self.mean[b];
            }
        }
        c
    }

    fn quadratic(m: &[[f64; 3]; 3], u: [f64; 3], w: [f64; 3]) -> f64 {
        (0..3).map(|a| (0..3).map(|b| u[a] * m[a][b] * w[b]).sum::<f64>()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QfiAxis {
    Fixed([f64; 3]),
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Qfi {
    pub value: f64,
    pub axis: [f64; 3],
    /// `D = <S>/j`.
    pub dipole: [f64; 3],
    pub dipole_along_axis: f64,
    /// `Q_nn = (<S_n^2> - j/2) / (j (j - 1/2))`; absent for `j = 1/2`.
    pub quadrupole_along_axis: Option<f64>,
    pub covariance: [[f64; 3]; 3],
}

/// Quantum Fisher information `4 Var(S_n)` for a pure state.
pub fn qfi(state: &SpinState, axis: QfiAxis) -> Result<Qfi> {
    let mom = SpinMoments::of(state);
    let cov = mom.covariance();
    let (value, axis) = match axis {
        QfiAxis::Fixed(a) => {
            let a = normalize(a).ok_or(Error::ZeroAxis)?;
            (4.0 * SpinMoments::quadratic(&cov, a, a), a)
        }
        QfiAxis::Optimal => {
            let m = Matrix3::from_fn(|i, j| cov[i][j]);
            let (vals, vecs) = sym3_eigen(&m);
            (4.0 * vals[2], vecs[2])
        }
    };
    let j = state.spin();
    let dipole = mom.mean.map(|x| x / j);
    let quadrupole_along_axis = (state.two_s() >= 2).then(|| {
        let s2 = SpinMoments::quadratic(&mom.second, axis, axis);
        (s2 - j / 2.0) / (j * (j - 0.5))
    });
    Ok(Qfi {
        value: value.max(0.0),
        axis,
        dipole,
        dipole_along_axis: dot(dipole, axis),
        quadrupole_along_axis,
        covariance: cov,
    })
}

/// `ξ² = N min_⊥ Var(S_⊥) / |<S>|^2` over directions orthogonal to `<S>`.
pub fn squeezing(state: &SpinState) -> Result<f64> {
    let mom = SpinMoments::of(state);
    let len = dot(mom.mean, mom.mean).sqrt();
    if len < 1e-10 {
        return Err(Error::VanishingMeanSpin);
    }
    let m = mom.mean.map(|x| x / len);
    let (u, w) = tangent_basis(m);
    let cov = mom.covariance();
    let a = SpinMoments::quadratic(&cov, u, u);
    let b = SpinMoments::quadratic(&cov, u, w);
    let d = SpinMoments::quadratic(&cov, w, w);
    let min = 0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b * b).sqrt();
    Ok(state.two_s() as f64 * min / (len * len))
}

/// Every measure applicable to the state; inapplicable entries are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub two_s: usize,
    pub concurrence_geometric: Option<f64>,
    pub concurrence_oracle: Option<f64>,
    pub concurrence_one_vs_rest_geometric: Option<f64>,
    pub concurrence_one_vs_rest_oracle: Option<f64>,
    pub three_tangle_oracle: Option<f64>,
    pub three_tangle_oracle_discriminant: Option<f64>,
    pub three_tangle_geometric_product: Option<f64>,
    pub three_tangle_fitted_constant: Option<f64>,
    pub e_geometric: f64,
    pub e_geometric_star_surrogate: f64,
    pub e_geometric_converged: bool,
    pub gm_concurrence_approx: Option<f64>,
    pub distance_product: f64,
    pub qfi_max: f64,
    pub qfi_axis: [f64; 3],
    pub squeezing_xi2: Option<f64>,
}

pub fn measure_report(state: &SpinState, c: &Constellation, exec: Exec) -> Result<MeasureReport> {
    let n = state.two_s();
    let conc = if n == 2 { Some(concurrence(state)?) } else { None };
    let one = if n >= 2 { Some(concurrence_one_vs_rest(c)?) } else { None };
    let tangle = if n == 3 { Some(three_tangle(state)?) } else { None };
    let eg = geometric_entanglement(c, exec)?;
    let q = qfi(state, QfiAxis::Optimal)?;
    Ok(MeasureReport {
        two_s: n,
        concurrence_geometric: conc.map(|x| x.geometric),
        concurrence_oracle: conc.map(|x| x.oracle),
        concurrence_one_vs_rest_geometric: one.map(|x| x.geometric),
        concurrence_one_vs_rest_oracle: one.map(|x| x.oracle),
        three_tangle_oracle: tangle.map(|t| t.oracle),
        three_tangle_oracle_discriminant: tangle.map(|t| t.oracle_discriminant),
        three_tangle_geometric_product: tangle.map(|t| t.geometric_product),
        three_tangle_fitted_constant: tangle.and_then(|t| t.fitted_constant),
        e_geometric: eg.value,
        e_geometric_star_surrogate: eg.star_surrogate,
        e_geometric_converged: eg.converged,
        gm_concurrence_approx: gm_concurrence_approx(c),
        distance_product: pair_metrics(c, false)?.distance_product,
        qfi_max: q.value,
        qfi_axis: q.axis,
        squeezing_xi2: squeezing(state).ok(),
    })
}
