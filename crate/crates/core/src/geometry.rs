//! Quantities derived from a constellation or its state: pair metrics,
//! multipoles, quasi-probability fields, stellar rank and random-ensemble
//! statistics.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::harmonics::{angles, sph_harm_table, tensor_operators};
use crate::linalg::C64;
use crate::spinstate::{MajoranaPolynomial, SpinState};
use crate::stellar::{
    antipode, chordal, dot, find_stars, polynomial_roots, unproject, Constellation, Convention, ExtComplex,
    DEFAULT_TOLERANCE,
};

/// Default absolute threshold on `|<T^(l)_m>|` for anticoherence.
pub const ANTICOHERENCE_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairMetrics {
    pub dot: Vec<Vec<f64>>,
    pub chordal: Vec<Vec<f64>>,
    pub normalized_chordal: Vec<Vec<f64>>,
    /// `(1 / (N (N - 1))) sum_{k != l} n_k·n_l`; absent for a single star.
    pub mean_pair_dot: Option<f64>,
    /// `prod_{k<l} (d_kl / 2)^2`.
    pub distance_product: f64,
    /// `(k, l, m, n_k·(n_l × n_m))` for `k < l < m`, when requested.
    pub triple_products: Option<Vec<(usize, usize, usize, f64)>>,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Pairwise metrics over the multiplicity-expanded star list.
pub fn pair_metrics(c: &Constellation, with_triples: bool) -> Result<PairMetrics> {
    let dirs = c.expanded_directions();
    if dirs.is_empty() {
        return Err(Error::EmptyConstellation);
    }
    let n = dirs.len();
    let mut dm = vec![vec![0.0; n]; n];
    let mut ch = vec![vec![0.0; n]; n];
    let mut nch = vec![vec![0.0; n]; n];
    let mut sum = 0.0;
    let mut prod = 1.0;
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { 1.0 } else { dot(dirs[i], dirs[j]).clamp(-1.0, 1.0) };
            let cd = if i == j { 0.0 } else { chordal(dirs[i], dirs[j]) };
            dm[i][j] = d;
            ch[i][j] = cd;
            nch[i][j] = cd / 2.0;
            if i != j {
                sum += d;
            }
            if i < j {
                prod *= cd * cd / 4.0;
            }
        }
    }
    let mean_pair_dot = (n > 1).then(|| sum / (n * (n - 1)) as f64);
    let triple_products = with_triples.then(|| {
        let mut t = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let bc_cross: Vec<[f64; 3]> = ((b + 1)..n).map(|m| cross(dirs[b], dirs[m])).collect();
                for (off, x) in bc_cross.iter().enumerate() {
                    t.push((a, b, b + 1 + off, dot(dirs[a], *x)));
                }
            }
        }
        t
    });
    Ok(PairMetrics {
        dot: dm,
        chordal: ch,
        normalized_chordal: nch,
        mean_pair_dot,
        distance_product: prod,
        triple_products,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipoleEntry {
    pub l: usize,
    pub m: i64,
    pub re: f64,
    pub im: f64,
}

/// Exact multipoles `<T^(l)_m>` and the star average `(1/2S) sum_k Y_lm(n_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleTable {
    pub two_s: usize,
    pub max_l: usize,
    /// `[l][m + l]`.
    pub moments: Vec<Vec<C64>>,
    /// `sqrt((2l+1)/4π) <T^(l)_m>`, the expectation of `Y_lm(S/S)`.
    pub harmonic_moments: Vec<Vec<C64>>,
    pub star_average: Vec<Vec<C64>>,
    pub anticoherence_order: usize,
    pub threshold: f64,
}

impl MultipoleTable {
    pub fn moment(&self, l: usize, m: i64) -> C64 {
        self.moments[l][(l as i64 + m) as usize]
    }

    /// Largest `|<Y_lm>| - star average` discrepancy per `l`.
    pub fn star_discrepancy(&self) -> Vec<f64> {
        self.harmonic_moments
            .iter()
            .zip(&self.star_average)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
            .collect()
    }

    /// `sqrt(sum_m |<T^(l)_m>|^2)`, the rotation-invariant size of rank `l`.
    pub fn rank_norms(&self) -> Vec<f64> {
        self.moments.iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect()
    }

    pub fn entries(&self) -> Vec<MultipoleEntry> {
        let mut out = Vec::new();
        for (l, row) in self.moments.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                out.push(MultipoleEntry {
                    l,
                    m: i as i64 - l as i64,
                    re: v.re,
                    im: v.im,
                });
            }
        }
        out
    }
}

fn anticoherence(moments: &[Vec<C64>], threshold: f64) -> usize {
    let mut t = 0;
    for row in moments.iter().skip(1) {
        if row.iter().all(|z| z.norm() < threshold) {
            t += 1;
        } else {
            break;
        }
    }
    t
}

/// Multipoles up to `max_l` with the default anticoherence threshold.
pub fn multipoles(state: &SpinState, max_l: usize) -> Result<MultipoleTable> {
    multipoles_with(state, max_l, ANTICOHERENCE_THRESHOLD, Convention::default())
}

pub fn multipoles_with(state: &SpinState, max_l: usize, threshold: f64, conv: Convention) -> Result<MultipoleTable> {
    let two_s = state.two_s();
    if max_l > two_s {
        return Err(Error::OrderOutOfRange { max_l, two_s });
    }
    let amps = state.amplitudes();
    let mut moments = Vec::with_capacity(max_l + 1);
    let mut harmonic = Vec::with_capacity(max_l + 1);
    for l in 0..=max_l {
        let row: Vec<C64> = tensor_operators(two_s, l).iter().map(|t| t.sandwich(amps, amps)).collect();
        let f = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
        harmonic.push(row.iter().map(|z| z * f).collect());
        moments.push(row);
    }
    let stars = find_stars(&state.to_polynomial(), DEFAULT_TOLERANCE, conv)?;
    let dirs = stars.expanded_directions();
    let mut star_average = vec![Vec::new(); max_l + 1];
    for (l, row) in star_average.iter_mut().enumerate() {
        *row = vec![C64::new(0.0, 0.0); 2 * l + 1];
    }
    for d in &dirs {
        let (th, ph) = angles(*d);
        let y = sph_harm_table(max_l, th, ph);
        for l in 0..=max_l {
            for (acc, v) in star_average[l].iter_mut().zip(&y[l]) {
                *acc += v / dirs.len() as f64;
            }
        }
    }
    let anticoherence_order = anticoherence(&moments, threshold);
    Ok(MultipoleTable {
        two_s,
        max_l,
        moments,
        harmonic_moments: harmonic,
        star_average,
        anticoherence_order,
        threshold,
    })
}

/// Anticoherence order over all ranks `1..=2S`.
pub fn anticoherence_order(state: &SpinState) -> usize {
    multipoles(state, state.two_s()).map(|m| m.anticoherence_order).unwrap_or(0)
}

/// `(number of distinct stars, N^2 / sum m_k^2)`.
pub fn stellar_rank(c: &Constellation) -> (usize, f64) {
    let n = c.two_s as f64;
    let sq: f64 = c.stars.iter().map(|s| (s.multiplicity * s.multiplicity) as f64).sum();
    (c.stars.len(), n * n / sq)
}

/// `|<n|ψ>|^2` from the coherent-state inner product.
pub fn husimi_at(state: &SpinState, n: [f64; 3]) -> Result<f64> {
    let coh = SpinState::coherent(state.two_s(), n)?;
    coh.fidelity(state)
}

/// `|P(ẑ)|^2 / (1 + |ẑ|^2)^{2S}` with `ẑ` the stereographic coordinate of
/// `-n` (north-at-zero chart). This equals `|<n|ψ>|^2` exactly, so the zeros
/// of `Q` sit at the antipodes of the stars.
pub fn husimi_from_polynomial(poly: &MajoranaPolynomial, n: [f64; 3]) -> f64 {
    let zh = unproject([-n[0], -n[1], -n[2]], Convention::NorthAtZero);
    let deg = poly.two_s as i32;
    match zh {
        ExtComplex::Infinity => poly.coefficients[poly.two_s].norm_sqr(),
        ExtComplex::Finite(z) if z.norm() <= 1.0 => poly.eval(z).norm_sqr() / (1.0 + z.norm_sqr()).powi(deg),
        ExtComplex::Finite(z) => {
            let w = z.inv();
            let rev = poly.coefficients.iter().fold(C64::new(0.0, 0.0), |acc, a| acc * w + a);
            rev.norm_sqr() / (1.0 + w.norm_sqr()).powi(deg)
        }
    }
}

/// Directions where the Husimi function vanishes: the antipodes of the
/// roots, drawn in the north-at-zero chart whatever the display convention.
pub fn husimi_zero_directions(c: &Constellation) -> Vec<[f64; 3]> {
    c.stars
        .iter()
        .map(|s| crate::stellar::project(antipode(s.z), Convention::NorthAtZero))
        .collect()
}

/// Roots in `ζ` of the coherent-state (Bargmann) function `<ζ|ψ>`, with
/// `<ζ|` the coherent bra whose spinor is `(1, ζ)`.
pub fn bargmann_roots(state: &SpinState) -> Result<Vec<ExtComplex>> {
    let n = state.two_s();
    let sb = crate::spinstate::sqrt_binomials(n);
    // <ζ|ψ> = sum_k sqrt(C) c_k conj(ζ)^{N-k}; as a polynomial in u = conj(ζ)
    let coeffs: Vec<C64> = (0..=n).map(|j| state.amplitudes()[n - j] * sb[n - j]).collect();
    let poly = MajoranaPolynomial::new(n, coeffs)?;
    Ok(polynomial_roots(&poly)?
        .roots
        .into_iter()
        .map(|u| match u {
            ExtComplex::Finite(u) => ExtComplex::Finite(u.conj()),
            ExtComplex::Infinity => ExtComplex::Infinity,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub theta: f64,
    pub phi: f64,
    pub value: f64,
}

/// Husimi values on a grid with the grid maximum reported separately.
#[derive(Debug, Clone, PartialEq)]
pub struct HusimiField {
    pub samples: Vec<FieldSample>,
    pub max: f64,
}

pub fn husimi_q(state: &SpinState, grid: &[[f64; 3]], exec: Exec) -> Result<HusimiField> {
    if grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let values: Vec<Result<f64>> = exec.map_slice(grid, |n| husimi_at(state, *n));
    let mut samples = Vec::with_capacity(grid.len());
    for (n, v) in grid.iter().zip(values) {
        let (theta, phi) = angles(*n);
        samples.push(FieldSample { theta, phi, value: v? });
    }
    let max = samples.iter().map(|s| s.value).fold(0.0, f64::max);
    Ok(HusimiField { samples, max })
}

/// `W(n) = sum_l sqrt(4π/(2l+1)) sum_m conj(<Y_lm>) Y_lm(n)`.
pub fn wigner_sphere(state: &SpinState, grid: &[[f64; 3]], max_l: usize, exec: Exec) -> Result<Vec<FieldSample>> {
    let table = multipoles(state, max_l)?;
    let coeffs: Vec<Vec<C64>> = table
        .harmonic_moments
        .iter()
        .enumerate()
        .map(|(l, row)| {
            let f = (4.0 * PI / (2 * l + 1) as f64).sqrt();
            row.iter().map(|z| z.conj() * f).collect()
        })
        .collect();
    Ok(exec.map_slice(grid, |n| {
        let (theta, phi) = angles(*n);
        let y = sph_harm_table(max_l, theta, phi);
        let mut w = C64::new(0.0, 0.0);
        for l in 0..=max_l {
            for (c, v) in coeffs[l].iter().zip(&y[l]) {
                w += c * v;
            }
        }
        FieldSample { theta, phi, value: w.re }
    }))
}

/// Largest `|Im W|` over a grid, for the reality check.
pub fn wigner_imaginary_part(state: &SpinState, grid: &[[f64; 3]], max_l: usize) -> Result<f64> {
    let table = multipoles(state, max_l)?;
    let mut worst: f64 = 0.0;
    for n in grid {
        let (theta, phi) = angles(*n);
        let y = sph_harm_table(max_l, theta, phi);
        let mut w = C64::new(0.0, 0.0);
        for l in 0..=max_l {
            let f = (4.0 * PI / (2 * l + 1) as f64).sqrt();
            for (c, v) in table.harmonic_moments[l].iter().zip(&y[l]) {
                w += c.conj() * v * f;
            }
        }
        worst = worst.max(w.im.abs());
    }
    Ok(worst)
}

/// Haar-random state from independent standard complex Gaussian amplitudes.
pub fn random_state(two_s: usize, seed: u64) -> SpinState {
    random_state_stream(two_s, seed, 0)
}

/// As [`random_state`], drawing from ChaCha stream `stream` so that
/// ensemble members are independent of evaluation order.
pub fn random_state_stream(two_s: usize, seed: u64, stream: u64) -> SpinState {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    loop {
        let amps: Vec<C64> = (0..=two_s)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        if let Ok(s) = SpinState::new(two_s, amps) {
            return s;
        }
    }
}

/// Pearson χ² against a uniform distribution over the bins.
pub fn chi_square_uniform(counts: &[usize]) -> (f64, usize, f64) {
    let total: usize = counts.iter().sum();
    let k = counts.len();
    let expect = total as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    let dof = k - 1;
    let p = 1.0 - ChiSquared::new(dof as f64).map(|d| d.cdf(stat)).unwrap_or(0.0);
    (stat, dof, p)
}

/// Counts per octant, indexed by the sign bits of (x, y, z).
pub fn octant_counts(dirs: &[[f64; 3]]) -> [usize; 8] {
    let mut c = [0usize; 8];
    for d in dirs {
        let i = (d[0] < 0.0) as usize | ((d[1] < 0.0) as usize) << 1 | ((d[2] < 0.0) as usize) << 2;
        c[i] += 1;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub two_s: usize,
    pub samples: usize,
    pub seed: u64,
    /// Mean over samples of each sample's mean pair dot.
    pub mean_pair_dot: f64,
    pub pair_dot_standard_error: f64,
    /// `-1 / (2S - 1)`.
    pub reference_pair_dot: Option<f64>,
    pub pair_dot_z_score: Option<f64>,
    /// Mean of `|sum_k n_k|^2`; the pair-dot mean equals the reference
    /// only when this vanishes.
    pub mean_star_sum_norm2: f64,
    /// Star counts in equal-area colatitude bands (uniform in cos θ),
    /// from the north pole down.
    pub colatitude_counts: Vec<usize>,
    pub colatitude_chi2: f64,
    pub colatitude_dof: usize,
    pub colatitude_p_value: f64,
    /// Nearest-neighbour chordal distance histogram on `[0, 2]`.
    pub nearest_neighbor_counts: Vec<usize>,
    pub nearest_neighbor_mean: Option<f64>,
    pub octant_counts: [usize; 8],
}

struct SampleSummary {
    dirs: Vec<[f64; 3]>,
    mean_dot: Option<f64>,
    sum_norm2: f64,
}

/// Sample `samples` random states and summarize their constellations.
pub fn ensemble_stats(two_s: usize, samples: usize, seed: u64, bands: usize, exec: Exec) -> Result<EnsembleStats> {
    if two_s == 0 {
        return Err(Error::InvalidArgument("two_s must be at least 1".into()));
    }
    if samples == 0 || bands == 0 {
        return Err(Error::EmptyInput);
    }
    let per: Vec<Result<SampleSummary>> = exec.map(samples, |i| {
        let s = random_state_stream(two_s, seed, i as u64);
        let c = find_stars(&s.to_polynomial(), DEFAULT_TOLERANCE, Convention::default())?;
        let dirs = c.expanded_directions();
        let mut sum = [0.0; 3];
        for d in &dirs {
            for a in 0..3 {
                sum[a] += d[a];
            }
        }
        let n = dirs.len();
        let sum_norm2 = dot(sum, sum);
        let mean_dot = (n > 1).then(|| (sum_norm2 - n as f64) / (n * (n - 1)) as f64);
        Ok(SampleSummary { dirs, mean_dot, sum_norm2 })
    });
    let per: Vec<SampleSummary> = per.into_iter().collect::<Result<_>>()?;

    let dots: Vec<f64> = per.iter().filter_map(|p| p.mean_dot).collect();
    let (mean_pair_dot, se) = if dots.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let m = dots.iter().sum::<f64>() / dots.len() as f64;
        let var = if dots.len() > 1 {
            dots.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (dots.len() - 1) as f64
        } else {
            0.0
        };
        (m, (var / dots.len() as f64).sqrt())
    };
    let reference = (two_s > 1).then(|| -1.0 / (two_s as f64 - 1.0));
    let z = reference.map(|r| (mean_pair_dot - r) / se);

    let mut colat = vec![0usize; bands];
    let nn_bins = 20;
    let mut nn = vec![0usize; nn_bins];
    let mut nn_sum = 0.0;
    let mut nn_count = 0usize;
    let mut oct = [0usize; 8];
    for p in &per {
        for d in &p.dirs {
            let u = (1.0 - d[2].clamp(-1.0, 1.0)) / 2.0;
            let b = ((u * bands as f64) as usize).min(bands - 1);
            colat[b] += 1;
        }
        let o = octant_counts(&p.dirs);
        for i in 0..8 {
            oct[i] += o[i];
        }
        for (i, a) in p.dirs.iter().enumerate() {
            let near = p
                .dirs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| chordal(*a, *b))
                .fold(f64::INFINITY, f64::min);
            if near.is_finite() {
                let b = ((near / 2.0 * nn_bins as f64) as usize).min(nn_bins - 1);
                nn[b] += 1;
                nn_sum += near;
                nn_count += 1;
            }
        }
    }
    let (chi2, dof, p) = chi_square_uniform(&colat);
    Ok(EnsembleStats {
        two_s,
        samples,
        seed,
        mean_pair_dot,
        pair_dot_standard_error: se,
        reference_pair_dot: reference,
        pair_dot_z_score: z,
        mean_star_sum_norm2: per.iter().map(|p| p.sum_norm2).sum::<f64>() / samples as f64,
        colatitude_counts: colat,
        colatitude_chi2: chi2,
        colatitude_dof: dof,
        colatitude_p_value: p,
        nearest_neighbor_counts: nn,
        nearest_neighbor_mean: (nn_count > 0).then(|| nn_sum / nn_count as f64),
        octant_counts: oct,
    })
}

/// Semiclassical Hannay angle `-(1/2j) sum_k Ω_k`.
pub fn hannay_mean(solid_angles: &[f64]) -> Result<f64> {
    if solid_angles.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(-solid_angles.iter().sum::<f64>() / solid_angles.len() as f64)
}

/// Population variance of the pairwise chordal distances (`k < l`).
/// The normalization is implementation-defined.
pub fn spread_functional(c: &Constellation) -> Option<f64> {
    let d = pair_distances(c);
    if d.is_empty() {
        return None;
    }
    let m = d.iter().sum::<f64>() / d.len() as f64;
    Some(d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / d.len() as f64)
}

/// Shannon entropy (nats) of `p_kl = d_kl / sum d` over pairs `k < l`.
/// Zero-distance pairs contribute nothing; the normalization is
/// implementation-defined.
pub fn stellar_entropy(c: &Constellation) -> Option<f64> {
    let d = pair_distances(c);
    let total: f64 = d.iter().sum();
    if d.is_empty() || total == 0.0 {
        return None;
    }
    Some(
        -d.iter()
            .filter(|x| **x > 0.0)
            .map(|x| {
                let p = x / total;
                p * p.ln()
            })
            .sum::<f64>(),
    )
}

fn pair_distances(c: &Constellation) -> Vec<f64> {
    let dirs = c.expanded_directions();
    let mut out = Vec::new();
    for i in 0..dirs.len() {
        for j in (i + 1)..dirs.len() {
            out.push(chordal(dirs[i], dirs[j]));
        }
    }
    out
}

/// `½ sum_k n_k`, exposed only as a diagnostic; it is not `<S>` in general.
pub fn star_barycenter(c: &Constellation) -> [f64; 3] {
    let mut s = [0.0; 3];
    for d in c.expanded_directions() {
        for a in 0..3 {
            s[a] += 0.5 * d[a];
        }
    }
    s
}

/// Icosphere vertices after `subdivisions` rounds of edge splitting.
pub fn icosphere(subdivisions: usize) -> Vec<[f64; 3]> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .into_iter()
    .map(|v| crate::stellar::normalize(v).unwrap())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(crate::stellar::normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]).unwrap());
                verts.len() - 1
            })
        };
        for f in &faces {
            let a = midpoint(f[0], f[1], &mut verts);
            let b = midpoint(f[1], f[2], &mut verts);
            let c = midpoint(f[2], f[0], &mut verts);
            next.extend_from_slice(&[[f[0], a, c], [f[1], b, a], [f[2], c, b], [a, b, c]]);
        }
        faces = next;
    }
    verts
}

/// Latitude–longitude product grid: cell-centred colatitudes and
/// `n_phi` equally spaced azimuths.
pub fn latlong_grid(n_theta: usize, n_phi: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let th = PI * (i as f64 + 0.5) / n_theta as f64;
        for j in 0..n_phi {
            let ph = 2.0 * PI * j as f64 / n_phi as f64;
            out.push([th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
        }
    }
    out
}

/// `theta,phi,value` rows with a header line.
pub fn field_csv(samples: &[FieldSample]) -> String {
    let mut s = String::from("theta,phi,value\n");
    for f in samples {
        s.push_str(&format!("{},{},{}\n", f.theta, f.phi, f.value));
    }
    s
}
