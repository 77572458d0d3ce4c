//! Majorana constellations: roots of the Majorana polynomial placed on the
//! sphere by inverse stereographic projection.
//!
//! Roots are always the roots of `P(z)`. The projection convention only
//! decides where a root is drawn. Under [`Convention::NorthAtZero`] (the
//! default) `z = tan(θ/2) e^{iφ}` maps to the direction `(θ, φ)`, so the
//! star of a spin coherent state coincides with the spin direction.
//! [`Convention::SouthAtZero`] uses
//! `n = (2Re z, 2Im z, |z|² - 1) / (|z|² + 1)` and draws every star
//! reflected through the equatorial plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{companion_eigenvalues, C64};
use crate::spinstate::{binomial, MajoranaPolynomial, SpinState};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Default chordal clustering radius.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

/// Relative threshold below which a polynomial coefficient counts as zero.
pub const COEFF_THRESHOLD: f64 = 1e-12;

const POLISH_ITERS: usize = 50;
const POLISH_TOL: f64 = 1e-13;
const CLUSTER_NOISE: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    #[serde(alias = "north")]
    NorthAtZero,
    #[serde(alias = "south")]
    SouthAtZero,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::NorthAtZero => "north-at-zero",
            Convention::SouthAtZero => "south-at-zero",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "north-at-zero" | "north" => Some(Convention::NorthAtZero),
            "south-at-zero" | "south" => Some(Convention::SouthAtZero),
            _ => None,
        }
    }

    fn orient(self, n: [f64; 3]) -> [f64; 3] {
        match self {
            Convention::NorthAtZero => n,
            Convention::SouthAtZero => [n[0], n[1], -n[2]],
        }
    }
}

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(C64),
    Infinity,
}

impl ExtComplex {
    pub fn finite(self) -> Option<C64> {
        match self {
            ExtComplex::Finite(z) => Some(z),
            ExtComplex::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }
}

impl From<C64> for ExtComplex {
    fn from(z: C64) -> Self {
        ExtComplex::Finite(z)
    }
}

/// Inverse stereographic projection of `z` under `conv`.
pub fn project(z: ExtComplex, conv: Convention) -> [f64; 3] {
    conv.orient(project_north(z))
}

fn project_north(z: ExtComplex) -> [f64; 3] {
    match z {
        ExtComplex::Infinity => [0.0, 0.0, -1.0],
        ExtComplex::Finite(z) => {
            let r2 = z.norm_sqr();
            if r2 <= 1.0 {
                let d = 1.0 + r2;
                [2.0 * z.re / d, 2.0 * z.im / d, (1.0 - r2) / d]
            } else {
                let w = z.inv();
                let s2 = w.norm_sqr();
                let d = 1.0 + s2;
                // 2z/(1+|z|^2) = 2 conj(w)/(1+|w|^2)
                [2.0 * w.re / d, -2.0 * w.im / d, (s2 - 1.0) / d]
            }
        }
    }
}

/// Stereographic coordinate of a unit vector under `conv`.
pub fn unproject(n: [f64; 3], conv: Convention) -> ExtComplex {
    let [x, y, z] = conv.orient(n);
    if z >= 0.0 {
        ExtComplex::Finite(C64::new(x, y) / (1.0 + z))
    } else {
        let w = C64::new(x, -y);
        if w.norm() == 0.0 {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(C64::new(1.0 - z, 0.0) / w)
        }
    }
}

/// `-1 / conj(z)`, exchanging 0 and infinity.
pub fn antipode(z: ExtComplex) -> ExtComplex {
    match z {
        ExtComplex::Infinity => ExtComplex::Finite(ZERO),
        ExtComplex::Finite(z) if z == ZERO => ExtComplex::Infinity,
        ExtComplex::Finite(z) => ExtComplex::Finite(-z.conj().inv()),
    }
}

/// Möbius map `(a z + b) / (c z + d)` on the extended plane.
pub fn mobius(z: ExtComplex, m: [[C64; 2]; 2]) -> ExtComplex {
    let [[a, b], [c, d]] = m;
    match z {
        ExtComplex::Infinity => {
            if c == ZERO {
                ExtComplex::Infinity
            } else {
                ExtComplex::Finite(a / c)
            }
        }
        ExtComplex::Finite(z) => {
            let den = c * z + d;
            if den == ZERO {
                ExtComplex::Infinity
            } else {
                ExtComplex::Finite((a * z + b) / den)
            }
        }
    }
}

/// Unit spinor `(up, down)` of the coherent state whose Majorana root is `z`,
/// i.e. `(1, z) / sqrt(1 + |z|^2)`, with `(0, 1)` at infinity.
pub fn spinor_of_root(z: ExtComplex) -> (C64, C64) {
    match z {
        ExtComplex::Infinity => (ZERO, ONE),
        ExtComplex::Finite(z) => {
            if z.norm() <= 1.0 {
                let d = (1.0 + z.norm_sqr()).sqrt();
                (ONE / d, z / d)
            } else {
                let w = z.inv();
                let d = (1.0 + w.norm_sqr()).sqrt();
                // (w, 1) up to the phase of z; keep up real nonnegative
                let ph = C64::from_polar(1.0, z.arg());
                (C64::new(w.norm() / d, 0.0), ph / d)
            }
        }
    }
}

/// Spinor `(cos θ/2, sin θ/2 e^{iφ})` of the direction `n`, gauge fixed with
/// the up component real and nonnegative (and `(0, 1)` at the south pole).
pub fn spinor_of_direction(n: [f64; 3]) -> Result<(C64, C64)> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit(norm));
    }
    let z = (n[2] / norm).clamp(-1.0, 1.0);
    let up = ((1.0 + z) / 2.0).sqrt();
    let down = ((1.0 - z) / 2.0).sqrt();
    let phi = if n[0] == 0.0 && n[1] == 0.0 { 0.0 } else { n[1].atan2(n[0]) };
    if up == 0.0 {
        return Ok((ZERO, ONE));
    }
    Ok((C64::new(up, 0.0), C64::from_polar(down, phi)))
}

pub fn chordal(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = dot(v, v).sqrt();
    if n == 0.0 || !n.is_finite() {
        None
    } else {
        Some([v[0] / n, v[1] / n, v[2] / n])
    }
}

/// One distinct Majorana star.
#[derive(Debug, Clone, PartialEq)]
pub struct Star {
    pub z: ExtComplex,
    pub n: [f64; 3],
    pub theta: f64,
    pub phi: f64,
    pub multiplicity: usize,
}

impl Star {
    pub fn from_root(z: ExtComplex, multiplicity: usize, conv: Convention) -> Self {
        Self::build(z, project(z, conv), multiplicity)
    }

    pub fn from_direction(n: [f64; 3], multiplicity: usize, conv: Convention) -> Result<Self> {
        let norm = dot(n, n).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnit(norm));
        }
        let n = [n[0] / norm, n[1] / norm, n[2] / norm];
        Ok(Self::build(unproject(n, conv), n, multiplicity))
    }

    fn build(z: ExtComplex, n: [f64; 3], multiplicity: usize) -> Self {
        let theta = n[2].clamp(-1.0, 1.0).acos();
        let phi = if n[0] == 0.0 && n[1] == 0.0 { 0.0 } else { n[1].atan2(n[0]) };
        Star {
            z,
            n,
            theta,
            phi,
            multiplicity,
        }
    }
}

/// The clustered star configuration of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub two_s: usize,
    pub stars: Vec<Star>,
    pub tolerance: f64,
    pub convention: Convention,
    /// Roots whose refinement did not reach the residual target.
    pub unconverged: usize,
}

impl Constellation {
    pub fn new(stars: Vec<Star>, tolerance: f64, convention: Convention) -> Result<Self> {
        if stars.is_empty() {
            return Err(Error::EmptyConstellation);
        }
        if stars.iter().any(|s| s.multiplicity == 0) {
            return Err(Error::InvalidArgument("star multiplicity must be positive".into()));
        }
        let two_s = stars.iter().map(|s| s.multiplicity).sum();
        Ok(Self {
            two_s,
            stars,
            tolerance,
            convention,
            unconverged: 0,
        })
    }

    /// Constellation with one star per direction (multiplicity 1 each),
    /// clustered at `tolerance`.
    pub fn from_directions(dirs: &[[f64; 3]], tolerance: f64, conv: Convention) -> Result<Self> {
        if dirs.is_empty() {
            return Err(Error::EmptyConstellation);
        }
        let mut north = Vec::with_capacity(dirs.len());
        for d in dirs {
            let s = Star::from_direction(*d, 1, conv)?;
            north.push(Convention::NorthAtZero.orient(conv.orient(s.n)));
        }
        let roots: Vec<ExtComplex> = north.iter().map(|n| unproject(*n, Convention::NorthAtZero)).collect();
        let groups = single_linkage(&north, tolerance);
        let stars = groups
            .into_iter()
            .map(|g| representative(&g, &roots, &north, conv))
            .collect();
        Self::new(stars, tolerance, conv)
    }

    /// Star directions repeated by multiplicity.
    pub fn expanded_directions(&self) -> Vec<[f64; 3]> {
        self.stars
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.n, s.multiplicity))
            .collect()
    }

    /// Roots repeated by multiplicity.
    pub fn expanded_roots(&self) -> Vec<ExtComplex> {
        self.stars
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.z, s.multiplicity))
            .collect()
    }

    /// Multiplicities sorted in descending order.
    pub fn partition(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.stars.iter().map(|s| s.multiplicity).collect();
        p.sort_unstable_by(|a, b| b.cmp(a));
        p
    }

    /// The same stars drawn under another convention.
    pub fn with_convention(&self, conv: Convention) -> Constellation {
        let stars = self
            .stars
            .iter()
            .map(|s| Star::from_root(s.z, s.multiplicity, conv))
            .collect();
        Constellation {
            stars,
            convention: conv,
            ..self.clone()
        }
    }

    pub fn to_record(&self) -> ConstellationRecord {
        ConstellationRecord {
            two_s: self.two_s,
            tolerance: self.tolerance,
            stars: self
                .stars
                .iter()
                .map(|s| StarRecord {
                    z: Some(match s.z {
                        ExtComplex::Infinity => ZValue::Inf(InfTag::Inf),
                        ExtComplex::Finite(z) => ZValue::Finite([z.re, z.im]),
                    }),
                    n: Some(s.n),
                    multiplicity: s.multiplicity,
                })
                .collect(),
        }
    }

    /// Read a record; each star needs `z` or `n`, and when both are given
    /// they must agree under `conv`.
    pub fn from_record(rec: &ConstellationRecord, conv: Convention) -> Result<Constellation> {
        let mut stars = Vec::with_capacity(rec.stars.len());
        for (i, s) in rec.stars.iter().enumerate() {
            let star = match (&s.z, &s.n) {
                (Some(z), n) => {
                    let z = match z {
                        ZValue::Inf(_) => ExtComplex::Infinity,
                        ZValue::Finite(p) => ExtComplex::Finite(C64::new(p[0], p[1])),
                    };
                    let star = Star::from_root(z, s.multiplicity, conv);
                    if let Some(n) = n {
                        if chordal(*n, star.n) > 1e-8 {
                            return Err(Error::Malformed(format!(
                                "star {i}: z and n disagree under the {} convention",
                                conv.name()
                            )));
                        }
                    }
                    star
                }
                (None, Some(n)) => Star::from_direction(*n, s.multiplicity, conv)?,
                (None, None) => return Err(Error::Malformed(format!("star {i} has neither z nor n"))),
            };
            stars.push(star);
        }
        let c = Constellation::new(stars, rec.tolerance, conv)?;
        if c.two_s != rec.two_s {
            return Err(Error::DimensionMismatch {
                expected: rec.two_s,
                got: c.two_s,
            });
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfTag {
    Inf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZValue {
    Finite([f64; 2]),
    Inf(InfTag),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<ZValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<[f64; 3]>,
    pub multiplicity: usize,
}

/// On-disk constellation:
/// `{"two_s", "tolerance", "stars": [{"z": [re, im] | "inf", "n": [x, y, z], "multiplicity"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationRecord {
    pub two_s: usize,
    pub tolerance: f64,
    pub stars: Vec<StarRecord>,
}

/// Raw polynomial roots, counted with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<ExtComplex>,
    pub unconverged: usize,
}

/// All `2S` roots of `P`: exact zeros and infinities from vanishing end
/// coefficients, the rest from the companion matrix and Newton refinement.
pub fn polynomial_roots(poly: &MajoranaPolynomial) -> Result<RootSet> {
    let a = &poly.coefficients;
    let max = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let thr = COEFF_THRESHOLD * max;
    let hi = a.iter().rposition(|c| c.norm() > thr).unwrap();
    let lo = a.iter().position(|c| c.norm() > thr).unwrap();
    let n_inf = poly.two_s - hi;

    let b: Vec<C64> = a[lo..=hi].to_vec();
    let d = hi - lo;
    let lead = b[d];
    let tail: Vec<C64> = b[..d].iter().map(|c| c / lead).collect();
    let mut finite = companion_eigenvalues(&tail);
    let unconverged = polish(&b, &mut finite);

    let mut roots = Vec::with_capacity(poly.two_s);
    roots.extend(std::iter::repeat_n(ExtComplex::Finite(ZERO), lo));
    roots.extend(finite.into_iter().map(ExtComplex::Finite));
    roots.extend(std::iter::repeat_n(ExtComplex::Infinity, n_inf));
    Ok(RootSet { roots, unconverged })
}

/// Value and derivative of `b` at `z`, evaluated in whichever chart keeps
/// `|z| <= 1`; returns `(residual / scale, newton step in z)`.
fn newton_data(b: &[C64], z: C64) -> (f64, C64) {
    let d = b.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = ZERO;
        let mut dp = ZERO;
        let mut scale = 0.0;
        let r = z.norm();
        for c in b.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
            scale = scale * r + c.norm();
        }
        let step = if dp == ZERO { ZERO } else { p / dp };
        (p.norm() / scale, step)
    } else {
        let w = z.inv();
        let r = w.norm();
        let mut p = ZERO;
        let mut dp = ZERO;
        let mut scale = 0.0;
        // reversed polynomial sum_k b_k w^{d-k}
        for k in 0..=d {
            let c = b[k];
            dp = dp * w + p;
            p = p * w + c;
            scale = scale * r + c.norm();
        }
        if dp == ZERO {
            return (p.norm() / scale, ZERO);
        }
        let w_new = w - p / dp;
        let step = if w_new == ZERO { ZERO } else { z - w_new.inv() };
        (p.norm() / scale, step)
    }
}

fn chordal_z(a: C64, b: C64) -> f64 {
    chordal(
        project_north(ExtComplex::Finite(a)),
        project_north(ExtComplex::Finite(b)),
    )
}

/// Safeguarded Newton refinement; returns the number of roots that did not
/// reach the residual target.
fn polish(b: &[C64], roots: &mut [C64]) -> usize {
    if b.len() < 2 {
        return 0;
    }
    let mut unconverged = 0;
    for i in 0..roots.len() {
        let mut z = roots[i];
        let (mut res, mut step) = newton_data(b, z);
        let mut iters = 0;
        while res > POLISH_TOL && iters < POLISH_ITERS {
            iters += 1;
            let cand = z - step;
            if !cand.re.is_finite() || !cand.im.is_finite() {
                break;
            }
            let nearest = roots
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, r)| chordal_z(z, *r))
                .fold(f64::INFINITY, f64::min);
            if chordal_z(z, cand) >= 0.5 * nearest {
                break;
            }
            let (cres, cstep) = newton_data(b, cand);
            if cres >= res {
                break;
            }
            z = cand;
            res = cres;
            step = cstep;
        }
        if res > 1e3 * POLISH_TOL && !is_cluster_member(b, z) {
            unconverged += 1;
        }
        roots[i] = z;
    }
    unconverged
}

/// A root sitting on a numerically multiple zero has a residual at the
/// rounding floor of its cluster; do not count it as a failure.
fn is_cluster_member(b: &[C64], z: C64) -> bool {
    let (res, _) = newton_data(b, z);
    res < 1e-6
}

fn single_linkage(points: &[[f64; 3]], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if chordal(points[i], points[j]) <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if index[r] == usize::MAX {
            index[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index[r]].push(i);
    }
    groups
}

/// Radius (chordal) within which an `m`-fold root at `c` cannot be resolved
/// from rounding noise of size `eps max|a_k|` in every coefficient.
fn noise_radius(a: &[C64], c: [f64; 3], m: usize) -> f64 {
    let z = unproject(c, Convention::NorthAtZero);
    let (coeffs, x): (Vec<C64>, C64) = match z {
        ExtComplex::Finite(z) if z.norm() <= 1.0 => (a.to_vec(), z),
        ExtComplex::Finite(z) => (a.iter().rev().copied().collect(), z.inv()),
        ExtComplex::Infinity => (a.iter().rev().copied().collect(), ZERO),
    };
    let deg = coeffs.len() - 1;
    if m > deg {
        return 0.0;
    }
    let r = x.norm();
    let amax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let scale: f64 = (0..=deg).fold(0.0, |acc, _| acc * r + amax);
    let mut bm = ZERO;
    let mut xp = ONE;
    for (k, ck) in coeffs.iter().enumerate().skip(m) {
        if k > m {
            xp *= x;
        }
        bm += ck * xp * binomial(k, m);
    }
    if bm.norm() == 0.0 {
        return 0.0;
    }
    let local = (CLUSTER_NOISE * f64::EPSILON * scale / bm.norm()).powf(1.0 / m as f64);
    if local >= 1.0 {
        // b_m is itself at noise level: no multiple root to resolve here
        return 0.0;
    }
    2.0 * local / (1.0 + r * r)
}

fn diameter(points: &[[f64; 3]], members: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            d = d.max(chordal(points[a], points[b]));
        }
    }
    d
}

fn centroid(points: &[[f64; 3]], members: &[usize]) -> [f64; 3] {
    let mut s = [0.0; 3];
    for &i in members {
        for a in 0..3 {
            s[a] += points[i][a];
        }
    }
    normalize(s).unwrap_or(points[members[0]])
}

fn min_link(points: &[[f64; 3]], a: &[usize], b: &[usize]) -> f64 {
    let mut d = f64::INFINITY;
    for &i in a {
        for &j in b {
            d = d.min(chordal(points[i], points[j]));
        }
    }
    d
}

/// Merge clusters that together look like one numerically split multiple
/// root of `a`.
fn merge_multiple_roots(a: &[C64], points: &[[f64; 3]], mut groups: Vec<Vec<usize>>, tol: f64) -> Vec<Vec<usize>> {
    loop {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                pairs.push((min_link(points, &groups[i], &groups[j]), i, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut merged = None;
        for (_, i, j) in pairs {
            let pair = vec![i, j];
            let mut all = groups[i].clone();
            all.extend_from_slice(&groups[j]);
            // a split multiple root is spread around its centre, so take in
            // every cluster that lies within the pair's reach
            let mut grown = pair.clone();
            let mut reach = all.clone();
            loop {
                let c = centroid(points, &reach);
                let r = diameter(points, &reach);
                let extra: Vec<usize> = (0..groups.len())
                    .filter(|g| !grown.contains(g))
                    .filter(|&g| groups[g].iter().all(|&p| chordal(points[p], c) <= r))
                    .collect();
                if extra.is_empty() {
                    break;
                }
                for g in extra {
                    reach.extend_from_slice(&groups[g]);
                    grown.push(g);
                }
            }
            for (cand, members) in [(grown, reach), (pair.clone(), all)] {
                let diam = diameter(points, &members);
                let radius = noise_radius(a, centroid(points, &members), members.len());
                if diam <= tol.max(2.0 * radius) {
                    merged = Some(cand);
                    break;
                }
            }
            if merged.is_some() {
                break;
            }
        }
        match merged {
            None => return groups,
            Some(mut idx) => {
                idx.sort_unstable();
                let mut members = Vec::new();
                for &g in idx.iter().rev() {
                    members.extend(groups.remove(g));
                }
                members.sort_unstable();
                groups.push(members);
            }
        }
    }
}

fn representative(members: &[usize], roots: &[ExtComplex], north: &[[f64; 3]], conv: Convention) -> Star {
    let m = members.len();
    if members.iter().all(|&i| roots[i].is_infinite()) {
        return Star::from_root(ExtComplex::Infinity, m, conv);
    }
    if m == 1 {
        return Star::from_root(roots[members[0]], 1, conv);
    }
    // average the roots in the chart that contains the cluster; for a split
    // multiple root the perturbations cancel in the mean to first order
    let c = centroid(north, members);
    let z = if c[2] >= 0.0 {
        let mean: C64 = members.iter().map(|&i| roots[i].finite().unwrap_or(ZERO)).sum::<C64>() / m as f64;
        ExtComplex::Finite(mean)
    } else {
        let mean: C64 = members
            .iter()
            .map(|&i| roots[i].finite().map(|z| if z == ZERO { ZERO } else { z.inv() }).unwrap_or(ZERO))
            .sum::<C64>()
            / m as f64;
        if mean == ZERO {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(mean.inv())
        }
    };
    Star::from_root(z, m, conv)
}

/// Extract and cluster the stars of `poly`.
pub fn find_stars(poly: &MajoranaPolynomial, tolerance: f64, conv: Convention) -> Result<Constellation> {
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
    }
    let set = polynomial_roots(poly)?;
    let north: Vec<[f64; 3]> = set.roots.iter().map(|z| project_north(*z)).collect();
    let groups = single_linkage(&north, tolerance);
    let groups = merge_multiple_roots(&poly.coefficients, &north, groups, tolerance);
    let stars = groups
        .iter()
        .map(|g| representative(g, &set.roots, &north, conv))
        .collect();
    let mut c = Constellation::new(stars, tolerance, conv)?;
    c.unconverged = set.unconverged;
    Ok(c)
}

/// Stars of a state with the default convention and tolerance.
pub fn stars_of(state: &SpinState) -> Constellation {
    find_stars(&state.to_polynomial(), DEFAULT_TOLERANCE, Convention::default())
        .expect("a normalized state has a nonzero polynomial")
}

/// Coefficients of `prod_i (down_i - up_i z)` for the root spinors.
pub fn polynomial_from_roots(roots: &[ExtComplex]) -> Vec<C64> {
    let mut c = vec![ONE];
    for z in roots {
        let (up, down) = spinor_of_root(*z);
        let mut next = vec![ZERO; c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k] += ck * down;
            next[k + 1] -= ck * up;
        }
        c = next;
    }
    c
}

/// The normalized state whose constellation is `stars`.
pub fn stars_to_state(stars: &Constellation) -> Result<SpinState> {
    if stars.stars.is_empty() || stars.two_s == 0 {
        return Err(Error::EmptyConstellation);
    }
    let coeffs = polynomial_from_roots(&stars.expanded_roots());
    SpinState::from_polynomial(&MajoranaPolynomial::new(stars.two_s, coeffs)?)
}

/// Power sums `p_k = sum_i z_i^k`, `k = 1..=up_to`, of the finite roots,
/// from the coefficients alone through Newton's identities.
pub fn power_sums(poly: &MajoranaPolynomial, up_to: usize) -> Result<Vec<C64>> {
    let a = &poly.coefficients;
    let max = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let hi = a.iter().rposition(|c| c.norm() > COEFF_THRESHOLD * max).unwrap();
    // e_j = (-1)^j a_{hi-j} / a_hi
    let e: Vec<C64> = (0..=hi)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            a[hi - j] / a[hi] * s
        })
        .collect();
    let mut p = vec![ZERO; up_to + 1];
    for k in 1..=up_to {
        let mut acc = ZERO;
        for i in 1..k {
            if i <= hi {
                let s = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
                acc += e[i] * p[k - i] * s;
            }
        }
        if k <= hi {
            let s = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
            acc += e[k] * (k as f64) * s;
        }
        p[k] = acc;
    }
    p.remove(0);
    Ok(p)
}
