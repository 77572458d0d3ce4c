//! Permanents and permanent-based overlaps of symmetric states, plus the
//! antipodal basis of the orthogonal complement.

use nalgebra::DMatrix;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{singular_values, C64};
use crate::spinstate::{sqrt_binomials, SpinState};
use crate::stellar::{spinor_of_direction, stars_of, Constellation, ExtComplex};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Largest matrix accepted by [`permanent_ryser`].
pub const RYSER_LIMIT: usize = 20;
const RYSER_CHUNK_BITS: usize = 6;

/// Spinor `(α, β)` of a star direction, `α` real and nonnegative.
pub fn spinor_of_star(n: [f64; 3]) -> Result<(C64, C64)> {
    spinor_of_direction(n)
}

/// `G_ij = <n_i|n_j>` for a list of spinors.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<C64>,
    pub spinors: Vec<(C64, C64)>,
}

impl GramMatrix {
    pub fn from_directions(dirs: &[[f64; 3]]) -> Result<Self> {
        let spinors = dirs.iter().map(|n| spinor_of_star(*n)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_spinors(spinors))
    }

    pub fn from_spinors(spinors: Vec<(C64, C64)>) -> Self {
        let entries = cross_matrix(&spinors, &spinors);
        GramMatrix { entries, spinors }
    }

    /// Third-largest singular value, zero for `N < 3`.
    pub fn rank_residual(&self) -> f64 {
        singular_values(&self.entries).get(2).copied().unwrap_or(0.0)
    }

    pub fn permanent(&self) -> C64 {
        let (a, b, c, d) = rank2_factors(&self.spinors, &self.spinors);
        permanent_rank2(&a, &b, &c, &d).expect("factor lengths agree")
    }
}

/// `M_ij = <m_i|n_j>`.
fn cross_matrix(left: &[(C64, C64)], right: &[(C64, C64)]) -> DMatrix<C64> {
    DMatrix::from_fn(left.len(), right.len(), |i, j| {
        left[i].0.conj() * right[j].0 + left[i].1.conj() * right[j].1
    })
}

type Factors = (Vec<C64>, Vec<C64>, Vec<C64>, Vec<C64>);

fn rank2_factors(left: &[(C64, C64)], right: &[(C64, C64)]) -> Factors {
    (
        left.iter().map(|s| s.0.conj()).collect(),
        right.iter().map(|s| s.0).collect(),
        left.iter().map(|s| s.1.conj()).collect(),
        right.iter().map(|s| s.1).collect(),
    )
}

/// Exact permanent by Ryser's inclusion–exclusion formula with a Gray-code
/// subset sweep. The sweep is split into fixed chunks whose partial sums are
/// added in chunk order, so the result does not depend on `exec`.
pub fn permanent_ryser(m: &DMatrix<C64>, exec: Exec) -> Result<C64> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
    }
    if n > RYSER_LIMIT {
        return Err(Error::SizeGuard { n, limit: RYSER_LIMIT });
    }
    if n == 0 {
        return Ok(ONE);
    }
    let total: u64 = 1 << n;
    let chunk_bits = RYSER_CHUNK_BITS.min(n);
    let chunks = 1usize << chunk_bits;
    let per_chunk = total >> chunk_bits;
    let partial = exec.map(chunks, |c| {
        let start = c as u64 * per_chunk;
        let end = start + per_chunk;
        ryser_range(m, start, end)
    });
    let sum: C64 = partial.into_iter().fold(ZERO, |acc, x| acc + x);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sum * sign)
}

fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// `sum (-1)^{|S|} prod_i sum_{j in S} m_ij` over the subsets `gray(k)`,
/// `start <= k < end`.
fn ryser_range(m: &DMatrix<C64>, start: u64, end: u64) -> C64 {
    let n = m.nrows();
    let mut set = gray(start);
    let mut rows = vec![ZERO; n];
    for j in 0..n {
        if set >> j & 1 == 1 {
            for (i, r) in rows.iter_mut().enumerate() {
                *r += m[(i, j)];
            }
        }
    }
    let term = |set: u64, rows: &[C64]| {
        let p: C64 = rows.iter().product();
        if set.count_ones() % 2 == 0 { p } else { -p }
    };
    let mut acc = if set == 0 { ZERO } else { term(set, &rows) };
    for k in (start + 1)..end {
        let next = gray(k);
        let j = (next ^ set).trailing_zeros() as usize;
        let add = next >> j & 1 == 1;
        for (i, r) in rows.iter_mut().enumerate() {
            if add {
                *r += m[(i, j)];
            } else {
                *r -= m[(i, j)];
            }
        }
        set = next;
        acc += term(set, &rows);
    }
    acc
}

/// Coefficients of `prod_i (c_i + y a_i)` in `y`.
fn elementary(a: &[C64], c: &[C64]) -> Vec<C64> {
    let mut e = vec![ONE];
    for (ai, ci) in a.iter().zip(c) {
        let mut next = vec![ZERO; e.len() + 1];
        for (t, et) in e.iter().enumerate() {
            next[t] += et * ci;
            next[t + 1] += et * ai;
        }
        e = next;
    }
    e
}

/// Permanent of `A_ij = a_i b_j + c_i d_j` as
/// `sum_t t! (N-t)! [y^t] prod_i (c_i + y a_i) [x^t] prod_j (d_j + x b_j)`.
pub fn permanent_rank2(a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> Result<C64> {
    let n = a.len();
    for v in [b, c, d] {
        if v.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: v.len() });
        }
    }
    let ea = elementary(a, c);
    let eb = elementary(b, d);
    if n <= 18 {
        let fact: Vec<f64> = (0..=n).scan(1.0, |f, k| {
            if k > 0 {
                *f *= k as f64;
            }
            Some(*f)
        }).collect();
        return Ok((0..=n).map(|t| ea[t] * eb[t] * (fact[t] * fact[n - t])).sum());
    }
    let logs: Vec<f64> = (0..=n).map(|t| ln_factorial(t as u64) + ln_factorial((n - t) as u64)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: C64 = (0..=n).map(|t| ea[t] * eb[t] * (logs[t] - top).exp()).sum();
    Ok(s * top.exp())
}

/// `<Φ|Ψ> = Perm(M) / sqrt(Perm(G_φ) Perm(G_ψ))` from the two star lists.
pub fn symmetric_overlap(phi: &Constellation, psi: &Constellation) -> Result<C64> {
    if phi.two_s != psi.two_s {
        return Err(Error::DimensionMismatch { expected: phi.two_s, got: psi.two_s });
    }
    let sa = spinors_of(phi)?;
    let sb = spinors_of(psi)?;
    let (a, b, c, d) = rank2_factors(&sa, &sb);
    let cross = permanent_rank2(&a, &b, &c, &d)?;
    let ga = GramMatrix::from_spinors(sa).permanent().re;
    let gb = GramMatrix::from_spinors(sb).permanent().re;
    Ok(cross / (ga * gb).sqrt())
}

fn spinors_of(c: &Constellation) -> Result<Vec<(C64, C64)>> {
    c.expanded_directions().iter().map(|n| spinor_of_star(*n)).collect()
}

/// Squared norm `N! Perm(G)` of the unnormalized symmetrized product of the
/// star spinors.
pub fn normalization(c: &Constellation) -> Result<f64> {
    let g = GramMatrix::from_spinors(spinors_of(c)?);
    let n = c.two_s as u64;
    Ok(g.permanent().re * ln_factorial(n).exp())
}

/// Basis of the orthogonal complement of a state built from coherent states
/// at the antipodes of its stars and their derivatives.
#[derive(Debug, Clone)]
pub struct AntipodalBasis {
    /// Normalized basis states in star order, `m_k` per distinct star.
    pub states: Vec<SpinState>,
    /// Index of the star each state belongs to.
    pub cluster: Vec<usize>,
    /// The same span after modified Gram–Schmidt.
    pub orthonormal: Vec<Vec<C64>>,
    /// Gram determinant of `states`.
    pub gram_determinant: f64,
    /// `max_i |<basis_i|ψ>|`.
    pub max_overlap: f64,
}

const RANK_TOLERANCE: f64 = 1e-8;

/// For each distinct star `z_k` of multiplicity `m_k`, the vectors `v` with
/// `<v|ψ> = P^{(r)}(z_k)`, `r < m_k`, which vanish because `z_k` is an
/// `m_k`-fold root. For `r = 0` this is the coherent state at the antipode
/// of `z_k`.
pub fn antipodal_basis(state: &SpinState) -> Result<AntipodalBasis> {
    antipodal_basis_for(state, &stars_of(state))
}

pub fn antipodal_basis_for(state: &SpinState, c: &Constellation) -> Result<AntipodalBasis> {
    if c.two_s != state.two_s() {
        return Err(Error::DimensionMismatch { expected: state.two_s(), got: c.two_s });
    }
    let n = state.two_s();
    let sb = sqrt_binomials(n);
    let mut states = Vec::with_capacity(n);
    let mut cluster = Vec::with_capacity(n);
    for (k, star) in c.stars.iter().enumerate() {
        for r in 0..star.multiplicity {
            let amps = derivative_vector(n, &sb, star.z, r);
            states.push(SpinState::new(n, amps)?);
            cluster.push(k);
        }
    }
    let mut orthonormal: Vec<Vec<C64>> = Vec::with_capacity(states.len());
    let mut det = 1.0;
    for (i, s) in states.iter().enumerate() {
        let mut v = s.amplitudes().to_vec();
        for q in &orthonormal {
            let p: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= p * qi;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        det *= norm * norm;
        if norm < RANK_TOLERANCE {
            return Err(Error::RankDeficient { cluster: cluster[i], det });
        }
        orthonormal.push(v.into_iter().map(|x| x / norm).collect());
    }
    let max_overlap = states
        .iter()
        .map(|s| s.inner(state).map(|x| x.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(AntipodalBasis { states, cluster, orthonormal, gram_determinant: det, max_overlap })
}

/// Amplitudes `conj(d^r f_k / dζ^r)` at the root, where
/// `f_k(ζ) = (-1)^k sqrt(C(N,k)) ζ^k` so that `sum_k f_k c_k = P(ζ)`.
/// Outside the unit disk the chart `w = 1/ζ` is used, with
/// `f_k(w) = (-1)^k sqrt(C(N,k)) w^{N-k}`.
fn derivative_vector(n: usize, sb: &[f64], z: ExtComplex, r: usize) -> Vec<C64> {
    let (x, reversed) = match z {
        ExtComplex::Finite(z) if z.norm() <= 1.0 => (z, false),
        ExtComplex::Finite(z) => (z.inv(), true),
        ExtComplex::Infinity => (ZERO, true),
    };
    (0..=n)
        .map(|k| {
            let p = if reversed { n - k } else { k };
            if p < r {
                return ZERO;
            }
            let falling: f64 = ((p - r + 1)..=p).map(|i| i as f64).product();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            (x.powu((p - r) as u32) * (sign * sb[k] * falling)).conj()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_state;
    use crate::stellar::{stars_to_state, Convention, DEFAULT_TOLERANCE};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_dirs(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
        (0..n)
            .map(|_| {
                let z: f64 = rng.random_range(-1.0..1.0);
                let ph: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let s = (1.0 - z * z).sqrt();
                [s * ph.cos(), s * ph.sin(), z]
            })
            .collect()
    }

    /// Heap's algorithm over all permutations of `0..n`.
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        let mut p: Vec<usize> = (0..n).collect();
        let mut out = vec![p.clone()];
        let mut c = vec![0; n];
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 { p.swap(0, i) } else { p.swap(c[i], i) }
                out.push(p.clone());
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        out
    }

    fn naive_permanent(m: &DMatrix<C64>) -> C64 {
        let n = m.nrows();
        permutations(n).iter().map(|s| (0..n).map(|i| m[(i, s[i])]).product::<C64>()).sum()
    }

    /// Squared norm of `sum_σ ⊗_i |n_σ(i)>` built explicitly in `2^N`.
    fn tensor_norm(spinors: &[(C64, C64)]) -> f64 {
        let n = spinors.len();
        let mut total = vec![ZERO; 1 << n];
        for s in permutations(n) {
            for (idx, slot) in total.iter_mut().enumerate() {
                let mut amp = ONE;
                for (pos, &star) in s.iter().enumerate() {
                    let (up, down) = spinors[star];
                    amp *= if idx >> pos & 1 == 1 { up } else { down };
                }
                *slot += amp;
            }
        }
        total.iter().map(|x| x.norm_sqr()).sum()
    }

    fn constellation(dirs: &[[f64; 3]]) -> Constellation {
        Constellation::from_directions(dirs, DEFAULT_TOLERANCE, Convention::NorthAtZero).unwrap()
    }

    #[test]
    fn spinor_examples() {
        assert_eq!(spinor_of_star([0.0, 0.0, 1.0]).unwrap(), (ONE, ZERO));
        assert_eq!(spinor_of_star([0.0, 0.0, -1.0]).unwrap(), (ZERO, ONE));
        let a = spinor_of_star([1.0, 0.0, 0.0]).unwrap();
        let b = spinor_of_star([0.0, 1.0, 0.0]).unwrap();
        let o = a.0.conj() * b.0 + a.1.conj() * b.1;
        assert!((o.norm_sqr() - 0.5).abs() < 1e-15);
        assert!(spinor_of_star([0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn overlap_magnitude_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random_dirs(20, &mut rng);
        let g = GramMatrix::from_directions(&d).unwrap();
        for i in 0..20 {
            assert!((g.entries[(i, i)] - ONE).norm() < 1e-15);
            for j in 0..20 {
                let dot = d[i][0] * d[j][0] + d[i][1] * d[j][1] + d[i][2] * d[j][2];
                assert!((g.entries[(i, j)].norm_sqr() - 0.5 * (1.0 + dot)).abs() < 1e-14);
                assert!((g.entries[(i, j)] - g.entries[(j, i)].conj()).norm() < 1e-15);
            }
        }
        assert!(g.rank_residual() < 1e-10);
    }

    #[test]
    fn ryser_examples() {
        let id = DMatrix::<C64>::identity(3, 3);
        assert_eq!(permanent_ryser(&id, Exec::Sequential).unwrap(), ONE);
        let ones = DMatrix::from_element(3, 3, ONE);
        assert!((permanent_ryser(&ones, Exec::Sequential).unwrap() - c(6.0, 0.0)).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..=7 {
            let m = random_matrix(n, &mut rng);
            let want = naive_permanent(&m);
            let got = permanent_ryser(&m, Exec::Sequential).unwrap();
            assert!((got - want).norm() < 1e-12 * want.norm().max(1.0), "n = {n}");
            assert_eq!(got, permanent_ryser(&m, Exec::Parallel).unwrap());
        }
        assert_eq!(
            permanent_ryser(&DMatrix::from_element(21, 21, ONE), Exec::Sequential),
            Err(Error::SizeGuard { n: 21, limit: 20 })
        );
        assert!(permanent_ryser(&DMatrix::from_element(2, 3, ONE), Exec::Sequential).is_err());
    }

    #[test]
    fn rank2_examples() {
        let one = [ONE, ONE];
        let zero = [ZERO, ZERO];
        assert!((permanent_rank2(&one, &one, &zero, &zero).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        let g = GramMatrix::from_directions(&[[0.0, 0.6, 0.8], [0.0, 0.6, 0.8]]).unwrap();
        assert!((g.permanent() - c(2.0, 0.0)).norm() < 1e-14);
        assert!(permanent_rank2(&one, &one, &zero, &[ZERO]).is_err());
    }

    #[test]
    fn rank2_matches_ryser() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=14 {
            let v: Vec<Vec<C64>> = (0..4)
                .map(|_| (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
                .collect();
            let m = DMatrix::from_fn(n, n, |i, j| v[0][i] * v[1][j] + v[2][i] * v[3][j]);
            let want = permanent_ryser(&m, Exec::Parallel).unwrap();
            let got = permanent_rank2(&v[0], &v[1], &v[2], &v[3]).unwrap();
            assert!((got - want).norm() < 1e-9 * want.norm(), "n = {n}");
        }
        let d = random_dirs(10, &mut rng);
        let g = GramMatrix::from_directions(&d).unwrap();
        let want = permanent_ryser(&g.entries, Exec::Parallel).unwrap();
        assert!((g.permanent() - want).norm() < 1e-9 * want.norm());
    }

    #[test]
    fn rank2_log_domain_branch() {
        // all-ones N x N has permanent N!
        for n in [19usize, 25, 40] {
            let one = vec![ONE; n];
            let zero = vec![ZERO; n];
            let p = permanent_rank2(&one, &one, &zero, &zero).unwrap();
            let want = ln_factorial(n as u64).exp();
            assert!((p.re - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn normalization_lemma() {
        let north = constellation(&[[0.0, 0.0, 1.0]; 3]);
        assert!((normalization(&north).unwrap() - 36.0).abs() < 1e-10);
        let anti = constellation(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]);
        assert!((normalization(&anti).unwrap() - 2.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 1..=7 {
            let d = random_dirs(n, &mut rng);
            let sp: Vec<_> = d.iter().map(|x| spinor_of_star(*x).unwrap()).collect();
            let want = tensor_norm(&sp);
            let got = normalization(&constellation(&d)).unwrap();
            assert!((got - want).abs() < 1e-10 * want, "n = {n}");
        }
    }

    #[test]
    fn overlap_matches_amplitude_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 1..=8 {
            let a = constellation(&random_dirs(n, &mut rng));
            let b = constellation(&random_dirs(n, &mut rng));
            let perm = symmetric_overlap(&a, &b).unwrap();
            let amp = stars_to_state(&a).unwrap().inner(&stars_to_state(&b).unwrap()).unwrap();
            assert!((perm.norm() - amp.norm()).abs() < 1e-9, "n = {n}");
            assert!((symmetric_overlap(&a, &a).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        // antipodal coherent state is orthogonal
        let d = random_dirs(4, &mut rng);
        let a = constellation(&d);
        let anti = [-d[2][0], -d[2][1], -d[2][2]];
        let coh = constellation(&[anti; 4]);
        assert!(symmetric_overlap(&a, &coh).unwrap().norm() < 1e-12);

        let tri: Vec<[f64; 3]> = (0..3)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 3.0;
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        let ghz = constellation(&tri);
        let north = constellation(&[[0.0, 0.0, 1.0]; 3]);
        let amp = stars_to_state(&ghz).unwrap().amplitudes()[3].norm();
        assert!((symmetric_overlap(&ghz, &north).unwrap().norm() - amp).abs() < 1e-12);
        assert!(symmetric_overlap(&ghz, &constellation(&[[0.0, 0.0, 1.0]; 2])).is_err());
    }

    #[test]
    fn antipodal_basis_examples() {
        // spin-1 cat (|1,1> + |1,-1>): stars at ±i
        let cat = SpinState::new(2, vec![ONE, ZERO, ONE]).unwrap();
        let b = antipodal_basis(&cat).unwrap();
        assert_eq!(b.states.len(), 2);
        assert!(b.max_overlap < 1e-12);
        for s in &b.states {
            let n = s.mean_spin();
            assert!((n[1].abs() - 1.0).abs() < 1e-12, "{n:?}");
        }

        for two_s in 1..=8 {
            let top = SpinState::basis(two_s, two_s).unwrap();
            let b = antipodal_basis(&top).unwrap();
            assert_eq!(b.states.len(), two_s);
            assert!(b.max_overlap < 1e-10);
            // the first member is the coherent state at the south pole
            assert!((b.states[0].amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        }

        let up = SpinState::new(1, vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let b = antipodal_basis(&up).unwrap();
        assert_eq!(b.states.len(), 1);
        assert!(up.inner(&b.states[0]).unwrap().norm() < 1e-15);
    }

    #[test]
    fn antipodal_basis_completes_the_space() {
        for two_s in 1..=10 {
            let s = random_state(two_s, 40 + two_s as u64);
            let b = antipodal_basis(&s).unwrap();
            assert!(b.max_overlap < 1e-10, "two_s = {two_s}");
            assert!(b.gram_determinant > 1e-12, "two_s = {two_s}: {}", b.gram_determinant);
            let dim = two_s + 1;
            let mut proj = DMatrix::<C64>::zeros(dim, dim);
            let psi = s.amplitudes();
            for v in b.orthonormal.iter().map(|v| v.as_slice()).chain(std::iter::once(psi)) {
                for i in 0..dim {
                    for j in 0..dim {
                        proj[(i, j)] += v[i] * v[j].conj();
                    }
                }
            }
            let err = (proj - DMatrix::identity(dim, dim)).norm();
            assert!(err < 1e-8, "two_s = {two_s}: {err}");
        }
    }

    #[test]
    fn antipodal_basis_with_multiple_roots() {
        // (z - 0.5)^3 (z + 2)^2 (z - i)
        let roots = [0.5, 0.5, 0.5].iter().map(|x| ExtComplex::Finite(c(*x, 0.0)))
            .chain([ExtComplex::Finite(c(-2.0, 0.0)), ExtComplex::Finite(c(-2.0, 0.0)), ExtComplex::Finite(c(0.0, 1.0))])
            .collect::<Vec<_>>();
        let coeffs = crate::stellar::polynomial_from_roots(&roots);
        let s = SpinState::from_polynomial(&crate::MajoranaPolynomial::new(6, coeffs).unwrap()).unwrap();
        let b = antipodal_basis(&s).unwrap();
        assert_eq!(b.states.len(), 6);
        assert!(b.max_overlap < 1e-9, "{}", b.max_overlap);
    }
}
