//! Spin-S states in the |S,m> basis and their Majorana polynomials.
//!
//! Amplitudes are stored in ascending-m order, index `k = S + m`, so that
//! `k` is also the power of `z` in the polynomial
//! `P(z) = sum_k (-1)^k sqrt(C(2S,k)) c_k z^k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{unitary_step, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `sqrt(C(n, k))` for `k = 0..=n`.
pub fn sqrt_binomials(n: usize) -> Vec<f64> {
    (0..=n).map(|k| binomial(n, k).sqrt()).collect()
}

fn parity(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Normalized pure spin state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    two_s: usize,
    amplitudes: Vec<C64>,
}

/// Build a normalized state, keeping the relative (and global) phases.
pub fn make_state(two_s: usize, amplitudes: &[C64]) -> Result<SpinState> {
    SpinState::new(two_s, amplitudes.to_vec())
}

impl SpinState {
    pub fn new(two_s: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != two_s + 1 {
            return Err(Error::LengthMismatch {
                expected: two_s + 1,
                got: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Malformed("non-finite amplitude".into()));
        }
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::EmptyState);
        }
        for c in amplitudes.iter_mut() {
            *c /= norm;
        }
        Ok(Self { two_s, amplitudes })
    }

    /// The basis state `|S, m>` with `k = S + m`.
    pub fn basis(two_s: usize, k: usize) -> Result<Self> {
        if k > two_s {
            return Err(Error::InvalidArgument(format!("basis index {k} exceeds 2S = {two_s}")));
        }
        let mut amps = vec![ZERO; two_s + 1];
        amps[k] = C64::new(1.0, 0.0);
        Self::new(two_s, amps)
    }

    /// Spin coherent state pointing along the unit vector `n`
    /// (`|S,S>` for the +z axis).
    pub fn coherent(two_s: usize, n: [f64; 3]) -> Result<Self> {
        let (up, down) = crate::stellar::spinor_of_direction(n)?;
        Ok(Self::from_spinor_power(two_s, up, down))
    }

    /// The symmetric product `(up|↑> + down|↓>)^{⊗2S}` in the Dicke basis.
    pub fn from_spinor_power(two_s: usize, up: C64, down: C64) -> Self {
        let sb = sqrt_binomials(two_s);
        let amps: Vec<C64> = (0..=two_s)
            .map(|k| up.powu(k as u32) * down.powu((two_s - k) as u32) * sb[k])
            .collect();
        Self::new(two_s, amps).expect("spinor power of a unit spinor is nonzero")
    }

    pub fn two_s(&self) -> usize {
        self.two_s
    }

    /// Spin quantum number `S = two_s / 2`.
    pub fn spin(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s + 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SpinState) -> Result<C64> {
        if self.two_s != other.two_s {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &SpinState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Same state with the first nonzero amplitude made real and positive.
    pub fn canonical_phase(&self) -> SpinState {
        let max = self.amplitudes.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let lead = self
            .amplitudes
            .iter()
            .find(|c| c.norm() > 1e-14 * max)
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = lead.conj() / lead.norm();
        SpinState {
            two_s: self.two_s,
            amplitudes: self.amplitudes.iter().map(|c| c * phase).collect(),
        }
    }

    pub fn to_polynomial(&self) -> MajoranaPolynomial {
        let sb = sqrt_binomials(self.two_s);
        let coefficients = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, c)| c * (parity(k) * sb[k]))
            .collect();
        MajoranaPolynomial {
            two_s: self.two_s,
            coefficients,
        }
    }

    pub fn from_polynomial(poly: &MajoranaPolynomial) -> Result<SpinState> {
        if poly.coefficients.iter().all(|a| *a == ZERO) {
            return Err(Error::ZeroPolynomial);
        }
        let sb = sqrt_binomials(poly.two_s);
        let amps: Vec<C64> = poly
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, a)| a * (parity(k) / sb[k]))
            .collect();
        Ok(SpinState::new(poly.two_s, amps)?.canonical_phase())
    }

    /// `<psi|O|psi>`.
    pub fn expectation(&self, op: &DMatrix<C64>) -> Result<C64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: op.nrows(),
            });
        }
        let mut acc = ZERO;
        for i in 0..self.dim() {
            let mut row = ZERO;
            for j in 0..self.dim() {
                row += op[(i, j)] * self.amplitudes[j];
            }
            acc += self.amplitudes[i].conj() * row;
        }
        Ok(acc)
    }

    /// `O|psi>`, unnormalized result returned as raw amplitudes.
    pub fn apply(&self, op: &DMatrix<C64>) -> Result<Vec<C64>> {
        if op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: op.ncols(),
            });
        }
        Ok((0..op.nrows())
            .map(|i| (0..self.dim()).map(|j| op[(i, j)] * self.amplitudes[j]).sum())
            .collect())
    }

    /// Apply a unitary and renormalize.
    pub fn evolve(&self, u: &DMatrix<C64>) -> Result<SpinState> {
        SpinState::new(self.two_s, self.apply(u)?)
    }

    /// Active rotation `exp(-i angle axis·S)`.
    pub fn rotated(&self, axis: [f64; 3], angle: f64) -> Result<SpinState> {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroAxis);
        }
        let ops = SpinOperators::new(self.two_s);
        let h = ops.along([axis[0] / norm, axis[1] / norm, axis[2] / norm]);
        self.evolve(&unitary_step(&h, angle))
    }

    /// Mean spin vector `<S>`.
    pub fn mean_spin(&self) -> [f64; 3] {
        let ops = SpinOperators::new(self.two_s);
        let e = |m: &DMatrix<C64>| self.expectation(m).map(|v| v.re).unwrap_or(0.0);
        [e(&ops.sx), e(&ops.sy), e(&ops.sz)]
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord {
            two_s: self.two_s,
            amplitudes: self.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_record(rec: &StateRecord) -> Result<SpinState> {
        let amps: Vec<C64> = rec.amplitudes.iter().map(|p| C64::new(p[0], p[1])).collect();
        SpinState::new(rec.two_s, amps)
    }
}

/// On-disk form of a state: `{"two_s": .., "amplitudes": [[re, im], ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub two_s: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

/// `P(z) = sum_k a_k z^k` for a spin of `two_s / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MajoranaPolynomial {
    pub two_s: usize,
    pub coefficients: Vec<C64>,
}

/// Which differential operator to apply in [`MajoranaPolynomial::apply_ladder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
    Z,
}

impl MajoranaPolynomial {
    pub fn new(two_s: usize, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() != two_s + 1 {
            return Err(Error::LengthMismatch {
                expected: two_s + 1,
                got: coefficients.len(),
            });
        }
        if coefficients.iter().all(|a| *a == ZERO) {
            return Err(Error::ZeroPolynomial);
        }
        Ok(Self { two_s, coefficients })
    }

    /// Number of vanishing leading coefficients, i.e. roots at infinity.
    /// A coefficient counts as vanishing below `1e-12 * max|a|`.
    pub fn degree_deficit(&self) -> usize {
        let max = self.coefficients.iter().map(|a| a.norm()).fold(0.0, f64::max);
        self.coefficients
            .iter()
            .rev()
            .take_while(|a| a.norm() <= 1e-12 * max)
            .count()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coefficients.iter().rev().fold(ZERO, |acc, a| acc * z + a)
    }

    /// `sum_k |a_k| |z|^k`, the natural scale for residuals at `z`.
    pub fn abs_scale(&self, z: C64) -> f64 {
        let r = z.norm();
        self.coefficients.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
    }

    /// Image under the differential realization
    /// `J+ = 2j z - z^2 d/dz`, `J- = d/dz`, `Jz = z d/dz - j`.
    ///
    /// Because of the `(-1)^k` factor in the coefficient rule, `J±` here
    /// equal `-S±` acting on the amplitudes, while `Jz` equals `Sz`.
    pub fn apply_ladder(&self, which: Ladder) -> MajoranaPolynomial {
        let n = self.two_s;
        let a = &self.coefficients;
        let j = n as f64 / 2.0;
        let mut out = vec![ZERO; n + 1];
        match which {
            Ladder::Lower => {
                for k in 1..=n {
                    out[k - 1] = a[k] * k as f64;
                }
            }
            Ladder::Raise => {
                for k in 0..n {
                    out[k + 1] = a[k] * (n - k) as f64;
                }
            }
            Ladder::Z => {
                for k in 0..=n {
                    out[k] = a[k] * (k as f64 - j);
                }
            }
        }
        MajoranaPolynomial {
            two_s: n,
            coefficients: out,
        }
    }
}

/// Spin matrices in the ascending-m basis.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub two_s: usize,
    pub sx: DMatrix<C64>,
    pub sy: DMatrix<C64>,
    pub sz: DMatrix<C64>,
    pub splus: DMatrix<C64>,
    pub sminus: DMatrix<C64>,
}

impl SpinOperators {
    pub fn new(two_s: usize) -> Self {
        let d = two_s + 1;
        let s = two_s as f64 / 2.0;
        let mut splus = DMatrix::from_element(d, d, ZERO);
        let mut sz = DMatrix::from_element(d, d, ZERO);
        for k in 0..d {
            let m = k as f64 - s;
            sz[(k, k)] = C64::new(m, 0.0);
            if k + 1 < d {
                splus[(k + 1, k)] = C64::new(((s - m) * (s + m + 1.0)).sqrt(), 0.0);
            }
        }
        let sminus = splus.adjoint();
        let sx = (&splus + &sminus) * C64::new(0.5, 0.0);
        let sy = (&splus - &sminus) * C64::new(0.0, -0.5);
        Self {
            two_s,
            sx,
            sy,
            sz,
            splus,
            sminus,
        }
    }

    pub fn dim(&self) -> usize {
        self.two_s + 1
    }

    /// `n·S` for a real 3-vector `n`.
    pub fn along(&self, n: [f64; 3]) -> DMatrix<C64> {
        &self.sx * C64::new(n[0], 0.0) + &self.sy * C64::new(n[1], 0.0) + &self.sz * C64::new(n[2], 0.0)
    }

    pub fn components(&self) -> [&DMatrix<C64>; 3] {
        [&self.sx, &self.sy, &self.sz]
    }
}
