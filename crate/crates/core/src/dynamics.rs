//! Time evolution under spin Hamiltonians, star trajectories, Berry phases
//! and their split into star solid angles and a residual.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{min_cost_assignment, unitary_step, C64};
use crate::permanent::GramMatrix;
use crate::spinstate::{SpinOperators, SpinState};
use crate::stellar::{chordal, dot, normalize, project, stars_of, Constellation, Convention, ExtComplex};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest chordal jump of a star between consecutive samples before the
/// step is flagged.
pub const MATCH_RADIUS: f64 = 0.2;
/// `|z|` beyond which the Riccati integrator moves to the `1/z` chart.
pub const CHART_SWITCH: f64 = 10.0;

/// Time-dependent field `B(t)` of `H(t) = B(t)·S`, optionally with a
/// twisting term `χ (a·S)^2`. Angular-frequency units, `ħ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DriveField {
    /// `B(t) = b0 (sin θ0 cos ωt, sin θ0 sin ωt, cos θ0)`, period `2π/|ω|`.
    Cone { b0: f64, theta0: f64, omega: f64 },
    Constant { b: [f64; 3], period: f64 },
    /// `H = b·S + χ (axis·S)^2`.
    Lmg { b: [f64; 3], chi: f64, axis: [f64; 3], period: f64 },
}

impl DriveField {
    pub fn field(&self, t: f64) -> [f64; 3] {
        match *self {
            DriveField::Cone { b0, theta0, omega } => {
                let (s, c) = theta0.sin_cos();
                let (sw, cw) = (omega * t).sin_cos();
                [b0 * s * cw, b0 * s * sw, b0 * c]
            }
            DriveField::Constant { b, .. } | DriveField::Lmg { b, .. } => b,
        }
    }

    pub fn period(&self) -> f64 {
        match *self {
            DriveField::Cone { omega, .. } => TAU / omega.abs(),
            DriveField::Constant { period, .. } | DriveField::Lmg { period, .. } => period,
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, DriveField::Lmg { chi, .. } if *chi != 0.0)
    }

    /// `|B(0) - B(T)| < 1e-12` componentwise.
    pub fn closed(&self) -> bool {
        let (a, b) = (self.field(0.0), self.field(self.period()));
        (0..3).all(|i| (a[i] - b[i]).abs() < 1e-12)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.period();
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidArgument("drive period must be positive and finite".into()));
        }
        if let DriveField::Lmg { axis, chi, .. } = self {
            if *chi != 0.0 && normalize(*axis).is_none() {
                return Err(Error::ZeroAxis);
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self, ops: &SpinOperators, t: f64) -> DMatrix<C64> {
        let mut h = ops.along(self.field(t));
        if let DriveField::Lmg { chi, axis, .. } = *self {
            if chi != 0.0 {
                let a = ops.along(normalize(axis).unwrap_or([0.0, 0.0, 1.0]));
                h += &a * &a * C64::new(chi, 0.0);
            }
        }
        h
    }

    /// `(ω+, ωz, ω-)` of `i dz/dt = ω+ + ωz z + ω- z^2` for each star.
    pub fn riccati_coefficients(&self, t: f64) -> (C64, C64, C64) {
        let b = self.field(t);
        (
            C64::new(0.5 * b[0], 0.5 * b[1]),
            C64::new(-b[2], 0.0),
            C64::new(-0.5 * b[0], 0.5 * b[1]),
        )
    }
}

/// Sampled Schrödinger evolution with labelled star paths.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub drive: DriveField,
    pub times: Vec<f64>,
    pub states: Vec<SpinState>,
    /// `star_paths[k][i]`: direction of star `k` at `times[i]`.
    pub star_paths: Vec<Vec<[f64; 3]>>,
    /// Degeneracy partition at each sample.
    pub partitions: Vec<Vec<usize>>,
    /// Samples whose matching moved some star further than [`MATCH_RADIUS`].
    pub flagged_steps: Vec<usize>,
    /// `sum <ψ|H|ψ> dt` by the trapezoid rule.
    pub energy_integral: f64,
    pub max_norm_drift: f64,
}

/// Propagate `state` over one drive period in `steps` equal steps with the
/// fourth-order Magnus propagator (two Gauss points per step), extracting
/// and matching stars at each sample.
pub fn evolve_schrodinger(state: &SpinState, drive: &DriveField, steps: usize) -> Result<Trajectory> {
    evolve_schrodinger_until(state, drive, steps, drive.period())
}

/// As [`evolve_schrodinger`] over `[0, duration]`.
pub fn evolve_schrodinger_until(state: &SpinState, drive: &DriveField, steps: usize, duration: f64) -> Result<Trajectory> {
    if steps < 2 {
        return Err(Error::InvalidArgument("steps must be at least 2".into()));
    }
    drive.validate()?;
    let n = state.two_s();
    let ops = SpinOperators::new(n);
    let dt = duration / steps as f64;
    let g = 3f64.sqrt() / 6.0;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let mut psi = DVector::from_column_slice(state.amplitudes());
    let mut states = vec![state.clone()];
    let mut energies = vec![expect(&psi, &drive.hamiltonian(&ops, 0.0))];
    let mut max_norm_drift: f64 = 0.0;
    for i in 0..steps {
        let t = times[i];
        let h1 = drive.hamiltonian(&ops, t + (0.5 - g) * dt);
        let h2 = drive.hamiltonian(&ops, t + (0.5 + g) * dt);
        let comm = &h2 * &h1 - &h1 * &h2;
        let heff = (&h1 + &h2) * C64::new(0.5, 0.0) - comm * C64::new(0.0, 3f64.sqrt() / 12.0 * dt);
        let heff = (&heff + heff.adjoint()) * C64::new(0.5, 0.0);
        psi = unitary_step(&heff, dt) * psi;
        max_norm_drift = max_norm_drift.max((psi.norm() - 1.0).abs());
        energies.push(expect(&psi, &drive.hamiltonian(&ops, times[i + 1])));
        states.push(SpinState::new(n, psi.iter().copied().collect())?);
    }
    let energy_integral = (0..steps).map(|i| 0.5 * (energies[i] + energies[i + 1]) * dt).sum();

    let mut star_paths: Vec<Vec<[f64; 3]>> = vec![Vec::with_capacity(steps + 1); n];
    let mut partitions = Vec::with_capacity(steps + 1);
    let mut flagged_steps = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let c = stars_of(s);
        partitions.push(c.partition());
        let dirs = c.expanded_directions();
        if i == 0 {
            for (k, d) in dirs.into_iter().enumerate() {
                star_paths[k].push(d);
            }
            continue;
        }
        let prev: Vec<[f64; 3]> = star_paths.iter().map(|p| *p.last().unwrap()).collect();
        let (matched, worst) = match_stars(&prev, &dirs);
        if worst > MATCH_RADIUS {
            flagged_steps.push(i);
        }
        for (k, d) in matched.into_iter().enumerate() {
            star_paths[k].push(d);
        }
    }
    Ok(Trajectory {
        drive: *drive,
        times,
        states,
        star_paths,
        partitions,
        flagged_steps,
        energy_integral,
        max_norm_drift,
    })
}

fn expect(psi: &DVector<C64>, h: &DMatrix<C64>) -> f64 {
    psi.dotc(&(h * psi)).re
}

/// Reorder `next` to follow `prev` by minimal total chordal distance;
/// returns the reordered list and the largest matched step.
pub fn match_stars(prev: &[[f64; 3]], next: &[[f64; 3]]) -> (Vec<[f64; 3]>, f64) {
    let cost: Vec<Vec<f64>> = prev.iter().map(|p| next.iter().map(|q| chordal(*p, *q)).collect()).collect();
    let assign = min_cost_assignment(&cost);
    let mut worst: f64 = 0.0;
    let out = assign
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            worst = worst.max(cost[k][j]);
            next[j]
        })
        .collect();
    (out, worst)
}

/// Star paths from integrating each star's Riccati equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiccatiPaths {
    pub times: Vec<f64>,
    pub star_paths: Vec<Vec<[f64; 3]>>,
    pub chart_switches: usize,
}

/// Integrate every star of `c` independently with adaptive Dormand–Prince
/// 5(4) steps, sampled at `steps + 1` equally spaced times over one period.
pub fn evolve_riccati(c: &Constellation, drive: &DriveField, steps: usize, exec: Exec) -> Result<RiccatiPaths> {
    evolve_riccati_until(c, drive, steps, drive.period(), exec)
}

pub fn evolve_riccati_until(
    c: &Constellation,
    drive: &DriveField,
    steps: usize,
    duration: f64,
    exec: Exec,
) -> Result<RiccatiPaths> {
    if !drive.is_linear() {
        return Err(Error::NonlinearDrive);
    }
    if steps < 1 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    drive.validate()?;
    let times: Vec<f64> = (0..=steps).map(|i| duration * i as f64 / steps as f64).collect();
    let roots: Vec<ExtComplex> = c.stars.iter().map(|s| s.z).collect();
    let runs = exec.map_slice(&roots, |z| integrate_star(*z, drive, &times));
    let mut star_paths = Vec::with_capacity(c.two_s);
    let mut chart_switches = 0;
    for (star, (path, switches)) in c.stars.iter().zip(runs) {
        let dirs: Vec<[f64; 3]> = path.iter().map(|z| project(*z, Convention::NorthAtZero)).collect();
        for _ in 0..star.multiplicity {
            star_paths.push(dirs.clone());
            chart_switches += switches;
        }
    }
    Ok(RiccatiPaths { times, star_paths, chart_switches })
}

/// A point in one of the two charts: `z` (`flipped = false`) or `w = 1/z`.
#[derive(Debug, Clone, Copy)]
struct Chart {
    x: C64,
    flipped: bool,
}

impl Chart {
    fn from_root(z: ExtComplex) -> Self {
        match z {
            ExtComplex::Finite(z) if z.norm() <= CHART_SWITCH => Chart { x: z, flipped: false },
            ExtComplex::Finite(z) => Chart { x: z.inv(), flipped: true },
            ExtComplex::Infinity => Chart { x: ZERO, flipped: true },
        }
    }

    fn root(self) -> ExtComplex {
        if !self.flipped {
            ExtComplex::Finite(self.x)
        } else if self.x == ZERO {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(self.x.inv())
        }
    }

    fn rhs(self, drive: &DriveField, t: f64, x: C64) -> C64 {
        let (wp, wz, wm) = drive.riccati_coefficients(t);
        if self.flipped {
            // w = 1/z: i dw/dt = -(ω+ w^2 + ωz w + ω-)
            I * (wp * x * x + wz * x + wm)
        } else {
            -I * (wp + wz * x + wm * x * x)
        }
    }

    fn rebalance(&mut self) -> bool {
        if self.x.norm() > CHART_SWITCH {
            self.x = self.x.inv();
            self.flipped = !self.flipped;
            true
        } else {
            false
        }
    }
}

const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];
const RK_TOL: f64 = 1e-12;

/// Dormand–Prince step; returns the fifth-order value and the error estimate.
fn dp_step(chart: Chart, drive: &DriveField, t: f64, h: f64) -> (C64, f64) {
    let mut k = [ZERO; 7];
    for s in 0..7 {
        let mut x = chart.x;
        for j in 0..s {
            x += k[j] * (h * DP_A[s][j]);
        }
        k[s] = chart.rhs(drive, t + DP_C[s] * h, x);
    }
    let mut x5 = chart.x;
    let mut err = ZERO;
    for s in 0..7 {
        x5 += k[s] * (h * DP_B5[s]);
        err += k[s] * (h * (DP_B5[s] - DP_B4[s]));
    }
    (x5, err.norm())
}

fn integrate_star(z0: ExtComplex, drive: &DriveField, times: &[f64]) -> (Vec<ExtComplex>, usize) {
    let mut chart = Chart::from_root(z0);
    let mut out = vec![z0];
    let mut switches = 0;
    let mut h = (times.get(1).copied().unwrap_or(1.0) - times[0]).abs().max(1e-6) * 0.1;
    for win in times.windows(2) {
        let (mut t, end) = (win[0], win[1]);
        while t < end {
            let step = h.min(end - t);
            let (x, err) = dp_step(chart, drive, t, step);
            let scale = RK_TOL * (1.0 + chart.x.norm().max(x.norm()));
            if err <= scale || step < 1e-14 {
                t += step;
                chart.x = x;
                if chart.rebalance() {
                    switches += 1;
                }
                if step == h {
                    h *= (0.9 * (scale / err.max(1e-300)).powf(0.2)).clamp(0.2, 5.0);
                }
            } else {
                h = step * (0.9 * (scale / err).powf(0.2)).clamp(0.1, 0.9);
            }
        }
        out.push(chart.root());
    }
    (out, switches)
}

/// Eigenstates of the rotating-frame Hamiltonian
/// `b0 sin θ0 Sx + (b0 cos θ0 - ω) Sz`, which return to themselves (up to
/// phase) after one period of the cone drive. `index` counts eigenvalues in
/// ascending order.
pub fn cone_cyclic_state(two_s: usize, drive: &DriveField, index: usize) -> Result<SpinState> {
    let DriveField::Cone { b0, theta0, omega } = *drive else {
        return Err(Error::InvalidArgument("cyclic states are defined for cone drives".into()));
    };
    if index > two_s {
        return Err(Error::InvalidArgument(format!("eigenstate index {index} exceeds 2S = {two_s}")));
    }
    let ops = SpinOperators::new(two_s);
    let h = ops.along([b0 * theta0.sin(), 0.0, b0 * theta0.cos() - omega]);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..=two_s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let v = eig.eigenvectors.column(order[index]);
    SpinState::new(two_s, v.iter().copied().collect())
}

/// Geometric phase of a closed trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerryPhase {
    /// `-arg prod <ψ_i|ψ_{i+1}>` with the loop closed on `ψ_0`, in `(-π, π]`.
    pub gamma: f64,
    /// `arg <ψ_0|ψ_T> + ∫ <H> dt`, wrapped; agrees with `gamma` up to the
    /// quadrature error of the energy integral.
    pub gamma_from_dynamical: f64,
    pub dynamical_phase: f64,
    pub endpoint_fidelity: f64,
}

pub fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI { y - TAU } else { y }
}

/// Pancharatnam phase of the sampled loop.
pub fn berry_phase(traj: &Trajectory) -> Result<BerryPhase> {
    let s = &traj.states;
    let (first, last) = (&s[0], s.last().unwrap());
    let fid = first.fidelity(last)?;
    if fid < 1.0 - 1e-8 {
        return Err(Error::OpenLoop(1.0 - fid));
    }
    let mut acc = 0.0;
    for i in 0..s.len() - 1 {
        let next = if i + 1 == s.len() - 1 { first } else { &s[i + 1] };
        acc += s[i].inner(next)?.arg();
    }
    let gamma = wrap(-acc);
    let total = first.inner(last)?.arg();
    let dynamical_phase = -traj.energy_integral;
    Ok(BerryPhase {
        gamma,
        gamma_from_dynamical: wrap(total - dynamical_phase),
        dynamical_phase,
        endpoint_fidelity: fid,
    })
}

/// Running signed area between the path and an apex, one entry per vertex.
/// The apex is the north pole unless some edge passes across its antipode,
/// in which case the first safe axis among `-z, ±x, ±y` is used.
pub fn solid_angle_accumulators(path: &[[f64; 3]]) -> (Vec<f64>, [f64; 3]) {
    const APEXES: [[f64; 3]; 6] = [
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
    ];
    for apex in APEXES {
        if let Some(acc) = accumulate(path, apex) {
            return (acc, apex);
        }
    }
    let apex = APEXES[0];
    let mut acc = vec![0.0];
    let mut total = 0.0;
    for w in path.windows(2) {
        total += triangle_area(apex, w[0], w[1]);
        acc.push(total);
    }
    (acc, apex)
}

fn accumulate(path: &[[f64; 3]], apex: [f64; 3]) -> Option<Vec<f64>> {
    let mut acc = Vec::with_capacity(path.len());
    let mut total = 0.0;
    acc.push(0.0);
    for w in path.windows(2) {
        let den = 1.0 + dot(apex, w[0]) + dot(w[0], w[1]) + dot(w[1], apex);
        // an edge spanning the antipode of the apex leaves den <= 0
        if den <= 0.0 && chordal(w[0], w[1]) > 0.0 {
            return None;
        }
        total += triangle_area(apex, w[0], w[1]);
        acc.push(total);
    }
    Some(acc)
}

/// Signed area of the geodesic triangle `(a, b, c)`.
fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let bc = [b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]];
    let num = dot(a, bc);
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

/// Signed solid angle enclosed by a closed path (positive when the pole-side
/// region lies to the left).
pub fn solid_angle(path: &[[f64; 3]]) -> Result<f64> {
    if path.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let gap = chordal(path[0], *path.last().unwrap());
    if gap > 1e-8 {
        return Err(Error::OpenLoop(gap));
    }
    let (acc, _) = solid_angle_accumulators(path);
    Ok(*acc.last().unwrap())
}

/// Bare twist `∮ R̂·(r̂ × dr̂)` of a star pair, with `R̂ ∝ n_k + n_l` and
/// `r̂ ∝ n_k - n_l`; zero while the stars coincide.
pub fn twist_integral(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    let frame = |p: [f64; 3], q: [f64; 3]| {
        let r = normalize([p[0] - q[0], p[1] - q[1], p[2] - q[2]])?;
        let axis = normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]);
        Some((r, axis))
    };
    let mut total = 0.0;
    for i in 0..a.len().min(b.len()).saturating_sub(1) {
        if chordal(a[i], b[i]) < 1e-9 || chordal(a[i + 1], b[i + 1]) < 1e-9 {
            continue;
        }
        let (Some((r0, ax0)), Some((r1, ax1))) = (frame(a[i], b[i]), frame(a[i + 1], b[i + 1])) else {
            continue;
        };
        let axis = match (ax0, ax1) {
            (Some(x), Some(y)) => normalize([x[0] + y[0], x[1] + y[1], x[2] + y[2]]).unwrap_or(x),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => continue,
        };
        let cr = [r0[1] * r1[2] - r0[2] * r1[1], r0[2] * r1[0] - r0[0] * r1[2], r0[0] * r1[1] - r0[1] * r1[0]];
        total += dot(axis, cr).atan2(dot(r0, r1));
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramSnapshot {
    pub t: f64,
    /// Upper-triangle entries `(k, l, re, im)` of `G_kl = <n_k|n_l>`.
    pub entries: Vec<(usize, usize, f64, f64)>,
    pub permanent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub solid_angles: Vec<f64>,
    /// `-½ sum_k Ω_k`.
    pub rigid: f64,
    pub berry_total: f64,
    /// `berry_total - rigid`, wrapped to `(-π, π]`.
    pub anomalous: f64,
    /// `berry_total - rigid` without wrapping.
    pub anomalous_unwrapped: f64,
    /// `(anomalous_unwrapped - anomalous) / 2π`.
    pub winding: i64,
    /// `(k, l, bare twist)` for `k < l`.
    pub twists: Vec<(usize, usize, f64)>,
    pub gram_snapshots: Vec<GramSnapshot>,
}

const SNAPSHOTS: usize = 16;

/// Split the Berry phase of a closed trajectory into the star solid angles
/// and the residual.
pub fn decompose(traj: &Trajectory) -> Result<Decomposition> {
    let berry = berry_phase(traj)?;
    let solid_angles = traj.star_paths.iter().map(|p| solid_angle(p)).collect::<Result<Vec<_>>>()?;
    let rigid = -0.5 * solid_angles.iter().sum::<f64>();
    let anomalous_unwrapped = berry.gamma - rigid;
    let anomalous = wrap(anomalous_unwrapped);
    let winding = ((anomalous_unwrapped - anomalous) / TAU).round() as i64;
    let n = traj.star_paths.len();
    let mut twists = Vec::new();
    for k in 0..n {
        for l in (k + 1)..n {
            twists.push((k, l, twist_integral(&traj.star_paths[k], &traj.star_paths[l])));
        }
    }
    let samples = traj.times.len();
    let stride = ((samples - 1) / SNAPSHOTS).max(1);
    let mut gram_snapshots = Vec::new();
    for i in (0..samples).step_by(stride) {
        let dirs: Vec<[f64; 3]> = traj.star_paths.iter().map(|p| p[i]).collect();
        let g = GramMatrix::from_directions(&dirs)?;
        let mut entries = Vec::new();
        for k in 0..n {
            for l in (k + 1)..n {
                let e = g.entries[(k, l)];
                entries.push((k, l, e.re, e.im));
            }
        }
        gram_snapshots.push(GramSnapshot { t: traj.times[i], entries, permanent: g.permanent().re });
    }
    Ok(Decomposition {
        solid_angles,
        rigid,
        berry_total: berry.gamma,
        anomalous,
        anomalous_unwrapped,
        winding,
        twists,
        gram_snapshots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub amplitudes: Vec<[f64; 2]>,
    pub stars: Vec<[f64; 3]>,
    /// Running solid angle of each star path up to `t`.
    pub omega: Vec<f64>,
}

/// One record per sample, for line-delimited JSON export.
pub fn trajectory_records(traj: &Trajectory) -> Vec<TrajectoryRecord> {
    let acc: Vec<Vec<f64>> = traj.star_paths.iter().map(|p| solid_angle_accumulators(p).0).collect();
    traj.times
        .iter()
        .enumerate()
        .map(|(i, &t)| TrajectoryRecord {
            t,
            amplitudes: traj.states[i].amplitudes().iter().map(|a| [a.re, a.im]).collect(),
            stars: traj.star_paths.iter().map(|p| p[i]).collect(),
            omega: acc.iter().map(|a| a[i]).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::squeezing;
    use crate::geometry::random_state;
    use crate::stellar::{stars_to_state, DEFAULT_TOLERANCE};

    fn cone(b0: f64, theta0: f64, omega: f64) -> DriveField {
        DriveField::Cone { b0, theta0, omega }
    }

    fn constant_z() -> DriveField {
        DriveField::Constant { b: [0.0, 0.0, 1.0], period: TAU }
    }

    fn cap(theta: f64, samples: usize) -> Vec<[f64; 3]> {
        (0..=samples)
            .map(|i| {
                let p = TAU * i as f64 / samples as f64;
                [theta.sin() * p.cos(), theta.sin() * p.sin(), theta.cos()]
            })
            .collect()
    }

    /// Spherical excess of a triangle by L'Huilier's theorem, signed by
    /// orientation.
    fn lhuilier(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
        let ang = |x: [f64; 3], y: [f64; 3]| dot(x, y).clamp(-1.0, 1.0).acos();
        let (sa, sb, sc) = (ang(b, c), ang(c, a), ang(a, b));
        let s = 0.5 * (sa + sb + sc);
        let t = (0.5 * s).tan() * (0.5 * (s - sa)).tan() * (0.5 * (s - sb)).tan() * (0.5 * (s - sc)).tan();
        let e = 4.0 * t.max(0.0).sqrt().atan();
        let bc = [b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]];
        if dot(a, bc) < 0.0 { -e } else { e }
    }

    #[test]
    fn drive_fields() {
        let d = cone(2.0, 0.4, 3.0);
        assert!(d.closed() && d.is_linear());
        assert!((d.period() - TAU / 3.0).abs() < 1e-15);
        let lmg = DriveField::Lmg { b: [0.0; 3], chi: 1.0, axis: [0.0, 0.0, 1.0], period: 1.0 };
        assert!(!lmg.is_linear());
        let json = r#"{"type": "cone", "b0": 1.0, "theta0": 0.5, "omega": 2.0}"#;
        let parsed: DriveField = serde_json::from_str(json).unwrap();
        assert_eq!(parsed, cone(1.0, 0.5, 2.0));
        assert!(serde_json::from_str::<DriveField>(r#"{"type": "cone", "b0": 1, "theta0": 0, "omega": 1, "x": 0}"#).is_err());
    }

    #[test]
    fn solid_angle_examples() {
        let eq = cap(PI / 2.0, 400);
        assert!((solid_angle(&eq).unwrap().abs() - TAU).abs() < 1e-12);
        for th in [0.2, 1.0, 2.0, 3.0] {
            let got = solid_angle(&cap(th, 1000)).unwrap();
            let want = TAU * (1.0 - th.cos());
            // polygon inscribed in the small circle
            let exact_poly: f64 = {
                let p = cap(th, 1000);
                p.windows(2).map(|w| lhuilier([0.0, 0.0, 1.0], w[0], w[1])).sum()
            };
            assert!((got - exact_poly).abs() < 1e-6, "theta = {th}: {}", got - exact_poly);
            assert!((got - want).abs() < 1e-4 * want.max(1.0), "theta = {th}: {got} {want} {exact_poly}");
        }
        assert!(matches!(solid_angle(&cap(1.0, 10)[..10]), Err(Error::OpenLoop(_))));
    }

    #[test]
    fn solid_angle_matches_triangulation_for_random_loops() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            // a star-shaped loop around a random centre
            let c = normalize([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).unwrap();
            let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let u = normalize([
                helper[0] - dot(helper, c) * c[0],
                helper[1] - dot(helper, c) * c[1],
                helper[2] - dot(helper, c) * c[2],
            ]).unwrap();
            let w = [c[1] * u[2] - c[2] * u[1], c[2] * u[0] - c[0] * u[2], c[0] * u[1] - c[1] * u[0]];
            let a1: f64 = rng.random_range(0.0..0.3);
            let base: f64 = rng.random_range(0.3..1.2);
            let m = 600;
            let path: Vec<[f64; 3]> = (0..=m)
                .map(|i| {
                    let p = TAU * (i % m) as f64 / m as f64;
                    let r = base + a1 * (3.0 * p).sin();
                    let (s, co) = r.sin_cos();
                    normalize([
                        co * c[0] + s * (p.cos() * u[0] + p.sin() * w[0]),
                        co * c[1] + s * (p.cos() * u[1] + p.sin() * w[1]),
                        co * c[2] + s * (p.cos() * u[2] + p.sin() * w[2]),
                    ]).unwrap()
                })
                .collect();
            let fan: f64 = path.windows(2).map(|e| lhuilier(c, e[0], e[1])).sum();
            let got = solid_angle(&path).unwrap();
            let diff = wrap((got - fan) * 0.5) * 2.0;
            assert!(diff.abs() < 1e-6, "{got} vs {fan}");
        }
    }

    #[test]
    fn constant_field_keeps_eigenstate_stationary() {
        let s = SpinState::basis(4, 4).unwrap();
        let tr = evolve_schrodinger(&s, &constant_z(), 100).unwrap();
        for p in &tr.star_paths {
            for d in p {
                assert!(chordal(*d, [0.0, 0.0, 1.0]) < 1e-12);
            }
        }
        let b = berry_phase(&tr).unwrap();
        // |S,S> picks up only the dynamical phase -2π·2
        assert!(b.gamma.abs() < 1e-10);
        assert!((b.dynamical_phase + 2.0 * TAU).abs() < 1e-10);
    }

    #[test]
    fn norm_and_energy_are_conserved() {
        let s = random_state(6, 1);
        let d = DriveField::Constant { b: [0.3, -0.7, 0.4], period: 5.0 };
        let tr = evolve_schrodinger(&s, &d, 500).unwrap();
        assert!(tr.max_norm_drift < 1e-10);
        let ops = SpinOperators::new(6);
        let h = d.hamiltonian(&ops, 0.0);
        let e0 = tr.states[0].expectation(&h).unwrap().re;
        for st in &tr.states {
            assert!((st.expectation(&h).unwrap().re - e0).abs() < 1e-9);
        }
    }

    #[test]
    fn cat_state_precesses_rigidly() {
        let cat = SpinState::new(4, vec![C64::new(1.0, 0.0), ZERO, ZERO, ZERO, C64::new(1.0, 0.0)]).unwrap();
        let tr = evolve_schrodinger(&cat, &constant_z(), 200).unwrap();
        let rc = evolve_riccati(&stars_of(&cat), &constant_z(), 200, Exec::Sequential).unwrap();
        for (i, &t) in tr.times.iter().enumerate() {
            // stars of z^4 + 1 turned by the angle t
            let want: Vec<[f64; 3]> = (0..4)
                .map(|k| {
                    let a = PI * (2 * k + 1) as f64 / 4.0 + t;
                    [a.cos(), a.sin(), 0.0]
                })
                .collect();
            let now: Vec<[f64; 3]> = tr.star_paths.iter().map(|p| p[i]).collect();
            assert!(match_stars(&want, &now).1 < 1e-9);
            let (_, worst) = match_stars(&tr.star_paths.iter().map(|p| p[i]).collect::<Vec<_>>(),
                &rc.star_paths.iter().map(|p| p[i]).collect::<Vec<_>>());
            assert!(worst < 1e-9);
        }
    }

    #[test]
    fn riccati_sign_matches_schrodinger() {
        // one star at z0, constant Bz: z(t) = z0 e^{i Bz t}
        let z0 = C64::new(0.7, 0.2);
        let s = SpinState::from_spinor_power(1, C64::new(1.0, 0.0) / (1.0 + z0.norm_sqr()).sqrt(), z0 / (1.0 + z0.norm_sqr()).sqrt());
        let c = stars_of(&s);
        let d = DriveField::Constant { b: [0.0, 0.0, 1.3], period: 2.0 };
        let rc = evolve_riccati(&c, &d, 10, Exec::Sequential).unwrap();
        let tr = evolve_schrodinger(&s, &d, 10).unwrap();
        for (i, &t) in rc.times.iter().enumerate() {
            let want = project(ExtComplex::Finite(z0 * C64::from_polar(1.0, 1.3 * t)), Convention::NorthAtZero);
            assert!(chordal(rc.star_paths[0][i], want) < 1e-10);
            assert!(chordal(tr.star_paths[0][i], want) < 1e-10);
        }
        // a transverse field as well
        let d = DriveField::Constant { b: [0.4, -0.9, 0.2], period: 3.0 };
        let rc = evolve_riccati(&c, &d, 30, Exec::Sequential).unwrap();
        let tr = evolve_schrodinger(&s, &d, 30).unwrap();
        for i in 0..=30 {
            assert!(chordal(rc.star_paths[0][i], tr.star_paths[0][i]) < 1e-9);
        }
    }

    #[test]
    fn riccati_switches_chart_through_the_pole() {
        let s = SpinState::basis(1, 1).unwrap();
        let c = stars_of(&s);
        let d = DriveField::Constant { b: [1.0, 0.0, 0.0], period: TAU };
        let rc = evolve_riccati(&c, &d, 400, Exec::Sequential).unwrap();
        assert!(rc.chart_switches >= 2);
        let p = &rc.star_paths[0];
        for w in p.windows(2) {
            assert!(chordal(w[0], w[1]) < 0.05);
        }
        assert!(p.iter().any(|n| n[2] < -0.999));
        assert!(chordal(p[0], *p.last().unwrap()) < 1e-9);
    }

    #[test]
    fn degenerate_pair_stays_coincident() {
        let dirs = [[0.6, 0.0, 0.8], [0.6, 0.0, 0.8], [0.0, -1.0, 0.0]];
        let c = Constellation::from_directions(&dirs, DEFAULT_TOLERANCE, Convention::NorthAtZero).unwrap();
        let d = cone(1.0, 0.7, 2.0);
        let rc = evolve_riccati(&c, &d, 100, Exec::Sequential).unwrap();
        let pair: Vec<_> = rc.star_paths.iter().filter(|p| chordal(p[0], dirs[0]) < 1e-12).collect();
        assert_eq!(pair.len(), 2);
        assert_eq!(pair[0], pair[1]);

        let tr = evolve_schrodinger(&stars_to_state(&c).unwrap(), &d, 200).unwrap();
        assert!(tr.partitions.iter().all(|p| p == &vec![2, 1]));
    }

    #[test]
    fn riccati_agrees_with_schrodinger_on_a_cone() {
        let d = cone(1.3, 0.6, 2.1);
        for two_s in [1, 3, 6] {
            let s = random_state(two_s, 70 + two_s as u64);
            let tr = evolve_schrodinger(&s, &d, 400).unwrap();
            let rc = evolve_riccati(&stars_of(&s), &d, 400, Exec::Parallel).unwrap();
            for i in 0..tr.times.len() {
                let a: Vec<_> = tr.star_paths.iter().map(|p| p[i]).collect();
                let b: Vec<_> = rc.star_paths.iter().map(|p| p[i]).collect();
                assert!(match_stars(&a, &b).1 < 1e-6, "two_s = {two_s}, step {i}");
            }
        }
    }

    #[test]
    fn spin_half_cone_berry_phase() {
        let d = cone(1.0, 0.8, 0.25);
        let s = cone_cyclic_state(1, &d, 1).unwrap();
        let tr = evolve_schrodinger(&s, &d, 4000).unwrap();
        let dec = decompose(&tr).unwrap();
        let omega = dec.solid_angles[0];
        assert!((wrap(dec.berry_total + 0.5 * omega)).abs() < 1e-5);
        assert!(dec.anomalous.abs() < 1e-5);
        assert!((dec.rigid + dec.anomalous_unwrapped - dec.berry_total).abs() < 1e-15);
    }

    #[test]
    fn coherent_cone_has_no_anomalous_phase() {
        let d = cone(1.0, 0.5, 0.3);
        for two_s in [2, 5, 8] {
            let s = cone_cyclic_state(two_s, &d, two_s).unwrap();
            let tr = evolve_schrodinger(&s, &d, 4000).unwrap();
            let dec = decompose(&tr).unwrap();
            let j = two_s as f64 / 2.0;
            let omega = dec.solid_angles[0];
            assert!(wrap(dec.berry_total + j * omega).abs() < 1e-4, "two_s = {two_s}");
            assert!(dec.anomalous.abs() < 1e-4);
            let bp = berry_phase(&tr).unwrap();
            assert!(wrap(bp.gamma - bp.gamma_from_dynamical).abs() < 1e-5);
        }
    }

    #[test]
    fn pole_and_equator_state_has_residual_pi_over_three() {
        let dirs = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
        let c = Constellation::from_directions(&dirs, DEFAULT_TOLERANCE, Convention::NorthAtZero).unwrap();
        let s = stars_to_state(&c).unwrap();
        let tr = evolve_schrodinger(&s, &constant_z(), 2000).unwrap();
        let dec = decompose(&tr).unwrap();
        // <Sz> = 2/3, so γ = 2π·2/3 mod 2π; rigid part -½(0 + 2π)
        assert!((wrap(dec.berry_total - 4.0 * PI / 3.0)).abs() < 1e-5);
        assert!((dec.anomalous - PI / 3.0).abs() < 1e-5);
        // r̂ = (n_eq - z)/√2 sweeps a cone and R̂·(r̂ × dr̂) = dt/√2
        assert!((dec.twists[0].2 - PI * 2f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn berry_phase_is_gauge_invariant_and_refinement_stable() {
        let d = cone(0.9, 1.1, 0.4);
        let s = random_state(3, 9);
        let coarse = evolve_schrodinger(&cone_cyclic_state(3, &d, 1).unwrap(), &d, 2000).unwrap();
        let fine = evolve_schrodinger(&cone_cyclic_state(3, &d, 1).unwrap(), &d, 4000).unwrap();
        let (a, b) = (berry_phase(&coarse).unwrap().gamma, berry_phase(&fine).unwrap().gamma);
        assert!(wrap(a - b).abs() < 1e-5);
        let mut gauged = coarse.clone();
        for (i, st) in gauged.states.iter_mut().enumerate() {
            let ph = C64::from_polar(1.0, (0.37 * i as f64).sin() * 3.0);
            *st = SpinState::new(3, st.amplitudes().iter().map(|x| x * ph).collect()).unwrap();
        }
        assert!(wrap(berry_phase(&gauged).unwrap().gamma - a).abs() < 1e-8);
        // a non-cyclic state does not close
        let open = evolve_schrodinger(&s, &d, 100).unwrap();
        assert!(matches!(berry_phase(&open), Err(Error::OpenLoop(_))));
    }

    #[test]
    fn degenerate_pair_has_zero_twist() {
        let dirs = [[0.0, 0.6, 0.8], [0.0, 0.6, 0.8], [0.0, 0.0, -1.0]];
        let c = Constellation::from_directions(&dirs, DEFAULT_TOLERANCE, Convention::NorthAtZero).unwrap();
        let tr = evolve_schrodinger(&stars_to_state(&c).unwrap(), &constant_z(), 500).unwrap();
        let dec = decompose(&tr).unwrap();
        let pair = dec.twists.iter().find(|(k, l, _)| chordal(tr.star_paths[*k][0], tr.star_paths[*l][0]) < 1e-6).unwrap();
        assert_eq!(pair.2, 0.0);
        assert!(!dec.gram_snapshots.is_empty());
    }

    #[test]
    fn nonlinear_drive_is_rejected_by_riccati() {
        let d = DriveField::Lmg { b: [0.0; 3], chi: 1.0, axis: [0.0, 0.0, 1.0], period: 1.0 };
        let c = stars_of(&SpinState::basis(2, 1).unwrap());
        assert_eq!(evolve_riccati(&c, &d, 10, Exec::Sequential), Err(Error::NonlinearDrive));
    }

    #[test]
    fn one_axis_twisting_squeezes() {
        let n = 20;
        let start = SpinState::coherent(n, [1.0, 0.0, 0.0]).unwrap();
        let d = DriveField::Lmg { b: [0.0; 3], chi: 1.0, axis: [0.0, 0.0, 1.0], period: 1.0 };
        let tr = evolve_schrodinger_until(&start, &d, 200, 0.4).unwrap();
        let (best_i, best) = tr
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (i, squeezing(s).unwrap()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert!(best < 1.0);
        assert!((best - 0.197_897_193_9).abs() < 1e-8, "{best} at t = {}", tr.times[best_i]);
    }

    #[test]
    fn records_cover_every_sample() {
        let tr = evolve_schrodinger(&random_state(2, 3), &constant_z(), 20).unwrap();
        let rec = trajectory_records(&tr);
        assert_eq!(rec.len(), 21);
        assert_eq!(rec[0].stars.len(), 2);
        assert_eq!(rec[0].omega, vec![0.0, 0.0]);
    }
}
