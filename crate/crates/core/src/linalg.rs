//! Small dense kernels: companion-matrix eigenvalues, optimal assignment,
//! and Hermitian helpers shared by the physics modules.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use num_complex::Complex64;

pub(crate) type C64 = Complex64;

/// Eigenvalues of the companion matrix of the monic polynomial
/// `z^n + p[n-1] z^(n-1) + ... + p[0]`.
///
/// The companion matrix is balanced by powers of two and then reduced by a
/// shifted complex QR iteration that works directly on its upper Hessenberg
/// form.
pub fn companion_eigenvalues(monic_tail: &[C64]) -> Vec<C64> {
    let n = monic_tail.len();
    match n {
        0 => return Vec::new(),
        1 => return vec![-monic_tail[0]],
        _ => {}
    }
    let mut h = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 1..n {
        h[i][i - 1] = C64::new(1.0, 0.0);
    }
    for (i, p) in monic_tail.iter().enumerate() {
        h[i][n - 1] = -p;
    }
    balance(&mut h);
    hessenberg_qr_eigenvalues(h)
}

/// Parlett–Reinsch balancing with radix-2 scaling.
fn balance(a: &mut [Vec<C64>]) {
    let n = a.len();
    const RADIX: f64 = 2.0;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].norm();
                    r += a[i][j].norm();
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
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[i][j] *= inv;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

fn givens(f: C64, g: C64) -> (f64, C64) {
    let fa = f.norm();
    let ga = g.norm();
    if ga == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if fa == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let rho = fa.hypot(ga);
    let c = fa / rho;
    let s = (f / fa) * g.conj() / rho;
    (c, s)
}

/// Shifted QR iteration on an upper Hessenberg matrix; returns all eigenvalues.
fn hessenberg_qr_eigenvalues(mut h: Vec<Vec<C64>>) -> Vec<C64> {
    let n = h.len();
    let eps = f64::EPSILON;
    let mut eig = vec![C64::new(0.0, 0.0); n];
    let mut hi = n as isize - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let max_total = 100 * n.max(1);
    let mut rot: Vec<(f64, C64)> = vec![(1.0, C64::new(0.0, 0.0)); n];

    while hi >= 0 {
        let hiu = hi as usize;
        if hiu == 0 {
            eig[0] = h[0][0];
            break;
        }
        // locate the start of the active unreduced block
        let mut lo = hiu;
        while lo > 0 {
            let sub = h[lo][lo - 1].norm();
            let mut scale = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
            if scale == 0.0 {
                scale = 1.0;
            }
            if sub <= eps * scale {
                h[lo][lo - 1] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hiu {
            eig[hiu] = h[hiu][hiu];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            // give up on convergence; report the current diagonal
            for k in 0..=hiu {
                eig[k] = h[k][k];
            }
            break;
        }

        // Wilkinson shift from the trailing 2x2 block
        let a = h[hiu - 1][hiu - 1];
        let b = h[hiu - 1][hiu];
        let c = h[hiu][hiu - 1];
        let d = h[hiu][hiu];
        let mut mu = {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        if iter % 11 == 10 {
            // exceptional shift
            mu = d + C64::new(h[hiu][hiu - 1].norm() * 0.75, h[hiu - 1][hiu.saturating_sub(2).max(lo)].norm() * 0.4375);
        }

        for k in lo..=hiu {
            h[k][k] -= mu;
        }
        for k in lo..hiu {
            let (cs, sn) = givens(h[k][k], h[k + 1][k]);
            rot[k] = (cs, sn);
            for j in k..=hiu {
                let x = h[k][j];
                let y = h[k + 1][j];
                h[k][j] = x * cs + sn * y;
                h[k + 1][j] = -sn.conj() * x + y * cs;
            }
        }
        for k in lo..hiu {
            let (cs, sn) = rot[k];
            let top = (k + 2).min(hiu);
            for i in lo..=top {
                let x = h[i][k];
                let y = h[i][k + 1];
                h[i][k] = x * cs + y * sn.conj();
                h[i][k + 1] = -x * sn + y * cs;
            }
        }
        for k in lo..=hiu {
            h[k][k] += mu;
        }
    }
    eig
}

/// Minimum-cost perfect assignment for a square cost matrix (Hungarian
/// algorithm, potentials form). Returns `assign[row] = column`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Unitary `exp(-i H dt)` for a Hermitian `H`.
pub fn unitary_step(h: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, -eig.eigenvalues[i] * dt)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Eigen-decomposition of a real symmetric 3x3 matrix, eigenvalues ascending.
pub fn sym3_eigen(m: &Matrix3<f64>) -> ([f64; 3], [[f64; 3]; 3]) {
    let eig = SymmetricEigen::new(*m);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = [
        eig.eigenvalues[idx[0]],
        eig.eigenvalues[idx[1]],
        eig.eigenvalues[idx[2]],
    ];
    let mut vecs = [[0.0; 3]; 3];
    for (slot, &k) in idx.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        vecs[slot] = [col[0], col[1], col[2]];
    }
    (vals, vecs)
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
