//! 1D wave-mechanics comparator: Crank-Nicolson evolution of psi(x, t) in a
//! hard-wall box, guidance velocities and the quantum potential extracted
//! from psi, Hamilton-Jacobi (Madelung) residuals, and trajectory tracing
//! along the guidance field.

use crate::error::{Result, SimError};
use crate::exec::Exec;
use crate::front::log_amplitude_laplacian;
use crate::units::UnitSystem;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Points where |psi| drops below this fraction of its max (or where the
/// phase turns by more than pi/2 over two cells) are treated as nodes.
pub const NODE_THRESHOLD: f64 = 1e-6;

/// Madelung residuals are only meaningful where the log-amplitude stencil
/// is well resolved; points below this fraction of max |psi| are skipped.
pub const RESIDUAL_FLOOR: f64 = 0.25;

/// Complex wave function sampled on a uniform grid including both wall
/// points, where psi is pinned to zero.
#[derive(Debug, Clone)]
pub struct WaveFunctionGrid {
    pub xs: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub t: f64,
}

impl WaveFunctionGrid {
    /// Builds a grid on [x0, x1] with `n` points (walls included) from a
    /// pointwise initializer; the wall values are forced to zero.
    pub fn from_fn(x0: f64, x1: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if n < 8 || !(x1 > x0) {
            return Err(SimError::Config(format!(
                "wave function grid needs >= 8 points on a positive interval, got {n} on [{x0}, {x1}]"
            )));
        }
        let dx = (x1 - x0) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| x0 + i as f64 * dx).collect();
        let mut psi: Vec<Complex64> = xs.iter().map(|&x| f(x)).collect();
        psi[0] = Complex64::ZERO;
        psi[n - 1] = Complex64::ZERO;
        Ok(WaveFunctionGrid { xs, psi, t: 0.0 })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn dx(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    /// Trapezoid norm integral of |psi|^2.
    pub fn norm(&self) -> f64 {
        let dx = self.dx();
        let mut acc = 0.0;
        for (i, p) in self.psi.iter().enumerate() {
            let w = if i == 0 || i == self.n() - 1 { 0.5 } else { 1.0 };
            acc += w * p.norm_sqr();
        }
        acc * dx
    }

    pub fn normalize(&mut self) {
        let s = self.norm().sqrt();
        for p in &mut self.psi {
            *p /= s;
        }
    }

    /// |psi|^2-weighted mean of a per-point function.
    pub fn density_mean(&self, f: impl Fn(f64) -> f64) -> f64 {
        let dx = self.dx();
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, p) in self.xs.iter().zip(&self.psi) {
            let w = p.norm_sqr();
            num += w * f(*x);
            den += w;
        }
        let _ = dx;
        num / den
    }
}

/// Advances psi by `steps` Crank-Nicolson steps of size `dt` under the
/// sampled potential `v` (same grid, walls included). The unitary Cayley
/// form preserves the norm to machine precision.
///
/// `escape_tol`: maximum probability allowed in the outer three cells at
/// each wall; crossing it aborts with a domain-escape error. Pass
/// `f64::INFINITY` for box states that legitimately touch the walls.
pub fn evolve_tdse(
    grid: &mut WaveFunctionGrid,
    v: &[f64],
    u: &UnitSystem,
    dt: f64,
    steps: usize,
    escape_tol: f64,
) -> Result<()> {
    let n = grid.n();
    if v.len() != n {
        return Err(SimError::Config(format!(
            "potential sampled on {} points, wave function on {n}",
            v.len()
        )));
    }
    let dx = grid.dx();
    let m = n - 2; // interior unknowns
    if m < 3 {
        return Err(SimError::Config("grid too small to evolve".into()));
    }
    // A psi' = B psi with A = I + i dt H / 2 hbar, B = conj coefficients
    let r = u.hbar * dt / (4.0 * u.mass * dx * dx);
    let off_a = Complex64::new(0.0, -r);
    let off_b = Complex64::new(0.0, r);
    let diag_a: Vec<Complex64> = (0..m)
        .map(|j| Complex64::new(1.0, 2.0 * r + dt * v[j + 1] / (2.0 * u.hbar)))
        .collect();
    let diag_b: Vec<Complex64> = diag_a.iter().map(|d| d.conj()).collect();

    let mut rhs = vec![Complex64::ZERO; m];
    let mut cp = vec![Complex64::ZERO; m];
    for _ in 0..steps {
        for j in 0..m {
            let left = if j > 0 { grid.psi[j] } else { Complex64::ZERO };
            let right = if j + 1 < m { grid.psi[j + 2] } else { Complex64::ZERO };
            rhs[j] = off_b * (left + right) + diag_b[j] * grid.psi[j + 1];
        }
        // Thomas solve of the constant tridiagonal system
        cp[0] = off_a / diag_a[0];
        rhs[0] /= diag_a[0];
        for j in 1..m {
            let denom = diag_a[j] - off_a * cp[j - 1];
            cp[j] = off_a / denom;
            rhs[j] = (rhs[j] - off_a * rhs[j - 1]) / denom;
        }
        for j in (0..m - 1).rev() {
            rhs[j] = rhs[j] - cp[j] * rhs[j + 1];
        }
        grid.psi[1..=m].copy_from_slice(&rhs);
        grid.t += dt;

        let edge: f64 = grid.psi[1..4]
            .iter()
            .chain(&grid.psi[n - 4..n - 1])
            .map(|p| p.norm_sqr())
            .sum::<f64>()
            * dx;
        if edge > escape_tol {
            return Err(SimError::DomainEscape { mass: edge, t: grid.t });
        }
    }
    Ok(())
}

/// Guidance velocity v = (hbar/m) dS/dx extracted from the phase difference
/// arg(psi_{j+1} / psi_{j-1}) / (2 dx) — exact for plane waves. Returns the
/// per-point velocity and a node mask; masked points carry velocity 0.
pub fn guidance_velocity(grid: &WaveFunctionGrid, u: &UnitSystem) -> (Vec<f64>, Vec<bool>) {
    let n = grid.n();
    let dx = grid.dx();
    let max = grid.psi.iter().map(|p| p.norm()).fold(0.0f64, f64::max);
    let floor = NODE_THRESHOLD * max;
    let mut v = vec![0.0; n];
    let mut mask = vec![true; n];
    for j in 1..n - 1 {
        let (a, b) = (grid.psi[j - 1], grid.psi[j + 1]);
        if grid.psi[j].norm() < floor || a.norm() < floor || b.norm() < floor {
            continue;
        }
        let w = b * a.conj();
        // a phase turn >= pi/2 over two cells means an unresolved node
        if w.re <= 0.0 {
            continue;
        }
        mask[j] = false;
        v[j] = u.hbar * w.arg() / (2.0 * u.mass * dx);
    }
    (v, mask)
}

/// Guidance velocity at an arbitrary position by linear interpolation;
/// errors at nodes and outside the box.
pub fn guidance_velocity_at(grid: &WaveFunctionGrid, u: &UnitSystem, x: f64) -> Result<f64> {
    let n = grid.n();
    if x < grid.xs[0] || x > grid.xs[n - 1] {
        return Err(SimError::DomainEscape { mass: f64::NAN, t: grid.t });
    }
    let (v, mask) = guidance_velocity(grid, u);
    let dx = grid.dx();
    let j = (((x - grid.xs[0]) / dx) as usize).min(n - 2);
    if mask[j] || mask[j + 1] {
        return Err(SimError::Node { x });
    }
    let t = (x - grid.xs[j]) / dx;
    Ok(v[j] * (1.0 - t) + v[j + 1] * t)
}

/// Quantum potential Q = -(hbar^2 / 2m) lap(|psi|) / |psi| on the grid,
/// with a node mask on which Q is meaningless (copied from neighbors by
/// the underlying kernel).
pub fn quantum_potential(
    grid: &WaveFunctionGrid,
    u: &UnitSystem,
    exec: Exec,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let r: Vec<f64> = grid.psi.iter().map(|p| p.norm()).collect();
    let max = r.iter().cloned().fold(0.0f64, f64::max);
    let (lap, _) = log_amplitude_laplacian(&grid.xs, &r, exec)?;
    let factor = -u.hbar * u.hbar / (2.0 * u.mass);
    let q: Vec<f64> = lap.iter().map(|&l| factor * l).collect();
    let mask: Vec<bool> = r.iter().map(|&a| a < NODE_THRESHOLD * max).collect();
    Ok((q, mask))
}

/// Max absolute residuals of the Madelung split of the evolved psi over a
/// time-ordered history of >= 3 uniformly spaced snapshots:
/// the continuity equation P_t + (P v)_x = 0 and the quantum
/// Hamilton-Jacobi equation S_t + (S_x)^2 / 2m + V + Q = 0, both
/// normalized by `energy` (the continuity residual additionally by
/// max P / hbar so the two are comparable).
///
/// Residuals are evaluated away from nodes; a node strictly inside the
/// support of psi (as opposed to the decaying wings) is an error.
pub fn madelung_residuals(
    history: &[WaveFunctionGrid],
    v: &[f64],
    u: &UnitSystem,
    energy: f64,
    exec: Exec,
) -> Result<(f64, f64)> {
    if history.len() < 3 {
        return Err(SimError::Config(
            "madelung residuals need >= 3 snapshots".into(),
        ));
    }
    let n = history[0].n();
    if history.iter().any(|g| g.n() != n) || v.len() != n {
        return Err(SimError::Config("madelung residual grids disagree".into()));
    }
    let dx = history[0].dx();
    let mut max_cont = 0.0f64;
    let mut max_hj = 0.0f64;
    for w3 in history.windows(3) {
        let (prev, cur, next) = (&w3[0], &w3[1], &w3[2]);
        let dt = 0.5 * (next.t - prev.t);
        if !(dt > 0.0) {
            return Err(SimError::Config(
                "madelung snapshots must be time-ordered".into(),
            ));
        }
        let (vel, vel_mask) = guidance_velocity(cur, u);
        let (q, q_mask) = quantum_potential(cur, u, exec)?;
        let masked: Vec<bool> = (0..n).map(|j| vel_mask[j] || q_mask[j]).collect();

        // wings touching the walls are fine; an interior node is not
        let lo = masked.iter().position(|&m| !m).ok_or_else(|| {
            SimError::DegenerateFront("node-dominated snapshot".into())
        })?;
        let hi = n - 1 - masked.iter().rev().position(|&m| !m).unwrap();
        if let Some(j) = (lo..=hi).find(|&j| masked[j]) {
            return Err(SimError::Node { x: cur.xs[j] });
        }

        let p_max = cur.psi.iter().map(|p| p.norm_sqr()).fold(0.0f64, f64::max);
        let amp_floor = RESIDUAL_FLOOR * p_max.sqrt();
        let dens = |g: &WaveFunctionGrid, j: usize| g.psi[j].norm_sqr();
        for j in lo + 1..hi {
            if cur.psi[j].norm() < amp_floor {
                continue;
            }
            // S_t via the same unwrapping-free phase-ratio trick
            let w = next.psi[j] * prev.psi[j].conj();
            if w.re <= 0.0 {
                continue;
            }
            let s_t = u.hbar * w.arg() / (2.0 * dt);
            let kinetic = 0.5 * u.mass * vel[j] * vel[j];
            max_hj = max_hj.max(((s_t + kinetic + v[j] + q[j]) / energy.abs()).abs());

            let p_t = (dens(next, j) - dens(prev, j)) / (2.0 * dt);
            let flux_x =
                (dens(cur, j + 1) * vel[j + 1] - dens(cur, j - 1) * vel[j - 1]) / (2.0 * dx);
            max_cont =
                max_cont.max(((p_t + flux_x) * u.hbar / (energy.abs() * p_max)).abs());
        }
    }
    Ok((max_cont, max_hj))
}

/// Traces trajectories through a time-ordered history of wave-function
/// snapshots with Heun (midpoint-averaged) steps along the guidance field.
/// Returns, per start, the positions at every snapshot time.
pub fn trace_bohm_trajectories(
    history: &[WaveFunctionGrid],
    u: &UnitSystem,
    starts: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if history.len() < 2 {
        return Err(SimError::Config("trajectory tracing needs >= 2 snapshots".into()));
    }
    let mut paths: Vec<Vec<f64>> = starts.iter().map(|&x| vec![x]).collect();
    for w in history.windows(2) {
        let dt = w[1].t - w[0].t;
        if !(dt > 0.0) {
            return Err(SimError::Config("snapshots must be strictly time-ordered".into()));
        }
        for path in &mut paths {
            let x = *path.last().unwrap();
            let k1 = guidance_velocity_at(&w[0], u, x)?;
            let k2 = guidance_velocity_at(&w[1], u, x + dt * k1)?;
            path.push(x + 0.5 * dt * (k1 + k2));
        }
    }
    Ok(paths)
}

/// One stationary state of the boxed Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenMode {
    pub energy: f64,
    /// Real mode profile on the full grid (walls included), normalized to
    /// unit trapezoid norm.
    pub psi: Vec<f64>,
}

/// Lowest `count` eigenmodes of H = -(hbar^2/2m) d2/dx2 + V with hard
/// walls, by dense symmetric diagonalization of the interior grid.
pub fn eigenmodes(
    xs: &[f64],
    v: &[f64],
    u: &UnitSystem,
    count: usize,
) -> Result<Vec<EigenMode>> {
    let n = xs.len();
    if v.len() != n || n < 8 {
        return Err(SimError::Config(format!(
            "eigenmode grid needs >= 8 matching points, got {n} and {}",
            v.len()
        )));
    }
    let m = n - 2;
    if m > 512 {
        return Err(SimError::Config(format!(
            "dense eigenmode solve limited to 512 interior points, got {m}"
        )));
    }
    if count == 0 || count > m {
        return Err(SimError::Config(format!(
            "requested {count} modes from a {m}-point interior grid"
        )));
    }
    let dx = xs[1] - xs[0];
    let k = u.hbar * u.hbar / (2.0 * u.mass * dx * dx);
    let mut h = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        h[(j, j)] = 2.0 * k + v[j + 1];
        if j + 1 < m {
            h[(j, j + 1)] = -k;
            h[(j + 1, j)] = -k;
        }
    }
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut modes = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        let col = eig.eigenvectors.column(idx);
        let mut psi = vec![0.0; n];
        for j in 0..m {
            psi[j + 1] = col[j];
        }
        let norm = (psi.iter().map(|p| p * p).sum::<f64>() * dx).sqrt();
        let sign = if psi[1] < 0.0 { -1.0 } else { 1.0 };
        for p in &mut psi {
            *p *= sign / norm;
        }
        modes.push(EigenMode {
            energy: eig.eigenvalues[idx],
            psi,
        });
    }
    Ok(modes)
}

/// Complex superposition of real modes with the given coefficients.
pub fn superpose(
    xs: &[f64],
    modes: &[&EigenMode],
    coeffs: &[Complex64],
) -> Result<WaveFunctionGrid> {
    if modes.is_empty() || modes.len() != coeffs.len() {
        return Err(SimError::Config(format!(
            "superposition of {} modes with {} coefficients",
            modes.len(),
            coeffs.len()
        )));
    }
    let n = xs.len();
    let mut psi = vec![Complex64::ZERO; n];
    for (mode, &c) in modes.iter().zip(coeffs) {
        if mode.psi.len() != n {
            return Err(SimError::Config("mode grid does not match".into()));
        }
        for (p, &m) in psi.iter_mut().zip(&mode.psi) {
            *p += c * m;
        }
    }
    let mut grid = WaveFunctionGrid {
        xs: xs.to_vec(),
        psi,
        t: 0.0,
    };
    grid.normalize();
    Ok(grid)
}
