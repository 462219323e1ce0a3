//! Canned experiment builders (Gaussian beam, single slit, double slit),
//! the paraxial analytic reference, and front-level statistical
//! diagnostics.
//!
//! Trajectories depend only on the launch amplitude profile and momenta;
//! no notion of particle number enters anywhere in the engine.

use std::f64::consts::PI;

use crate::dynamics::{LaunchMode, Regime, Stepper, DEFAULT_DRIFT_LIMIT};
use crate::error::{Result, SimError};
use crate::exec::Exec;
use crate::front::{RayState, Wavefront};
use crate::potentials::PotentialField;
use crate::units::{make_unit_system, rayleigh_length, RegimeKind, UnitSystem};

/// Hard cap on the number of steps in one run.
pub const MAX_STEPS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Gaussian,
    SingleSlit,
    DoubleSlit,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Gaussian => "gaussian",
            ScenarioKind::SingleSlit => "single_slit",
            ScenarioKind::DoubleSlit => "double_slit",
        }
    }

    pub fn parse(s: &str) -> Option<ScenarioKind> {
        match s {
            "gaussian" => Some(ScenarioKind::Gaussian),
            "single_slit" => Some(ScenarioKind::SingleSlit),
            "double_slit" => Some(ScenarioKind::DoubleSlit),
            _ => None,
        }
    }
}

/// Full description of one run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub n_rays: usize,
    /// Front truncation half-width, in w0 units.
    pub half_width: f64,
    /// Propagation extent along z, in w0 units.
    pub z_max: f64,
    pub regime: Regime,
    pub lambda0_over_w0: f64,
    pub pc_over_rest_energy: Option<f64>,
    /// m0 = 0 relativistic run (c = 1).
    pub massless: bool,
    /// Slit full width a, in w0 units.
    pub slit_width: f64,
    /// Slit center separation d, in w0 units.
    pub slit_separation: f64,
    /// Super-Gaussian exponent of the slit edges (even, >= 2).
    pub edge_order: u32,
    /// Steps between stored snapshots.
    pub snapshot_every: usize,
    pub launch_mode: LaunchMode,
    pub potential: PotentialField,
    /// Multiplier on the automatic step-size rule.
    pub dt_safety: f64,
    /// Hard limit on |H - E| / E before a run aborts. Slit scenarios need a
    /// looser limit: rays at the amplitude floor carry a copied wave
    /// potential, so their Hamiltonian is not exactly conserved.
    pub drift_limit: f64,
    /// Fixed dt, bypassing the step-size rule (used for run-to-run
    /// comparisons that need identical time grids).
    pub dt_override: Option<f64>,
    /// Stop at this time instead of at z_max.
    pub t_max_override: Option<f64>,
    pub exec: Exec,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> ScenarioConfig {
        ScenarioConfig {
            scenario,
            n_rays: 201,
            half_width: 4.0,
            z_max: 1.0,
            regime: Regime::new(RegimeKind::NonRelativistic),
            lambda0_over_w0: 2e-4,
            pc_over_rest_energy: None,
            massless: false,
            slit_width: 2.0,
            slit_separation: 8.0,
            edge_order: 8,
            snapshot_every: 25,
            launch_mode: LaunchMode::MatchEnergy,
            potential: PotentialField::Free,
            dt_safety: 1.0,
            drift_limit: DEFAULT_DRIFT_LIMIT,
            dt_override: None,
            t_max_override: None,
            exec: Exec::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(SimError::Config(msg));
        if self.n_rays < 51 || self.n_rays % 2 == 0 {
            return fail(format!(
                "n_rays must be odd and >= 51, got {}",
                self.n_rays
            ));
        }
        if self.scenario == ScenarioKind::Gaussian && self.half_width < 3.0 {
            return fail(format!(
                "half_width must be >= 3 w0 for the gaussian scenario, got {}",
                self.half_width
            ));
        }
        if !(self.half_width > 0.0) {
            return fail(format!("half_width must be > 0, got {}", self.half_width));
        }
        if !(self.z_max > 0.0) {
            return fail(format!("z_max must be > 0, got {}", self.z_max));
        }
        if !(self.lambda0_over_w0 > 0.0) {
            return fail(format!(
                "lambda0_over_w0 must be > 0, got {}",
                self.lambda0_over_w0
            ));
        }
        if self.scenario != ScenarioKind::Gaussian && !(self.slit_width > 0.0) {
            return fail(format!("slit_width must be > 0, got {}", self.slit_width));
        }
        if self.scenario == ScenarioKind::DoubleSlit {
            if self.slit_separation <= self.slit_width {
                return fail(format!(
                    "slit separation {} must exceed slit width {}",
                    self.slit_separation, self.slit_width
                ));
            }
            if self.half_width < 0.5 * self.slit_separation + self.slit_width {
                return fail(format!(
                    "half_width {} does not cover the slits (need >= {})",
                    self.half_width,
                    0.5 * self.slit_separation + self.slit_width
                ));
            }
        }
        if self.edge_order < 2 || self.edge_order % 2 != 0 {
            return fail(format!(
                "edge_order must be even and >= 2, got {}",
                self.edge_order
            ));
        }
        if self.snapshot_every == 0 {
            return fail("snapshot_every must be >= 1".into());
        }
        if !(self.dt_safety > 0.0) {
            return fail(format!("dt_safety must be > 0, got {}", self.dt_safety));
        }
        if !(self.drift_limit > 0.0) {
            return fail(format!(
                "drift_limit must be > 0, got {}",
                self.drift_limit
            ));
        }
        Ok(())
    }

    pub fn unit_system(&self) -> Result<UnitSystem> {
        if self.massless {
            UnitSystem::massless(self.lambda0_over_w0)
        } else {
            make_unit_system(
                self.lambda0_over_w0,
                self.regime.kind,
                self.pc_over_rest_energy,
            )
        }
    }
}

/// Time-ordered snapshots of one run plus the launch data needed for
/// flux-weighted screen statistics.
#[derive(Debug, Clone)]
pub struct TrajectoryBundle {
    pub snapshots: Vec<Wavefront>,
    /// Per-tube launch flux R^2 |p| ds at z = 0.
    pub launch_flux: Vec<f64>,
    pub energy: f64,
    pub units: UnitSystem,
    pub scenario: ScenarioKind,
    pub dt: f64,
}

impl TrajectoryBundle {
    pub fn n_rays(&self) -> usize {
        self.snapshots.first().map_or(0, |f| f.len())
    }

    /// x of one ray at a given z, by quadratic interpolation along its
    /// stored path (z is monotone along a forward run).
    pub fn x_at_z(&self, ray: usize, z: f64) -> Result<f64> {
        let zs: Vec<f64> = self.snapshots.iter().map(|f| f.rays[ray].z).collect();
        let xs: Vec<f64> = self.snapshots.iter().map(|f| f.rays[ray].x).collect();
        interpolate_quadratic(&zs, &xs, z)
    }
}

/// Interpolates y(at) on monotone increasing samples via a local quadratic.
pub fn interpolate_quadratic(x: &[f64], y: &[f64], at: f64) -> Result<f64> {
    let n = x.len();
    if n < 3 || at < x[0] || at > x[n - 1] {
        return Err(SimError::Diagnostic(format!(
            "interpolation point {at} outside sampled range"
        )));
    }
    let k = x.partition_point(|&v| v < at).clamp(1, n - 2);
    let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    let l0 = (at - x1) * (at - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (at - x0) * (at - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (at - x0) * (at - x1) / ((x2 - x0) * (x2 - x1));
    Ok(y0 * l0 + y1 * l1 + y2 * l2)
}

/// Paraxial waist line x(z) = sqrt(w0^2 + (lambda0 z / (pi w0))^2),
/// positive branch.
pub fn gaussian_waist_reference(z: f64, u: &UnitSystem) -> f64 {
    let term = u.lambda0() * z / (std::f64::consts::PI * u.w0);
    (u.w0 * u.w0 + term * term).sqrt()
}

fn launch_amplitude(cfg: &ScenarioConfig, x: f64) -> f64 {
    let sg = |center: f64| {
        let t = (x - center) / (0.5 * cfg.slit_width);
        (-t.powi(cfg.edge_order as i32)).exp()
    };
    match cfg.scenario {
        ScenarioKind::Gaussian => (-x * x).exp(),
        ScenarioKind::SingleSlit => sg(0.0),
        ScenarioKind::DoubleSlit => sg(-0.5 * cfg.slit_separation) + sg(0.5 * cfg.slit_separation),
    }
}

/// Rays equispaced on x in [-half_width, half_width] at z = 0, p = (0, p0),
/// amplitude per scenario normalized to max 1.
pub fn build_launch_front(cfg: &ScenarioConfig, u: &UnitSystem) -> Result<Wavefront> {
    cfg.validate()?;
    let n = cfg.n_rays;
    let hw = cfg.half_width * u.w0;
    let mut rays: Vec<RayState> = (0..n)
        .map(|i| {
            let x = -hw + 2.0 * hw * i as f64 / (n - 1) as f64;
            RayState {
                x,
                z: 0.0,
                px: 0.0,
                pz: u.p0,
                r_amp: launch_amplitude(cfg, x),
                q: 0.0,
                h: 0.0,
            }
        })
        .collect();
    let max = rays.iter().map(|r| r.r_amp).fold(f64::NEG_INFINITY, f64::max);
    for r in &mut rays {
        r.r_amp /= max;
    }
    Ok(Wavefront { rays, t: 0.0 })
}

/// Longitudinal launch speed for the step-size rule.
fn launch_speed(u: &UnitSystem, regime: &Regime, energy: f64) -> f64 {
    match regime.kind {
        RegimeKind::NonRelativistic => u.p0 / u.mass,
        RegimeKind::Relativistic => u.c * u.c * u.p0 / energy,
        RegimeKind::Optics => u.c,
    }
}

/// Automatic step size: the transverse dynamics must resolve the front
/// spacing (estimated far-field transverse speed) and dt <= 1e-3 z_R / v_z.
fn auto_dt(cfg: &ScenarioConfig, u: &UnitSystem, energy: f64) -> f64 {
    let z_r = rayleigh_length(u);
    let v_z = launch_speed(u, &cfg.regime, energy);
    let dt_long = 1e-3 * z_r / v_z;
    let hbar_over_m = match cfg.regime.kind {
        RegimeKind::NonRelativistic => u.hbar / u.mass,
        RegimeKind::Relativistic => u.hbar * u.c * u.c / energy,
        RegimeKind::Optics => u.c / u.k0(),
    };
    let w_feature = match cfg.scenario {
        ScenarioKind::Gaussian => u.w0,
        _ => 0.5 * cfg.slit_width * u.w0,
    };
    // far-field spreading speed of the outermost rays, with safety margin
    let v_x_est = 4.0 * cfg.half_width * u.w0 * hbar_over_m / (w_feature * w_feature);
    let ds0 = 2.0 * cfg.half_width * u.w0 / (cfg.n_rays - 1) as f64;
    let dt_trans = 0.1 * ds0 / v_x_est;
    cfg.dt_safety * dt_long.min(dt_trans)
}

/// Runs a scenario to z_max (or t_max), snapshotting at the configured
/// cadence.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<TrajectoryBundle> {
    cfg.validate()?;
    let u = cfg.unit_system()?;
    let mut front = build_launch_front(cfg, &u)?;
    let mut stepper = Stepper::new(&u, &cfg.potential, cfg.regime);
    stepper.exec = cfg.exec;
    stepper.drift_limit = cfg.drift_limit;
    stepper.initialize(&mut front, cfg.launch_mode)?;
    let energy = stepper.energy;
    let dt = cfg.dt_override.unwrap_or_else(|| auto_dt(cfg, &u, energy));

    let launch_flux = {
        let ds = front.tube_widths();
        front
            .rays
            .iter()
            .zip(&ds)
            .map(|(r, &w)| r.r_amp * r.r_amp * r.p_norm() * w)
            .collect()
    };

    let center = front.len() / 2;
    let mut snapshots = vec![front.clone()];
    let mut steps: u64 = 0;
    loop {
        let done = match cfg.t_max_override {
            Some(t_max) => front.t >= t_max,
            None => front.rays[center].z >= cfg.z_max * u.w0,
        };
        if done {
            break;
        }
        if steps >= MAX_STEPS {
            return Err(SimError::Runaway(MAX_STEPS));
        }
        let (next, _report) = stepper.step(&front, dt)?;
        front = next;
        steps += 1;
        if steps % cfg.snapshot_every as u64 == 0 {
            snapshots.push(front.clone());
        }
    }
    if snapshots.last().map(|f| f.t) != Some(front.t) {
        snapshots.push(front);
    }
    Ok(TrajectoryBundle {
        snapshots,
        launch_flux,
        energy,
        units: u,
        scenario: cfg.scenario,
        dt,
    })
}

/// R^2-weighted uncertainty product dx * dpx / hbar over one front.
pub fn uncertainty_product(front: &Wavefront, u: &UnitSystem) -> Result<f64> {
    let ds = front.tube_widths();
    let weights: Vec<f64> = front
        .rays
        .iter()
        .zip(&ds)
        .map(|(r, &w)| r.r_amp * r.r_amp * w)
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(SimError::DegenerateFront(
            "all statistical weights vanish".into(),
        ));
    }
    let mean = |f: &dyn Fn(&RayState) -> f64| -> f64 {
        front
            .rays
            .iter()
            .zip(&weights)
            .map(|(r, &w)| w * f(r))
            .sum::<f64>()
            / total
    };
    let mx = mean(&|r| r.x);
    let mp = mean(&|r| r.px);
    let vx = mean(&|r| (r.x - mx) * (r.x - mx));
    let vp = mean(&|r| (r.px - mp) * (r.px - mp));
    Ok((vx.sqrt() * vp.sqrt()) / u.hbar)
}

/// Flux-weighted intensity histogram of ray positions at a screen.
pub fn screen_histogram(
    bundle: &TrajectoryBundle,
    z_screen: f64,
    n_bins: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = bundle.n_rays();
    let mut xs = Vec::with_capacity(n);
    for ray in 0..n {
        xs.push(bundle.x_at_z(ray, z_screen)?);
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(SimError::Diagnostic("degenerate screen extent".into()));
    }
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0.0; n_bins];
    for (x, &w) in xs.iter().zip(&bundle.launch_flux) {
        let b = (((x - lo) / width) as usize).min(n_bins - 1);
        counts[b] += w;
    }
    let centers: Vec<f64> = (0..n_bins)
        .map(|b| lo + (b as f64 + 0.5) * width)
        .collect();
    Ok((centers, counts))
}

/// Fringe spacing of the interference pattern on the screen at `z_screen`
/// (double-slit bundles only).
///
/// The intensity near the pattern center is cos²(πx/Λ) modulated by the
/// single-slit envelope ~exp(−2x²/W²), so the *measured* first side maximum
/// sits inward of the true fringe period Λ: at the peak,
/// θ·tan(θ) = −x₁²/(2σ²) with θ = π·x₁/Λ and σ the envelope standard
/// deviation. Both x₁ (offset of the side maxima adjacent to the central
/// one) and σ (flux variance of the whole screen) are measured from the
/// data, and the relation is inverted for Λ on θ ∈ (π/2, π). This removes
/// an envelope bias that would otherwise be several percent at any slit
/// separation wide enough to show three resolvable maxima.
///
/// Errors if fewer than 3 intensity maxima are resolvable.
pub fn fringe_spacing(bundle: &TrajectoryBundle, z_screen: f64) -> Result<f64> {
    if bundle.scenario != ScenarioKind::DoubleSlit {
        return Err(SimError::Diagnostic(format!(
            "fringe spacing is only defined for double_slit bundles, got {}",
            bundle.scenario.name()
        )));
    }
    let n = bundle.n_rays();
    let mut xs = Vec::with_capacity(n);
    for ray in 0..n {
        xs.push(bundle.x_at_z(ray, z_screen)?);
    }
    let w = &bundle.launch_flux;
    // per-ray intensity: launch flux over the local ray spacing (the
    // continuum screen density, free of binning artifacts)
    let dens: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            w[i] * (b - a) as f64 / (xs[b] - xs[a]).abs().max(f64::MIN_POSITIVE)
        })
        .collect();
    // light index-space smoothing so ray-level noise does not split peaks
    let mut sm = dens;
    for _ in 0..4 {
        let prev = sm.clone();
        for i in 1..n - 1 {
            sm[i] = 0.25 * (prev[i - 1] + 2.0 * prev[i] + prev[i + 1]);
        }
    }
    let dmax = sm.iter().cloned().fold(0.0f64, f64::max);
    if !(dmax > 0.0) {
        return Err(SimError::Diagnostic("all screen weights vanish".into()));
    }
    // local maxima above threshold, parabolically refined in x
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 1..n - 1 {
        if sm[i] >= sm[i - 1] && sm[i] > sm[i + 1] && sm[i] > 0.02 * dmax {
            let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
            let (y0, y1, y2) = (sm[i - 1], sm[i], sm[i + 1]);
            let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
            let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
            let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
            let xp = if a < 0.0 { -b / (2.0 * a) } else { x1 };
            peaks.push((xp, y1));
        }
    }
    // the central lobe can arrive split into two near-equal summits; merge
    // adjacent peaks that are both within 20% of the global maximum
    let mut j = 0;
    while j + 1 < peaks.len() {
        let (xa, ha) = peaks[j];
        let (xb, hb) = peaks[j + 1];
        if ha > 0.8 * dmax && hb > 0.8 * dmax {
            peaks[j] = ((xa * ha + xb * hb) / (ha + hb), ha.max(hb));
            peaks.remove(j + 1);
        } else {
            j += 1;
        }
    }
    if peaks.len() < 3 {
        return Err(SimError::Diagnostic(format!(
            "fewer than 3 resolvable maxima ({})",
            peaks.len()
        )));
    }
    // central maximum = the one nearest the flux centroid
    let wsum: f64 = w.iter().sum();
    let xc: f64 = xs.iter().zip(w).map(|(x, wi)| x * wi).sum::<f64>() / wsum;
    let ic = (0..peaks.len())
        .min_by(|&a, &b| {
            (peaks[a].0 - xc).abs().partial_cmp(&(peaks[b].0 - xc).abs()).unwrap()
        })
        .unwrap();
    if ic == 0 || ic + 1 == peaks.len() {
        return Err(SimError::Diagnostic(
            "no side maxima flank the central one".into(),
        ));
    }
    let x1 = 0.5 * ((peaks[ic].0 - peaks[ic - 1].0) + (peaks[ic + 1].0 - peaks[ic].0));
    let var: f64 =
        xs.iter().zip(w).map(|(x, wi)| wi * (x - xc) * (x - xc)).sum::<f64>() / wsum;
    // solve theta * tan(theta) = -x1^2 / (2 var) on (pi/2, pi) by bisection
    let target = -x1 * x1 / (2.0 * var);
    let (mut lo, mut hi) = (0.5 * PI + 1e-9, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.tan() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(PI * x1 / (0.5 * (lo + hi)))
}
