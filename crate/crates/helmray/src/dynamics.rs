//! Leapfrog (velocity-Verlet) advancement of a wavefront under one of the
//! three exact Hamiltonian systems, with the wave-potential coupling force
//! applied perpendicular to each ray's momentum and the amplitude
//! re-transported through flux conservation at every step.

use crate::error::{Result, SimError};
use crate::exec::{map_indexed, Exec};
use crate::front::{
    log_amplitude_laplacian, transport_amplitude, transverse_gradient_on, FrontScalars, Wavefront,
};
use crate::potentials::PotentialField;
use crate::units::{RegimeKind, UnitSystem};

/// Regime selector plus the eikonal/classical switch.
#[derive(Debug, Clone, Copy)]
pub struct Regime {
    pub kind: RegimeKind,
    /// true forces the wave potential to zero: rays decouple and the system
    /// reduces to geometrical optics / classical mechanics.
    pub eikonal: bool,
    /// Scaling factor on the wave potential (1 = physical). Used to probe
    /// the eikonal limit continuously.
    pub q_scale: f64,
}

impl Regime {
    pub fn new(kind: RegimeKind) -> Regime {
        Regime {
            kind,
            eikonal: false,
            q_scale: 1.0,
        }
    }

    pub fn effective_scale(&self) -> f64 {
        if self.eikonal {
            0.0
        } else {
            self.q_scale
        }
    }
}

/// How launch momenta are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaunchMode {
    /// Per-ray |p| adjusted so that H = E exactly on the whole launch front
    /// (E fixed by the central ray carrying p0).
    MatchEnergy,
    /// All rays keep the uniform launch momentum; E is the central ray's
    /// kinetic + external energy, ignoring the wave potential.
    UniformMomentum,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    pub dt: f64,
    /// max over rays of |H - E| / |E| after the step.
    pub max_energy_residual: f64,
    /// max over rays of the relative |p| change within the step.
    pub max_speed_drift: f64,
    pub caustic_flag: bool,
}

/// Default hard limit on |H - E| / |E| before a run aborts.
pub const DEFAULT_DRIFT_LIMIT: f64 = 1e-4;

/// Coefficient of the grid-scale damping rate, in units of the local
/// (hbar/m) * |d ln R / ds| / (ray spacing).
///
/// The semi-discrete coupled-ray system is neutrally stable for smooth
/// fronts but linearly unstable at 3-5 ray wavelengths wherever the
/// log-amplitude slope u' = d(ln R)/ds is large (growth rate ~ 0.35
/// (hbar/m) |u'| / ds, seeded by roundoff near the front edges). The cure
/// must be scale-selective: a plain velocity diffusion strong enough to
/// kill the grid modes also erases physical velocity modulation (e.g. the
/// forming interference fringes of a slit front) over a long run. We damp
/// the thrice-high-pass-filtered velocity instead, F = -gamma m (I-S)^3 v
/// with S the 1-2-1 smoother along the front: the damping rate is
/// gamma sin^6(k h / 2), full strength at grid modes and ~gamma (k h / 2)^6
/// at resolved scales, so physical structure is untouched. The force is
/// projected perpendicular to each ray's momentum, so |p| stays exactly
/// conserved, and it vanishes identically whenever the transverse velocity
/// varies linearly along the front -- exact for the free Gaussian beam.
pub const GRID_DAMPING_COEFF: f64 = 8.0;

/// Coefficient of the tail strain-rate viscosity, in units of the global
/// (hbar/m) * (max front log-slope) * (mean ray spacing).
pub const TAIL_DAMPING_COEFF: f64 = 2.0;

/// Rays whose amplitude is below this fraction of the front maximum are
/// treated as structureless tail: they additionally get a plain strain-rate
/// viscosity (see [`Stepper::step`]'s force assembly), since the
/// scale-selective filter alone does not control the near-floor region
/// where the spacing is extremely nonuniform. The viscosity ramps in
/// log-linearly from zero at [`TAIL_RAMP_FRACTION`] down to full strength
/// here, so no ray sees a discontinuous force law.
pub const TAIL_AMPLITUDE_FRACTION: f64 = 1e-4;

/// Upper end of the tail-viscosity ramp (see [`TAIL_AMPLITUDE_FRACTION`]).
/// Interference minima stay brighter than this fraction in any resolvable
/// pattern, so physical structure is never tail-damped.
pub const TAIL_RAMP_FRACTION: f64 = 1e-2;

/// One-front integrator bound to a unit system, a potential and a regime.
pub struct Stepper<'a> {
    pub units: &'a UnitSystem,
    pub potential: &'a PotentialField,
    pub regime: Regime,
    /// Run energy, fixed at launch.
    pub energy: f64,
    pub drift_limit: f64,
    pub exec: Exec,
}

impl<'a> Stepper<'a> {
    pub fn new(units: &'a UnitSystem, potential: &'a PotentialField, regime: Regime) -> Self {
        Stepper {
            units,
            potential,
            regime,
            energy: f64::NAN,
            drift_limit: DEFAULT_DRIFT_LIMIT,
            exec: Exec::Auto,
        }
    }

    fn q_factor(&self) -> f64 {
        let u = self.units;
        match self.regime.kind {
            RegimeKind::Optics => -u.c / (2.0 * u.k0()),
            RegimeKind::NonRelativistic => -u.hbar * u.hbar / (2.0 * u.mass),
            // Eq-(19)-style factor with the run energy fixed at launch.
            RegimeKind::Relativistic => -u.hbar * u.hbar * u.c * u.c / (2.0 * self.energy),
        }
    }

    /// Scaled laplacian ratio (zeroed in eikonal mode) along the front.
    fn scaled_lap(&self, front: &Wavefront, s: &[f64]) -> Result<Vec<f64>> {
        let scale = self.regime.effective_scale();
        if scale == 0.0 {
            return Ok(vec![0.0; front.len()]);
        }
        let r = front.amplitudes();
        let (lap, _) = log_amplitude_laplacian(s, &r, self.exec)?;
        Ok(lap.into_iter().map(|l| scale * l).collect())
    }

    /// Assigns launch momenta and the run energy; fills q and h.
    ///
    /// Expects rays with positions, amplitudes and momentum directions set
    /// (typically p = (0, p0)).
    pub fn initialize(&mut self, front: &mut Wavefront, mode: LaunchMode) -> Result<()> {
        let n = front.len();
        if n == 0 {
            return Err(SimError::DegenerateFront("empty launch front".into()));
        }
        let u = self.units;
        let s = front.arclength();
        let lap = self.scaled_lap(front, &s)?;
        let center = n / 2;
        let v_c = self.potential.value(front.rays[center].x, front.rays[center].z)?;
        let hb_c = u.hbar * u.c;

        // Run energy from the central ray carrying p0.
        self.energy = match self.regime.kind {
            RegimeKind::Optics => u.c * u.k0() / 2.0,
            RegimeKind::NonRelativistic => {
                let q_c = -u.hbar * u.hbar / (2.0 * u.mass) * lap[center];
                let q_c = if mode == LaunchMode::MatchEnergy { q_c } else { 0.0 };
                u.p0 * u.p0 / (2.0 * u.mass) + v_c + q_c
            }
            RegimeKind::Relativistic => {
                let rest = u.mass * u.c * u.c;
                let mut radicand = (u.p0 * u.c).powi(2) + rest * rest;
                if mode == LaunchMode::MatchEnergy {
                    radicand -= hb_c * hb_c * lap[center];
                }
                v_c + radicand.sqrt()
            }
        };

        let q_factor = self.q_factor();
        for i in 0..n {
            let ray = &mut front.rays[i];
            let v_i = self.potential.value(ray.x, ray.z)?;
            ray.q = q_factor * lap[i];
            if mode == LaunchMode::MatchEnergy {
                let p_mag_sq = match self.regime.kind {
                    RegimeKind::NonRelativistic => {
                        2.0 * u.mass * (self.energy - v_i - ray.q)
                    }
                    RegimeKind::Relativistic => {
                        let rest = u.mass * u.c * u.c;
                        let e_v = self.energy - v_i;
                        (e_v * e_v - rest * rest + hb_c * hb_c * lap[i]) / (u.c * u.c)
                    }
                    RegimeKind::Optics => {
                        // dispersion D = 0: k^2 = (n k0)^2 - 2 k0 W / c
                        let n_i = 1.0 - v_i / u.energy;
                        if n_i <= 0.0 {
                            return Err(SimError::Evanescent {
                                ray: i,
                                n_squared: n_i * n_i.abs(),
                            });
                        }
                        let k0 = u.k0();
                        (n_i * k0).powi(2) - 2.0 * k0 * ray.q / u.c
                    }
                };
                if p_mag_sq <= 0.0 {
                    return Err(SimError::TurningPoint {
                        ray: i,
                        value: p_mag_sq,
                    });
                }
                let p_dir = ray.p_norm();
                if p_dir <= 0.0 {
                    return Err(SimError::DegenerateFront(format!(
                        "ray {i} launched with zero momentum"
                    )));
                }
                let scale = p_mag_sq.sqrt() / p_dir;
                ray.px *= scale;
                ray.pz *= scale;
            }
        }
        self.record_hamiltonians(front)?;
        Ok(())
    }

    /// Per-ray Hamiltonian, stored into `h`.
    fn record_hamiltonians(&self, front: &mut Wavefront) -> Result<()> {
        let u = self.units;
        for (i, ray) in front.rays.iter_mut().enumerate() {
            let v = self.potential.value(ray.x, ray.z)?;
            let p2 = ray.px * ray.px + ray.pz * ray.pz;
            ray.h = match self.regime.kind {
                RegimeKind::NonRelativistic => p2 / (2.0 * u.mass) + v + ray.q,
                RegimeKind::Relativistic => {
                    let rest = u.mass * u.c * u.c;
                    let radicand = p2 * u.c * u.c + rest * rest + 2.0 * self.energy * ray.q;
                    if radicand < 0.0 {
                        return Err(SimError::TurningPoint {
                            ray: i,
                            value: radicand,
                        });
                    }
                    v + radicand.sqrt()
                }
                RegimeKind::Optics => {
                    let k0 = u.k0();
                    let n_i = 1.0 - v / u.energy;
                    let d = u.c / (2.0 * k0) * (p2 - (n_i * k0).powi(2)) + ray.q;
                    d + u.c * k0 / 2.0
                }
            };
        }
        Ok(())
    }

    /// Wave-potential values and coupling force per ray on a front.
    /// The coupling force is (dQ/ds) n with n the in-plane unit vector
    /// perpendicular to the ray momentum, so it never changes |p|.
    fn forces(&self, front: &mut Wavefront) -> Result<Vec<(f64, f64)>> {
        let n = front.len();
        let s = front.arclength();
        let lap = self.scaled_lap(front, &s)?;
        let q_factor = self.q_factor();
        let q: Vec<f64> = lap.iter().map(|&l| q_factor * l).collect();
        let grad = if self.regime.effective_scale() == 0.0 {
            vec![0.0; n]
        } else {
            transverse_gradient_on(&s, &q)?
        };
        for (ray, &qi) in front.rays.iter_mut().zip(&q) {
            ray.q = qi;
        }

        // Front chord fixes the orientation of the perpendicular direction.
        let (cx, cz) = (
            front.rays[n - 1].x - front.rays[0].x,
            front.rays[n - 1].z - front.rays[0].z,
        );
        let u = self.units;
        let energy = self.energy;
        let rays = &front.rays;
        let potential = self.potential;
        let kind = self.regime.kind;
        let out: Vec<Result<(f64, f64)>> = map_indexed(self.exec, n, |i| {
            let ray = &rays[i];
            let (v, (gvx, gvz)) = potential.evaluate(ray.x, ray.z)?;
            let p = ray.p_norm();
            // perpendicular unit vector oriented along increasing s
            let (mut nx, mut nz) = (-ray.pz / p, ray.px / p);
            if nx * cx + nz * cz < 0.0 {
                nx = -nx;
                nz = -nz;
            }
            let g = grad[i];
            Ok(match kind {
                RegimeKind::NonRelativistic => (-gvx - g * nx, -gvz - g * nz),
                RegimeKind::Relativistic => {
                    let e_v = energy - v;
                    if e_v <= 0.0 {
                        return Err(SimError::TurningPoint { ray: i, value: e_v });
                    }
                    let amp = energy / e_v;
                    (-gvx - amp * g * nx, -gvz - amp * g * nz)
                }
                RegimeKind::Optics => {
                    let n_i = 1.0 - v / u.energy;
                    if n_i <= 0.0 {
                        return Err(SimError::Evanescent {
                            ray: i,
                            n_squared: n_i * n_i.abs(),
                        });
                    }
                    // dk/dt = (c k0 / 2) grad(n^2) - grad W
                    let pref = u.c * u.k0() * n_i / u.energy;
                    (-pref * gvx - g * nx, -pref * gvz - g * nz)
                }
            })
        });
        let mut forces: Vec<(f64, f64)> = out.into_iter().collect::<Result<_>>()?;
        if self.regime.effective_scale() != 0.0 {
            self.add_grid_damping(front, &s, &mut forces)?;
        }
        Ok(forces)
    }

    /// Adds the grid-scale damping force (see [`GRID_DAMPING_COEFF`]):
    /// the thrice-high-pass-filtered relative velocity along the front,
    /// applied perpendicular to each ray's momentum.
    fn add_grid_damping(
        &self,
        front: &Wavefront,
        s: &[f64],
        forces: &mut [(f64, f64)],
    ) -> Result<()> {
        let n = front.len();
        if n < 5 {
            return Ok(());
        }
        let u = self.units;
        let rays = &front.rays;

        let hbar_over_m = match self.regime.kind {
            RegimeKind::NonRelativistic => u.hbar / u.mass,
            RegimeKind::Relativistic => u.hbar * u.c * u.c / self.energy,
            RegimeKind::Optics => u.c / u.k0(),
        };
        // dp = m_eff dv relates the damping force to the filtered velocity.
        let m_eff = match self.regime.kind {
            RegimeKind::NonRelativistic => u.mass,
            RegimeKind::Relativistic => self.energy / (u.c * u.c),
            RegimeKind::Optics => u.hbar * u.k0() / u.c,
        };

        // Local damping rate from the instability's local growth rate:
        // gamma_i ~ |d ln R / ds| / h, using the larger of the two adjacent
        // gap slopes (amplitudes clamped at the floor).
        let r_max = rays.iter().map(|r| r.r_amp).fold(f64::NEG_INFINITY, f64::max);
        let floor = crate::front::AMPLITUDE_FLOOR * r_max;
        let mut gap_slope = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let a = rays[i].r_amp.max(floor);
            let b = rays[i + 1].r_amp.max(floor);
            gap_slope.push((b / a).ln() / (s[i + 1] - s[i]));
        }

        let mut vel = Vec::with_capacity(n);
        for (i, ray) in rays.iter().enumerate() {
            vel.push(self.velocity(i, ray.px, ray.pz, ray.x, ray.z)?);
        }
        // per-gap strain rate (rate of change of the gap length per length);
        // negative = the gap is compressing
        let mut strain = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let h = s[i + 1] - s[i];
            let (ex, ez) = (
                (rays[i + 1].x - rays[i].x) / h,
                (rays[i + 1].z - rays[i].z) / h,
            );
            let dvx = vel[i + 1].0 - vel[i].0;
            let dvz = vel[i + 1].1 - vel[i].1;
            strain.push((dvx * ex + dvz * ez) / h);
        }
        // d = (I - S)^2 v with S the 1-2-1 smoother in ray index; the
        // boundary rows of (I - S) are zero.
        let hp = |v: &[(f64, f64)]| -> Vec<(f64, f64)> {
            let mut out = vec![(0.0, 0.0); n];
            for i in 1..n - 1 {
                out[i] = (
                    0.25 * (2.0 * v[i].0 - v[i - 1].0 - v[i + 1].0),
                    0.25 * (2.0 * v[i].1 - v[i - 1].1 - v[i + 1].1),
                );
            }
            out
        };
        let d = hp(&hp(&hp(&vel)));

        let cf = GRID_DAMPING_COEFF;
        for i in 1..n - 1 {
            let h_local = 0.5 * (s[i + 1] - s[i - 1]);
            // An amplitude valley (log-slope changing sign from - to +) is a
            // physical feature: a dark fringe or the inter-slit gap, where
            // the velocity field genuinely kinks over a few rays. Damp it by
            // the weaker adjacent slope so the fringe structure survives;
            // monotone flanks (where the grid instability lives) get the
            // stronger one.
            let (sl, sr) = (gap_slope[i - 1], gap_slope[i]);
            let slope = if sl < 0.0 && sr > 0.0 {
                (-sl).min(sr)
            } else {
                sl.abs().max(sr.abs())
            };
            let gamma = cf * hbar_over_m * slope / h_local;
            if gamma == 0.0 {
                continue;
            }
            // remove the component along p so |p| is exactly conserved
            let ray = &rays[i];
            let p = ray.p_norm();
            let (px_hat, pz_hat) = (ray.px / p, ray.pz / p);
            let along = d[i].0 * px_hat + d[i].1 * pz_hat;
            let (dx, dz) = (d[i].0 - along * px_hat, d[i].1 - along * pz_hat);
            forces[i].0 -= gamma * m_eff * dx;
            forces[i].1 -= gamma * m_eff * dz;
        }

        // Near-floor tail rays carry no physical structure but develop the
        // worst log-slopes and the most nonuniform spacing, which the
        // index-space filter handles poorly. Give them a plain strain-rate
        // viscosity (diffusion of relative velocity along the front) strong
        // enough to suppress every unstable mode outright.
        let tail = TAIL_RAMP_FRACTION * r_max;
        if rays.iter().any(|r| r.r_amp < tail) {
            // log-linear ramp: 0 at TAIL_RAMP_FRACTION, 1 at
            // TAIL_AMPLITUDE_FRACTION and below
            let span = (TAIL_RAMP_FRACTION / TAIL_AMPLITUDE_FRACTION).ln();
            let weight = |r_amp: f64| -> f64 { ((tail / r_amp.max(f64::MIN_POSITIVE)).ln() / span).clamp(0.0, 1.0) };
            let slope_max = gap_slope.iter().map(|g| g.abs()).fold(0.0f64, f64::max);
            let h_mean = (s[n - 1] - s[0]) / (n - 1) as f64;
            let nu = TAIL_DAMPING_COEFF * hbar_over_m * slope_max * h_mean;
            for i in 0..n {
                let ray = &rays[i];
                let w = weight(ray.r_amp);
                if w == 0.0 {
                    continue;
                }
                // zero-flux ends: the missing outer strain is taken as 0
                let (lo, hi) = (
                    if i > 0 { strain[i - 1] } else { 0.0 },
                    if i < n - 1 { strain[i] } else { 0.0 },
                );
                let h = 0.5 * (s[(i + 1).min(n - 1)] - s[i.saturating_sub(1)]);
                let f = w * m_eff * nu * (hi - lo) / h;
                let p = ray.p_norm();
                // oriented along increasing s so the sign is diffusive
                let (ex, ez) = (
                    rays[(i + 1).min(n - 1)].x - rays[i.saturating_sub(1)].x,
                    rays[(i + 1).min(n - 1)].z - rays[i.saturating_sub(1)].z,
                );
                let (mut nx, mut nz) = (-ray.pz / p, ray.px / p);
                if nx * ex + nz * ez < 0.0 {
                    nx = -nx;
                    nz = -nz;
                }
                forces[i].0 += f * nx;
                forces[i].1 += f * nz;
            }
        }
        Ok(())
    }

    fn velocity(&self, ray_idx: usize, px: f64, pz: f64, x: f64, z: f64) -> Result<(f64, f64)> {
        let u = self.units;
        match self.regime.kind {
            RegimeKind::NonRelativistic => Ok((px / u.mass, pz / u.mass)),
            RegimeKind::Relativistic => {
                let v = self.potential.value(x, z)?;
                let e_v = self.energy - v;
                if e_v <= 0.0 {
                    return Err(SimError::TurningPoint {
                        ray: ray_idx,
                        value: e_v,
                    });
                }
                let f = u.c * u.c / e_v;
                Ok((f * px, f * pz))
            }
            RegimeKind::Optics => {
                let f = u.c / (u.hbar * u.k0());
                Ok((f * px, f * pz))
            }
        }
    }

    /// One leapfrog step: half kick, drift, amplitude transport, half kick
    /// with forces recomputed from the advanced front.
    pub fn step(&self, front: &Wavefront, dt: f64) -> Result<(Wavefront, StepReport)> {
        let n = front.len();
        let mut work = front.clone();
        let f0 = self.forces(&mut work)?;

        let p_start: Vec<f64> = work.rays.iter().map(|r| r.p_norm()).collect();

        // half kick + drift
        for i in 0..n {
            let ray = &mut work.rays[i];
            ray.px += 0.5 * dt * f0[i].0;
            ray.pz += 0.5 * dt * f0[i].1;
        }
        for i in 0..n {
            let (x, z) = (work.rays[i].x, work.rays[i].z);
            let (vx, vz) = self.velocity(i, work.rays[i].px, work.rays[i].pz, x, z)?;
            work.rays[i].x = x + vx * dt;
            work.rays[i].z = z + vz * dt;
        }
        work.t = front.t + dt;

        // flux-conserving amplitude transport (uses half-kicked momenta)
        let transported = transport_amplitude(front, &work)?;
        let p_half: Vec<f64> = work.rays.iter().map(|r| r.p_norm()).collect();
        for (ray, &r_new) in work.rays.iter_mut().zip(&transported.values) {
            ray.r_amp = r_new;
        }

        // closing half kick, then correct amplitudes for the final |p|
        let f1 = self.forces(&mut work)?;
        for i in 0..n {
            let ray = &mut work.rays[i];
            ray.px += 0.5 * dt * f1[i].0;
            ray.pz += 0.5 * dt * f1[i].1;
        }
        let mut max_speed_drift = 0.0f64;
        for i in 0..n {
            let p_final = work.rays[i].p_norm();
            work.rays[i].r_amp *= (p_half[i] / p_final).sqrt();
            max_speed_drift = max_speed_drift.max((p_final - p_start[i]).abs() / p_start[i]);
        }

        self.record_hamiltonians(&mut work)?;
        let mut max_energy_residual = 0.0f64;
        for ray in &work.rays {
            max_energy_residual =
                max_energy_residual.max((ray.h - self.energy).abs() / self.energy.abs());
        }
        if max_energy_residual > self.drift_limit {
            return Err(SimError::EnergyDrift {
                residual: max_energy_residual,
                limit: self.drift_limit,
                t: work.t,
            });
        }

        Ok((
            work,
            StepReport {
                dt,
                max_energy_residual,
                max_speed_drift,
                caustic_flag: false,
            },
        ))
    }

    /// Per-ray normalized Hamiltonian residual (H - E)/E (D/(c k0/2) in the
    /// optics regime). Uses the stored q.
    pub fn residuals(&self, front: &Wavefront) -> FrontScalars {
        FrontScalars {
            values: front
                .rays
                .iter()
                .map(|r| (r.h - self.energy) / self.energy.abs())
                .collect(),
        }
    }
}

/// Single non-relativistic leapfrog step with a fresh stepper whose run
/// energy is taken from the front's central ray.
pub fn step_nonrelativistic(
    front: &Wavefront,
    u: &UnitSystem,
    v: &PotentialField,
    dt: f64,
) -> Result<(Wavefront, StepReport)> {
    step_with(front, u, v, dt, RegimeKind::NonRelativistic)
}

pub fn step_relativistic(
    front: &Wavefront,
    u: &UnitSystem,
    v: &PotentialField,
    dt: f64,
) -> Result<(Wavefront, StepReport)> {
    step_with(front, u, v, dt, RegimeKind::Relativistic)
}

pub fn step_optics(
    front: &Wavefront,
    u: &UnitSystem,
    n: &PotentialField,
    dt: f64,
) -> Result<(Wavefront, StepReport)> {
    step_with(front, u, n, dt, RegimeKind::Optics)
}

fn step_with(
    front: &Wavefront,
    u: &UnitSystem,
    v: &PotentialField,
    dt: f64,
    kind: RegimeKind,
) -> Result<(Wavefront, StepReport)> {
    let mut stepper = Stepper::new(u, v, Regime::new(kind));
    stepper.energy = front.rays[front.len() / 2].h;
    stepper.step(front, dt)
}

/// Per-ray (H - E)/E on an already-evaluated front.
pub fn hamiltonian_residual(front: &Wavefront, energy: f64) -> FrontScalars {
    FrontScalars {
        values: front
            .rays
            .iter()
            .map(|r| (r.h - energy) / energy.abs())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::front::RayState;
    use crate::units::make_unit_system;

    fn gaussian_front(n: usize, half: f64, p0: f64) -> Wavefront {
        Wavefront {
            rays: (0..n)
                .map(|i| {
                    let x = -half + 2.0 * half * i as f64 / (n - 1) as f64;
                    RayState {
                        x,
                        z: 0.0,
                        px: 0.0,
                        pz: p0,
                        r_amp: (-x * x).exp(),
                        q: 0.0,
                        h: 0.0,
                    }
                })
                .collect(),
            t: 0.0,
        }
    }

    #[test]
    fn eikonal_free_rays_are_exactly_straight() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        let v = PotentialField::Free;
        let mut regime = Regime::new(RegimeKind::NonRelativistic);
        regime.eikonal = true;
        let mut stepper = Stepper::new(&u, &v, regime);
        let mut front = gaussian_front(51, 4.0, u.p0);
        let x0: Vec<f64> = front.rays.iter().map(|r| r.x).collect();
        stepper.initialize(&mut front, LaunchMode::MatchEnergy).unwrap();
        for _ in 0..50 {
            front = stepper.step(&front, 1e-4).unwrap().0;
        }
        for (ray, &x) in front.rays.iter().zip(&x0) {
            assert_eq!(ray.x, x);
            assert_eq!(ray.px, 0.0);
        }
    }

    #[test]
    fn launch_residual_is_zero() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        let v = PotentialField::Free;
        let mut stepper = Stepper::new(&u, &v, Regime::new(RegimeKind::NonRelativistic));
        let mut front = gaussian_front(201, 4.0, u.p0);
        stepper.initialize(&mut front, LaunchMode::MatchEnergy).unwrap();
        for r in stepper.residuals(&front).values {
            assert!(r.abs() <= 1e-12, "launch residual {r}");
        }
        // central ray actually carries p0
        assert!((front.rays[100].pz - u.p0).abs() / u.p0 < 1e-12);
    }

    #[test]
    fn central_ray_stays_on_axis() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        let v = PotentialField::Free;
        let mut stepper = Stepper::new(&u, &v, Regime::new(RegimeKind::NonRelativistic));
        let mut front = gaussian_front(101, 4.0, u.p0);
        stepper.initialize(&mut front, LaunchMode::MatchEnergy).unwrap();
        for _ in 0..200 {
            front = stepper.step(&front, 5e-4).unwrap().0;
        }
        assert!(front.rays[50].x.abs() < 1e-10);
    }

    #[test]
    fn momentum_magnitude_invariant_under_pure_wave_coupling() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        let v = PotentialField::Free;
        let mut stepper = Stepper::new(&u, &v, Regime::new(RegimeKind::NonRelativistic));
        let mut front = gaussian_front(101, 4.0, u.p0);
        stepper.initialize(&mut front, LaunchMode::MatchEnergy).unwrap();
        let p0: Vec<f64> = front.rays.iter().map(|r| r.p_norm()).collect();
        for _ in 0..300 {
            front = stepper.step(&front, 5e-4).unwrap().0;
        }
        for (ray, &p) in front.rays.iter().zip(&p0) {
            assert!((ray.p_norm() - p).abs() / p <= 1e-8);
        }
    }

    #[test]
    fn massless_rays_move_at_c() {
        let u = UnitSystem::massless(2e-4).unwrap();
        let v = PotentialField::Free;
        let mut stepper = Stepper::new(&u, &v, Regime::new(RegimeKind::Relativistic));
        let mut front = gaussian_front(101, 4.0, u.p0);
        stepper.initialize(&mut front, LaunchMode::UniformMomentum).unwrap();
        for step in 0..100 {
            front = stepper.step(&front, 1e-3 * u.p0 / u.c).unwrap().0;
            for (i, ray) in front.rays.iter().enumerate() {
                let (vx, vz) = stepper.velocity(i, ray.px, ray.pz, ray.x, ray.z).unwrap();
                let speed = vx.hypot(vz);
                assert!(
                    (speed - u.c).abs() / u.c <= 1e-10,
                    "step {step} ray {i}: speed {speed}"
                );
            }
        }
    }

    #[test]
    fn eikonal_reversibility() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        let v = PotentialField::Harmonic { kappa: 1e4, x0: 0.0 };
        let mut regime = Regime::new(RegimeKind::NonRelativistic);
        regime.eikonal = true;
        let mut stepper = Stepper::new(&u, &v, regime);
        stepper.drift_limit = 1.0;
        let mut front = gaussian_front(51, 4.0, u.p0);
        stepper.initialize(&mut front, LaunchMode::MatchEnergy).unwrap();
        let start = front.clone();
        let dt = 2e-4;
        let n_steps = 500;
        for _ in 0..n_steps {
            front = stepper.step(&front, dt).unwrap().0;
        }
        for _ in 0..n_steps {
            front = stepper.step(&front, -dt).unwrap().0;
        }
        for (a, b) in front.rays.iter().zip(&start.rays) {
            let scale = b.p_norm();
            assert!((a.x - b.x).abs() <= 1e-9 * b.x.abs().max(1.0), "{} vs {}", a.x, b.x);
            assert!((a.z - b.z).abs() <= 1e-9 * b.z.abs().max(1.0));
            assert!((a.px - b.px).abs() <= 1e-9 * scale);
            assert!((a.pz - b.pz).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn optics_free_rays_straight_at_c() {
        let u = make_unit_system(2e-4, RegimeKind::Optics, None).unwrap();
        let v = PotentialField::Free;
        let mut regime = Regime::new(RegimeKind::Optics);
        regime.eikonal = true;
        let mut stepper = Stepper::new(&u, &v, regime);
        let mut front = gaussian_front(51, 4.0, u.p0);
        stepper.initialize(&mut front, LaunchMode::MatchEnergy).unwrap();
        let dt = 0.5;
        let (next, _) = stepper.step(&front, dt).unwrap();
        for (a, b) in next.rays.iter().zip(&front.rays) {
            assert!((a.z - b.z - u.c * dt).abs() < 1e-12 * u.c * dt);
            assert_eq!(a.x, b.x);
        }
    }

    #[test]
    fn energy_drift_guard_trips() {
        let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None).unwrap();
        let v = PotentialField::Free;
        let mut stepper = Stepper::new(&u, &v, Regime::new(RegimeKind::NonRelativistic));
        stepper.drift_limit = 1e-18; // absurd limit: first step must trip it
        let mut front = gaussian_front(101, 4.0, u.p0);
        stepper.initialize(&mut front, LaunchMode::MatchEnergy).unwrap();
        let mut tripped = false;
        let mut f = front;
        for _ in 0..50 {
            match stepper.step(&f, 5e-4) {
                Ok((next, _)) => f = next,
                Err(SimError::EnergyDrift { .. }) => {
                    tripped = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(tripped);
    }
}
