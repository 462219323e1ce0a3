//! End-to-end acceptance suite.
//!
//! Each numbered criterion prints exactly one `pass`/`FAIL` line with the
//! measured figure of merit; the test panics at the end if any criterion
//! failed, so a full report is always printed first. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines on
//! success too.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;

use helmray::bohm::{
    eigenmodes, evolve_tdse, guidance_velocity, quantum_potential, superpose,
    trace_bohm_trajectories, WaveFunctionGrid,
};
use helmray::csvio::write_trajectories;
use helmray::potentials::PotentialField;
use helmray::scenarios::{
    build_launch_front, fringe_spacing, gaussian_waist_reference, run_scenario,
    uncertainty_product, ScenarioConfig, ScenarioKind, TrajectoryBundle,
};
use helmray::units::{make_unit_system, rayleigh_length, RegimeKind};
use helmray::dynamics::LaunchMode;
use helmray::Exec;

type Check = Result<String, String>;

/// Rayleigh length in w0 units for the standard lambda0/w0 = 2e-4 system.
fn zr_w0() -> f64 {
    PI / 2e-4
}

/// Canonical free Gaussian beam integrated to 3 z_R (criteria 1, 2, 6).
fn canonical_gaussian() -> TrajectoryBundle {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
    cfg.z_max = 3.0 * zr_w0();
    cfg.snapshot_every = 200;
    run_scenario(&cfg).expect("canonical gaussian run failed")
}

/// Criterion 1: energy conservation on the canonical Gaussian run.
fn c1_energy(bundle: &TrajectoryBundle) -> Check {
    let drift = bundle
        .snapshots
        .iter()
        .flat_map(|f| f.rays.iter())
        .map(|r| ((r.h - bundle.energy) / bundle.energy).abs())
        .fold(0.0f64, f64::max);
    let line = format!("max |H - E| / E = {drift:.2e} over 3 z_R (tolerance 1e-6)");
    if drift <= 1e-6 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Criterion 2: the rays launched at +-w0 follow the analytic Gaussian-beam
/// waist line within 1% out to 3 z_R.
fn c2_waist(bundle: &TrajectoryBundle) -> Check {
    let u = &bundle.units;
    let launch = &bundle.snapshots[0];
    let mut worst = 0.0f64;
    for sign in [1.0, -1.0] {
        let i = (0..bundle.n_rays())
            .find(|&i| (launch.rays[i].x - sign * u.w0).abs() < 1e-9 * u.w0)
            .expect("no ray launched at +-w0");
        for k in 1..=60 {
            let z = 3.0 * rayleigh_length(u) * k as f64 / 60.0;
            let x = match bundle.x_at_z(i, z) {
                Ok(x) => x,
                Err(e) => return Err(format!("waist sampling failed: {e}")),
            };
            let reference = sign * gaussian_waist_reference(z, u);
            worst = worst.max(((x - reference) / reference).abs());
        }
    }
    let line = format!("waist-line max rel err (+-w0 rays, 0..3 z_R) = {worst:.2e} (tolerance 1e-2)");
    if worst <= 1e-2 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Criterion 3: scaling the wave potential by q makes the maximum deviation
/// from straight rays decrease monotonically, exactly 0 at q = 0.
fn c3_eikonal() -> Check {
    let mut devs = Vec::new();
    for &q in &[1.0, 0.1, 0.01, 0.0] {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
        cfg.n_rays = 101;
        cfg.z_max = zr_w0();
        cfg.snapshot_every = 200;
        cfg.regime.q_scale = q;
        let bundle = match run_scenario(&cfg) {
            Ok(b) => b,
            Err(e) => return Err(format!("q = {q} run failed: {e}")),
        };
        let launch_x: Vec<f64> = bundle.snapshots[0].rays.iter().map(|r| r.x).collect();
        let dev = bundle
            .snapshots
            .iter()
            .flat_map(|f| f.rays.iter().zip(&launch_x))
            .map(|(r, &x0)| (r.x - x0).abs())
            .fold(0.0f64, f64::max);
        devs.push(dev);
    }
    let monotone = devs.windows(2).all(|w| w[0] > w[1]);
    let line = format!(
        "straight-ray deviation for q = 1, 0.1, 0.01, 0: {:.3e}, {:.3e}, {:.3e}, {:.1e}",
        devs[0], devs[1], devs[2], devs[3]
    );
    if monotone && devs[3] == 0.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Criterion 4: halving pc/m0c^2 shrinks the relativistic-vs-nonrelativistic
/// trajectory gap by ~4x, and a massless free run moves at speed c.
fn c4_relativistic() -> Check {
    let dt = 2.5e-4;
    let t_max = 0.5; // ~1 z_R of propagation at v_z ~ p0/m
    let run = |kind: RegimeKind, eps: Option<f64>| -> Result<TrajectoryBundle, String> {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
        cfg.n_rays = 101;
        cfg.z_max = 2.0 * zr_w0(); // not reached; t_max stops the run
        cfg.regime.kind = kind;
        cfg.pc_over_rest_energy = eps;
        cfg.dt_override = Some(dt);
        cfg.t_max_override = Some(t_max);
        cfg.snapshot_every = 500;
        run_scenario(&cfg).map_err(|e| format!("{} eps {eps:?} run failed: {e}", kind.name()))
    };
    let nonrel = run(RegimeKind::NonRelativistic, None)?;
    let gap = |eps: f64| -> Result<f64, String> {
        let rel = run(RegimeKind::Relativistic, Some(eps))?;
        let (a, b) = (
            rel.snapshots.last().unwrap(),
            nonrel.snapshots.last().unwrap(),
        );
        Ok(a.rays
            .iter()
            .zip(&b.rays)
            .map(|(r, s)| (r.x - s.x).abs())
            .fold(0.0f64, f64::max))
    };
    let (g1, g2) = (gap(0.1)?, gap(0.05)?);
    let ratio = g1 / g2;

    // massless free run: every ray moves at exactly c
    let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
    cfg.n_rays = 101;
    cfg.massless = true;
    cfg.regime.kind = RegimeKind::Relativistic;
    cfg.z_max = 0.2 * zr_w0();
    // uniform launch momenta keep |p| = E/c exactly; an energy-matched
    // launch folds the wave-potential dispersion into |p| at the front
    // edges, which is real physics rather than a speed error. Per-step
    // snapshots, because coarser chords under-measure a curving path.
    cfg.launch_mode = LaunchMode::UniformMomentum;
    cfg.snapshot_every = 1;
    let m = run_scenario(&cfg).map_err(|e| format!("massless run failed: {e}"))?;
    let c = m.units.c;
    let mut speed_err = 0.0f64;
    for ray in 0..m.n_rays() {
        let mut path = 0.0;
        for w in m.snapshots.windows(2) {
            let (a, b) = (&w[0].rays[ray], &w[1].rays[ray]);
            path += ((b.x - a.x).powi(2) + (b.z - a.z).powi(2)).sqrt();
        }
        let t_total = m.snapshots.last().unwrap().t - m.snapshots[0].t;
        speed_err = speed_err.max((path / t_total / c - 1.0).abs());
    }
    let line = format!(
        "gap(eps=0.1)/gap(eps=0.05) = {ratio:.2} (window [3, 5]); massless |v/c - 1| = {speed_err:.1e} (tolerance 1e-10)"
    );
    if (3.0..=5.0).contains(&ratio) && speed_err <= 1e-10 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Criterion 5: a massless relativistic run and an optics run with
/// n = 1 - V/E trace geometrically identical trajectories.
fn c5_massless_optics() -> Check {
    let lambda = 2e-3;
    let z_max = 0.5 * PI / lambda; // 0.5 z_R in w0 units
    let run = |massless: bool| -> Result<TrajectoryBundle, String> {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
        cfg.lambda0_over_w0 = lambda;
        cfg.n_rays = 101;
        cfg.z_max = z_max;
        // dense snapshots: the geometric comparison interpolates x(z), and
        // the ramp-bent paths need fine sampling for that to be faithful
        cfg.snapshot_every = 2;
        // energy-matched launch: the two dispersion relations share the
        // level set |p|^2 = (k0 (1 - V/E))^2 + lap, and their ray paths
        // coincide exactly on it (off-shell they differ at order V/E)
        cfg.launch_mode = LaunchMode::MatchEnergy;
        // the two integrations advance different (shell-equivalent)
        // Hamiltonians, so their discrete paths differ at O(dt^2); a small
        // shared step keeps that below the geometric tolerance
        cfg.dt_safety = 0.05;
        cfg.potential = PotentialField::LinearRamp { gx: 0.1, gz: 0.0 };
        if massless {
            cfg.massless = true;
            cfg.regime.kind = RegimeKind::Relativistic;
        } else {
            cfg.regime.kind = RegimeKind::Optics;
        }
        run_scenario(&cfg).map_err(|e| format!("{} run failed: {e}", if massless { "massless" } else { "optics" }))
    };
    let (opt, mass) = (run(false)?, run(true)?);
    let z_end = opt
        .snapshots
        .last()
        .unwrap()
        .rays
        .iter()
        .map(|r| r.z)
        .fold(f64::INFINITY, f64::min)
        .min(
            mass.snapshots
                .last()
                .unwrap()
                .rays
                .iter()
                .map(|r| r.z)
                .fold(f64::INFINITY, f64::min),
        );
    let w0 = opt.units.w0;
    let mut worst = 0.0f64;
    for ray in 0..opt.n_rays() {
        for k in 1..=20 {
            let z = z_end * k as f64 / 20.0;
            let (a, b) = match (opt.x_at_z(ray, z), mass.x_at_z(ray, z)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Err("trajectory sampling failed".into()),
            };
            worst = worst.max((a - b).abs() / (w0 + b.abs()));
        }
    }
    let line =
        format!("massless-vs-optics max trajectory gap = {worst:.1e} relative (tolerance 1e-6)");
    if worst <= 1e-6 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Criterion 6: uncertainty product 0 at launch, >= 1 hbar beyond 2.5 z_R,
/// and doubling 1.5 z_R -> 3 z_R doubles it (paraxial oracle).
fn c6_uncertainty(bundle: &TrajectoryBundle) -> Check {
    let u = &bundle.units;
    let z_r = rayleigh_length(u);
    let center = bundle.n_rays() / 2;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for f in &bundle.snapshots {
        let p = match uncertainty_product(f, u) {
            Ok(p) => p,
            Err(e) => return Err(format!("uncertainty product failed: {e}")),
        };
        samples.push((f.rays[center].z, p));
    }
    let at = |z: f64| -> f64 {
        let i = samples.partition_point(|&(zs, _)| zs < z).clamp(1, samples.len() - 1);
        let ((z0, p0), (z1, p1)) = (samples[i - 1], samples[i]);
        p0 + (p1 - p0) * (z - z0) / (z1 - z0)
    };
    let p_launch = samples[0].1;
    let (p15, p25, p30) = (at(1.5 * z_r), at(2.5 * z_r), at(3.0 * z_r));
    let ratio = p30 / p15;
    let line = format!(
        "product = {p_launch} at z=0, {p25:.2} at 2.5 z_R, {p30:.2} at 3 z_R; ratio 3 z_R / 1.5 z_R = {ratio:.3} (window [1.8, 2.2])"
    );
    if p_launch == 0.0 && p25 >= 1.0 && p30 >= 1.0 && (1.8..=2.2).contains(&ratio) {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Criterion 7: double-slit fringe spacing matches the Fraunhofer oracle
/// lambda0 z / d within 5%, and doubling d halves it at the same screen.
fn c7_double_slit() -> Check {
    let z_max = 8.0 * zr_w0();
    let run = |a: f64, d: f64, hw: f64| -> Result<(f64, f64), String> {
        let mut cfg = ScenarioConfig::new(ScenarioKind::DoubleSlit);
        cfg.slit_width = a;
        cfg.slit_separation = d;
        cfg.half_width = hw;
        cfg.n_rays = 201;
        cfg.z_max = z_max;
        cfg.edge_order = 2;
        cfg.dt_safety = 0.1;
        cfg.snapshot_every = 100;
        // rays at the amplitude floor carry a copied wave potential, so the
        // per-step residual guard must stand down for slit fronts; the
        // criterion itself checks the physics of the resolved pattern
        cfg.drift_limit = 1e12;
        let bundle =
            run_scenario(&cfg).map_err(|e| format!("double slit d = {d} failed: {e}"))?;
        let u = &bundle.units;
        let z_screen = 0.999 * z_max * u.w0;
        let spacing = fringe_spacing(&bundle, z_screen)
            .map_err(|e| format!("fringe spacing d = {d} failed: {e}"))?;
        let oracle = u.lambda0() * z_screen / (d * u.w0);
        Ok((spacing, oracle))
    };
    // both runs at the same screen; the doubled geometry scales the slit
    // width along with the separation (the oracle does not depend on a)
    let (base, doubled) = match (run(2.0, 3.0, 5.5), run(4.0, 6.0, 11.0)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let rel = base.0 / base.1 - 1.0;
    let ratio = base.0 / doubled.0;
    let line = format!(
        "fringe spacing {:.3} vs lambda0 z/d {:.3} ({:+.2}%, tolerance 5%); doubling d: spacing ratio {ratio:.3} (window [1.8, 2.2])",
        base.0,
        base.1,
        100.0 * rel
    );
    if rel.abs() <= 0.05 && (1.8..=2.2).contains(&ratio) {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Criterion 8: the 1D comparator suite.
fn c8_comparator() -> Check {
    let t0 = Instant::now();
    let u = make_unit_system(2e-4, RegimeKind::NonRelativistic, None)
        .map_err(|e| e.to_string())?;
    let mut notes: Vec<String> = Vec::new();
    let mut fails: Vec<String> = Vec::new();
    fn check(notes: &mut Vec<String>, fails: &mut Vec<String>, name: &str, value: f64, tol: f64) {
        if value <= tol {
            notes.push(format!("{name} {value:.1e}"));
        } else {
            fails.push(format!("{name} {value:.1e} > {tol:.0e}"));
        }
    }

    // free Gaussian packet: norm conservation, analytic spreading law, and
    // non-crossing guidance trajectories along its history
    let sigma0 = 1.0;
    let mut g = WaveFunctionGrid::from_fn(-20.0, 20.0, 1025, |x| {
        Complex64::new((-x * x / (4.0 * sigma0 * sigma0)).exp(), 0.0)
    })
    .map_err(|e| e.to_string())?;
    g.normalize();
    let v = vec![0.0; g.n()];
    let dt = 1e-3;
    let mut history = vec![g.clone()];
    for _ in 0..8 {
        evolve_tdse(&mut g, &v, &u, dt, 250, 1e-6).map_err(|e| e.to_string())?;
        history.push(g.clone());
    }
    check(&mut notes, &mut fails, "norm drift", (g.norm() - 1.0).abs(), 1e-8);
    let t = g.t;
    let mx = g.density_mean(|x| x);
    let var = g.density_mean(|x| (x - mx) * (x - mx));
    let expect =
        sigma0 * sigma0 * (1.0 + (u.hbar * t / (2.0 * u.mass * sigma0 * sigma0)).powi(2));
    check(&mut notes, &mut fails, "spreading err", ((var - expect) / expect).abs(), 1e-2);
    let starts = [-2.0, -1.0, -0.3, 0.3, 1.0, 2.0];
    match trace_bohm_trajectories(&history, &u, &starts) {
        Ok(paths) => {
            let ordered = (0..history.len())
                .all(|k| paths.windows(2).all(|w| w[0][k] < w[1][k]));
            if ordered {
                notes.push("paths ordered".into());
            } else {
                fails.push("guidance trajectories crossed".into());
            }
        }
        Err(e) => fails.push(format!("tracing failed: {e}")),
    }

    // stationary eigenmode: guidance trajectories are static
    let l = 1.0;
    let n = 258;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * l / (n - 1) as f64).collect();
    let vbox = vec![0.0; n];
    let modes = eigenmodes(&xs, &vbox, &u, 1).map_err(|e| e.to_string())?;
    let mut gm = superpose(&xs, &[&modes[0]], &[Complex64::new(1.0, 0.0)])
        .map_err(|e| e.to_string())?;
    let mut mode_hist = vec![gm.clone()];
    for _ in 0..40 {
        evolve_tdse(&mut gm, &vbox, &u, 5e-4, 1, f64::INFINITY).map_err(|e| e.to_string())?;
        mode_hist.push(gm.clone());
    }
    match trace_bohm_trajectories(&mode_hist, &u, &[0.25, 0.5, 0.75]) {
        Ok(paths) => {
            let drift = paths
                .iter()
                .map(|p| (p.last().unwrap() - p[0]).abs())
                .fold(0.0f64, f64::max);
            check(&mut notes, &mut fails, "stationary drift", drift / l, 1e-6);
        }
        Err(e) => fails.push(format!("stationary tracing failed: {e}")),
    }

    // plane wave: guidance velocity = hbar k / m
    let kk = 2.0 * PI * 16.0;
    let gp = WaveFunctionGrid::from_fn(0.0, 1.0, 1024, |x| Complex64::from_polar(1.0, kk * x))
        .map_err(|e| e.to_string())?;
    let (vel, mask) = guidance_velocity(&gp, &u);
    let vexp = u.hbar * kk / u.mass;
    let verr = (2..1022)
        .filter(|&j| !mask[j])
        .map(|j| ((vel[j] - vexp) / vexp).abs())
        .fold(0.0f64, f64::max);
    check(&mut notes, &mut fails, "plane-wave guidance err", verr, 1e-6);

    // mono-energetic profile: the Bohmian quantum potential equals the
    // wave potential -(hbar^2/2m) lap(R)/R pointwise (analytic Gaussian
    // reference, for which the log-amplitude stencil is exact)
    let gq = WaveFunctionGrid::from_fn(-5.0, 5.0, 1001, |x| Complex64::new((-x * x).exp(), 0.0))
        .map_err(|e| e.to_string())?;
    let (q, qmask) = quantum_potential(&gq, &u, Exec::Sequential).map_err(|e| e.to_string())?;
    let factor = -u.hbar * u.hbar / (2.0 * u.mass);
    let qscale = (factor * 2.0).abs(); // lap(ln R) term at the peak
    let qerr = gq
        .xs
        .iter()
        .zip(&q)
        .zip(&qmask)
        .filter(|&(_, &m)| !m)
        .map(|((x, qi), _)| (qi - factor * (4.0 * x * x - 2.0)).abs() / qscale)
        .fold(0.0f64, f64::max);
    check(&mut notes, &mut fails, "Q vs wave potential", qerr, 1e-8);

    let elapsed = t0.elapsed().as_secs_f64();
    if elapsed > 120.0 {
        fails.push(format!("suite took {elapsed:.0}s > 120s"));
    }
    let line = format!("{} [{elapsed:.1}s]", notes.join(", "));
    if fails.is_empty() {
        Ok(line)
    } else {
        Err(fails.join("; "))
    }
}

/// Criterion 9: re-running a config byte-identically reproduces the CSV.
fn c9_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run_once = |path: &std::path::Path| -> Result<Vec<u8>, String> {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
        cfg.z_max = 0.5 * zr_w0();
        cfg.snapshot_every = 100;
        cfg.exec = Exec::Parallel;
        let bundle = run_scenario(&cfg).map_err(|e| e.to_string())?;
        write_trajectories(&bundle, path).map_err(|e| e.to_string())?;
        std::fs::read(path).map_err(|e| e.to_string())
    };
    let a = run_once(&dir.path().join("a.csv"))?;
    let b = run_once(&dir.path().join("b.csv"))?;
    let line = format!("two parallel runs, {} bytes each, identical = {}", a.len(), a == b);
    if a == b && !a.is_empty() {
        Ok(line)
    } else {
        Err(line)
    }
}

#[test]
fn acceptance_criteria() {
    let names = [
        "energy conservation",
        "gaussian waist line",
        "eikonal limit",
        "relativistic reduction",
        "massless/optics equivalence",
        "uncertainty product",
        "double-slit fringes",
        "comparator suite",
        "determinism",
    ];
    let canonical = std::thread::spawn(|| {
        let b = canonical_gaussian();
        vec![(1usize, c1_energy(&b)), (2, c2_waist(&b)), (6, c6_uncertainty(&b))]
    });
    let rest: Vec<std::thread::JoinHandle<Vec<(usize, Check)>>> = vec![
        std::thread::spawn(|| vec![(3, c3_eikonal())]),
        std::thread::spawn(|| vec![(4, c4_relativistic())]),
        std::thread::spawn(|| vec![(5, c5_massless_optics())]),
        std::thread::spawn(|| vec![(7, c7_double_slit())]),
        std::thread::spawn(|| vec![(8, c8_comparator())]),
        std::thread::spawn(|| vec![(9, c9_determinism())]),
    ];
    let mut results: Vec<(usize, Check)> = canonical.join().expect("canonical thread panicked");
    for h in rest {
        results.extend(h.join().expect("criterion thread panicked"));
    }
    results.sort_by_key(|&(i, _)| i);

    let mut failed = Vec::new();
    for (i, check) in &results {
        match check {
            Ok(detail) => println!("criterion {i} ({}): pass — {detail}", names[i - 1]),
            Err(detail) => {
                println!("criterion {i} ({}): FAIL — {detail}", names[i - 1]);
                failed.push(*i);
            }
        }
    }
    assert!(failed.is_empty(), "acceptance criteria failed: {failed:?}");
}
