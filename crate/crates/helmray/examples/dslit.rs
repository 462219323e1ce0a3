//! Scratch tuner for the double-slit fringe-spacing check.

use helmray::scenarios::{fringe_spacing, run_scenario, ScenarioConfig, ScenarioKind};

/// Dominant fringe period of a weighted sample set via the peak of the
/// empirical characteristic function |sum w_j exp(-i k x_j)| scanned around
/// an oracle guess.
fn spectral_spacing(xs: &[f64], w: &[f64], lambda_guess: f64) -> f64 {
    // samples are ordered along the front: turn flux weights into a smooth
    // density estimate (flux per centered half-gap), resample it on a
    // uniform grid, then subtract a moving average one guessed period wide
    // (the baseline carries the envelope but nulls the fringe wavenumber).
    let ns = xs.len();
    let dens: Vec<f64> = (0..ns)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(ns - 1));
            w[i] * (b - a) as f64 / (xs[b] - xs[a]).abs().max(1e-300)
        })
        .collect();
    let (lo, hi) = (xs[0].min(xs[ns - 1]), xs[0].max(xs[ns - 1]));
    let nb = 1024usize;
    let dx = (hi - lo) / nb as f64;
    let mut hist = vec![0.0f64; nb];
    let mut seg = 0usize;
    for i in 0..nb {
        let x = lo + (i as f64 + 0.5) * dx;
        while seg + 2 < ns && xs[seg + 1] < x {
            seg += 1;
        }
        let frac = ((x - xs[seg]) / (xs[seg + 1] - xs[seg])).clamp(0.0, 1.0);
        hist[i] = dens[seg] * (1.0 - frac) + dens[seg + 1] * frac;
    }
    let half = ((lambda_guess / dx / 2.0).round() as usize).max(1);
    let resid: Vec<f64> = (0..nb)
        .map(|i| {
            let (a, b) = (i.saturating_sub(half), (i + half + 1).min(nb));
            hist[i] - hist[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect();
    // zero crossings of the residual sit at the cos^2 zeros of the fringe
    // pattern; their mean separation is half the fringe period and is
    // first-order immune to the envelope. Ignore crossings in the faint
    // outer tails where the residual is numerical noise.
    let hmax = hist.iter().cloned().fold(0.0f64, f64::max);
    let mut crossings: Vec<f64> = Vec::new();
    for i in 1..nb {
        if hist[i].max(hist[i - 1]) < 1e-3 * hmax {
            continue;
        }
        if resid[i - 1] != 0.0 && resid[i].signum() != resid[i - 1].signum() {
            let frac = resid[i - 1] / (resid[i - 1] - resid[i]);
            crossings.push(lo + (i as f64 - 0.5 + frac) * dx);
        }
    }
    eprintln!("  crossings: {:?}", crossings.iter().map(|c| (c * 100.0).round() / 100.0).collect::<Vec<_>>());
    if crossings.len() < 2 {
        return f64::NAN;
    }
    // the pair straddling the flux centroid flanks the central bright
    // fringe; its separation is half the period and, by symmetry, immune
    // to even-order envelope distortions
    let wsum: f64 = w.iter().sum();
    let xc: f64 = xs.iter().zip(w).map(|(x, wi)| x * wi).sum::<f64>() / wsum;
    let i = crossings.partition_point(|&c| c <= xc);
    if i == 0 || i == crossings.len() {
        return f64::NAN;
    }
    2.0 * (crossings[i] - crossings[i - 1])
}

/// Fringe period recovered from the first side-maximum position x1 and the
/// measured Gaussian envelope width: the side maximum of
/// exp(-2x^2/W^2) cos^2(pi x / L) sits where theta*tan(theta) = c2*x1^2
/// (theta = pi*x1/L, c2 = -2/W^2), so L follows from x1 and W alone.
fn deconv_spacing(xs: &[f64], w: &[f64]) -> Option<(f64, f64, f64)> {
    let ns = xs.len();
    let dens: Vec<f64> = (0..ns)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(ns - 1));
            w[i] * (b - a) as f64 / (xs[b] - xs[a]).abs().max(1e-300)
        })
        .collect();
    // smooth the density along the sample index to suppress ray-level noise
    let mut sm = dens.clone();
    for _ in 0..4 {
        let prev = sm.clone();
        for i in 1..ns - 1 {
            sm[i] = 0.25 * (prev[i - 1] + 2.0 * prev[i] + prev[i + 1]);
        }
    }
    let dmax = sm.iter().cloned().fold(0.0f64, f64::max);
    // local maxima above threshold, keeping the sample index for dip lookup
    let mut peaks: Vec<(usize, f64, f64)> = Vec::new();
    for i in 1..ns - 1 {
        if sm[i] >= sm[i - 1] && sm[i] > sm[i + 1] && sm[i] > 0.02 * dmax {
            // quadratic refinement in x
            let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
            let (y0, y1, y2) = (sm[i - 1], sm[i], sm[i + 1]);
            let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
            let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
            let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
            let xp = if a < 0.0 { -b / (2.0 * a) } else { x1 };
            peaks.push((i, xp, y1));
        }
    }
    // the central lobe can arrive split into two near-equal summits; merge
    // adjacent peaks that are both within 20% of the global maximum
    let mut j = 0;
    while j + 1 < peaks.len() {
        let (_, xa, ha) = peaks[j];
        let (i1, xb, hb) = peaks[j + 1];
        if ha > 0.8 * dmax && hb > 0.8 * dmax {
            eprintln!("  merge: ({:.2},{:.3}) ({:.2},{:.3})", xa, ha / dmax, xb, hb / dmax);
            let xm = (xa * ha + xb * hb) / (ha + hb);
            peaks[j] = (i1, xm, ha.max(hb));
            peaks.remove(j + 1);
        } else {
            j += 1;
        }
    }
    let peaks: Vec<(f64, f64)> = peaks.into_iter().map(|(_, x, h)| (x, h)).collect();
    eprintln!("  peaks: {:?}", peaks.iter().map(|p| ((p.0 * 100.0).round() / 100.0, (p.1 / dmax * 1000.0).round() / 1000.0)).collect::<Vec<_>>());
    if peaks.len() < 3 {
        return None;
    }
    // central peak = the one nearest the flux centroid; x1 = mean |offset|
    // of its two neighbours
    let wsum: f64 = w.iter().sum();
    let xc: f64 = xs.iter().zip(w).map(|(x, wi)| x * wi).sum::<f64>() / wsum;
    let ic = (0..peaks.len())
        .min_by(|&a, &b| {
            (peaks[a].0 - xc).abs().partial_cmp(&(peaks[b].0 - xc).abs()).unwrap()
        })
        .unwrap();
    if ic == 0 || ic + 1 == peaks.len() {
        return None;
    }
    let x1 = 0.5 * ((peaks[ic].0 - peaks[ic - 1].0) + (peaks[ic + 1].0 - peaks[ic].0));
    // envelope width from the flux variance: exp(-2x^2/W^2) has sigma^2 = W^2/4
    let var: f64 = xs.iter().zip(w).map(|(x, wi)| wi * (x - xc) * (x - xc)).sum::<f64>() / wsum;
    let c2 = -1.0 / (2.0 * var);
    // solve theta*tan(theta) = c2*x1^2 on (pi/2, pi) by bisection
    let target = c2 * x1 * x1;
    let (mut lo, mut hi) = (0.5 * std::f64::consts::PI + 1e-9, std::f64::consts::PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.tan() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    Some((std::f64::consts::PI * x1 / theta, x1, (4.0 * var).sqrt()))
}

fn probe() {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
    cfg.z_max = 1e9;
    cfg.drift_limit = 1.0;
    cfg.snapshot_every = 50;
    cfg.t_max_override = Some(0.127);
    let bundle = run_scenario(&cfg).expect("probe run failed");
    // track deviation of px from a smooth local fit (3-point median residual)
    for f in bundle.snapshots.iter().rev().take(8).rev() {
        println!("t = {:.5}", f.t);
        for i in 0..9 {
            let r = &f.rays[i];
            println!(
                "  ray {i}: x={:+.8} px={:+.6e} R={:.4e} Q={:+.6e}",
                r.x, r.px, r.r_amp, r.q
            );
        }
    }
}

fn run_case(lambda: f64, a: f64, d: f64, hw: f64, n: usize, z_max: f64, dt_safety: f64, order: u32) {
    let mut cfg = ScenarioConfig::new(ScenarioKind::DoubleSlit);
    cfg.lambda0_over_w0 = lambda;
    cfg.slit_width = a;
    cfg.slit_separation = d;
    cfg.half_width = hw;
    cfg.n_rays = n;
    cfg.z_max = z_max;
    cfg.dt_safety = dt_safety;
    cfg.edge_order = order;
    cfg.snapshot_every = 100;
    cfg.drift_limit = 1e12;
    let t0 = std::time::Instant::now();
    match run_scenario(&cfg) {
        Ok(bundle) => {
            let drift = bundle
                .snapshots
                .last()
                .unwrap()
                .rays
                .iter()
                .map(|r| ((r.h - bundle.energy) / bundle.energy).abs())
                .fold(0.0f64, f64::max);
            let z_screen = z_max * bundle.units.w0 * 0.999;
            let theory = lambda * z_max / d; // lambda0 * z / d, in w0 units
            {
                let n = bundle.n_rays();
                let xs: Vec<f64> = (0..n)
                    .map(|i| bundle.x_at_z(i, z_screen).unwrap() / bundle.units.w0)
                    .collect();
                if let Ok(path) = std::env::var("HR_SAVE") {
                    use std::io::Write;
                    let mut f = std::fs::File::create(path).unwrap();
                    for (x, w) in xs.iter().zip(&bundle.launch_flux) {
                        writeln!(f, "{:.17e} {:.17e}", x, w).unwrap();
                    }
                }
                let sp = spectral_spacing(&xs, &bundle.launch_flux, theory);
                println!(
                    "  [crossing estimator] spacing {:.4} vs theory {:.4} (rel {:+.4})",
                    sp,
                    theory,
                    sp / theory - 1.0
                );
                match deconv_spacing(&xs, &bundle.launch_flux) {
                    Some((dsp, x1, wenv)) => println!(
                        "  [deconv estimator]   spacing {:.4} vs theory {:.4} (rel {:+.4})  x1 {:.3} W {:.3}",
                        dsp,
                        theory,
                        dsp / theory - 1.0,
                        x1,
                        wenv
                    ),
                    None => println!("  [deconv estimator]   fewer than 3 maxima"),
                }
            }
            match fringe_spacing(&bundle, z_screen) {
                Ok(sp) => println!(
                    "d={d:5.1} hw={hw:4.1} n={n} z={z_max} safety={dt_safety} order={order}: spacing {:.4} vs theory {:.4} (rel err {:+.4}) drift {:.2e} [{} snaps, {:.1}s]",
                    sp / bundle.units.w0,
                    theory,
                    sp / bundle.units.w0 / theory - 1.0,
                    drift,
                    bundle.snapshots.len(),
                    t0.elapsed().as_secs_f64()
                ),
                Err(e) => println!("d={d:5.1}: fringe measurement failed: {e} (drift {drift:.2e}, {:.1}s)", t0.elapsed().as_secs_f64()),
            }
        }
        Err(e) => println!("d={d:5.1} hw={hw:4.1} n={n} z={z_max} safety={dt_safety}: run failed: {e} [{:.1}s]", t0.elapsed().as_secs_f64()),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("base");
    match which {
        "base" => run_case(0.05, 2.0, 6.0, 7.0, 351, 3000.0, 1.0, 8),
        "double" => run_case(0.05, 2.0, 12.0, 10.0, 501, 3000.0, 1.0, 8),
        "short" => run_case(0.05, 2.0, 6.0, 7.0, 351, 1500.0, 1.0, 8),
        "probe" => probe(),
        "hist" => {
            let getf = |k: &str, dflt: f64| {
                std::env::var(k).ok().and_then(|v| v.parse().ok()).unwrap_or(dflt)
            };
            let zr = std::f64::consts::PI / 2e-4;
            let z = getf("HR_ZR", 24.0) * zr;
            let mut cfg = ScenarioConfig::new(ScenarioKind::DoubleSlit);
            cfg.lambda0_over_w0 = 2e-4;
            cfg.slit_width = 2.0;
            cfg.slit_separation = getf("HR_D", 8.0);
            cfg.half_width = getf("HR_HW", 8.0);
            cfg.n_rays = getf("HR_N", 141.0) as usize;
            cfg.z_max = z;
            cfg.dt_safety = getf("HR_DT", 0.1);
            cfg.edge_order = 2;
            cfg.snapshot_every = 100;
            cfg.drift_limit = 1e12;
            let b = run_scenario(&cfg).expect("run failed");
            let zr = std::f64::consts::PI / 2e-4;
            let n = b.n_rays();
            for &zk in &[0.5 * zr, 1.0 * zr, 2.0 * zr, 4.0 * zr, 8.0 * zr, 0.999 * z] {
                let z_plane = zk * b.units.w0;
                let mut xs = Vec::with_capacity(n);
                for ray in 0..n {
                    xs.push(b.x_at_z(ray, z_plane).unwrap() / b.units.w0);
                }
                let lam = 2e-4 / 3.0 * (zk + zr * zr / zk);
                println!("=== z = {:.2} z_R, fringe Lambda = {:.3} ===", zk / zr, lam);
                let fmax = b.launch_flux.iter().cloned().fold(0.0f64, f64::max);
                let mut dens: Vec<(f64, f64)> = Vec::new();
                for i in 1..n - 1 {
                    if b.launch_flux[i] < 1e-4 * fmax {
                        continue;
                    }
                    let dx = 0.5 * (xs[i + 1] - xs[i - 1]);
                    dens.push((xs[i], b.launch_flux[i] / dx.abs().max(1e-300)));
                }
                let dmax = dens.iter().map(|d| d.1).fold(0.0f64, f64::max);
                for (x, d) in &dens {
                    let bar = "#".repeat((d / dmax * 60.0) as usize);
                    println!("{:+9.3} {:.3} {}", x, d / dmax, bar);
                }
            }
        }
        "tdse" => {
            // ground truth: free 1D TDSE of the same transverse profile
            use helmray::bohm::{evolve_tdse, WaveFunctionGrid};
            use helmray::units::make_unit_system;
            use num_complex::Complex64;
            let u = make_unit_system(2e-4, helmray::units::RegimeKind::NonRelativistic, None)
                .unwrap();
            let getf = |k: &str, dflt: f64| {
                std::env::var(k).ok().and_then(|v| v.parse().ok()).unwrap_or(dflt)
            };
            let (a, d, hw) = (getf("HR_A", 2.0), getf("HR_D", 3.0), getf("HR_HW", 5.5));
            let ws = a / 2.0;
            let prof = |x: f64| {
                let g = |c: f64| (-((x - c) / ws).powi(2)).exp();
                if x.abs() <= hw { g(-d / 2.0) + g(d / 2.0) } else { 0.0 }
            };
            let zr_s = std::f64::consts::PI * ws * ws / 2e-4;
            let z_last = 2.0 * 18.0 * std::f64::consts::PI / 2e-4;
            let spread = ws * (1.0 + (z_last / zr_s).powi(2)).sqrt();
            let half = hw + 3.5 * spread;
            let n_pts = (2.0 * half / 0.0075).round() as usize | 1;
            let mut grid =
                WaveFunctionGrid::from_fn(-half, half, n_pts, |x| Complex64::new(prof(x), 0.0))
                    .unwrap();
            grid.normalize();
            let v = vec![0.0; grid.n()];
            let dt = 2e-4;
            // t = 0.5 is z = 1 z_R(w0) at v_z = hbar k0 / m
            let zr = std::f64::consts::PI / 2e-4;
            let ts: Vec<f64> = std::env::var("HR_TS")
                .unwrap_or_else(|_| "6,9,12,18".into())
                .split(',')
                .filter_map(|s| s.trim().parse().ok())
                .collect();
            for t_target in ts {
                let steps = ((t_target - grid.t) / dt).round() as usize;
                evolve_tdse(&mut grid, &v, &u, dt, steps, f64::INFINITY).unwrap();
                let dens: Vec<f64> = grid.psi.iter().map(|p| p.norm_sqr()).collect();
                let z = t_target * 2.0 * zr;
                let oracle = 2e-4 * z / d;
                let sp = spectral_spacing(&grid.xs, &dens, oracle);
                println!(
                    "TDSE z = {:4.0} z_R: spectral spacing {:.4} vs oracle {:.4} (rel {:+.4})",
                    t_target * 2.0,
                    sp,
                    oracle,
                    sp / oracle - 1.0
                );
                if let Some((dsp, x1, wenv)) = deconv_spacing(&grid.xs, &dens) {
                    println!(
                        "        deconv spacing {:.4} (rel {:+.4})  x1 {:.3} W {:.3}",
                        dsp,
                        dsp / oracle - 1.0,
                        x1,
                        wenv
                    );
                }
                if std::env::var("HR_DUMP").is_ok() {
                    let dmax = dens.iter().cloned().fold(0.0f64, f64::max);
                    for j in (0..grid.n()).step_by(120) {
                        if dens[j] / dmax < 2e-4 {
                            continue;
                        }
                        let bar = "#".repeat((dens[j] / dmax * 60.0) as usize);
                        println!("{:+9.3} {:.3} {}", grid.xs[j], dens[j] / dmax, bar);
                    }
                }
            }
        }
        "c5" => {
            use helmray::dynamics::LaunchMode;
            use helmray::potentials::PotentialField;
            use helmray::units::RegimeKind;
            let getf = |k: &str, dflt: f64| {
                std::env::var(k).ok().and_then(|v| v.parse().ok()).unwrap_or(dflt)
            };
            let gx = getf("HR_GX", 0.1);
            let eik = std::env::var("HR_EIK").is_ok();
            let lambda = 2e-3;
            let z_max = 0.5 * std::f64::consts::PI / lambda;
            let run = |massless: bool| {
                let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
                cfg.lambda0_over_w0 = lambda;
                cfg.n_rays = 101;
                cfg.z_max = z_max;
                cfg.snapshot_every = 2;
                cfg.launch_mode = LaunchMode::MatchEnergy;
                cfg.regime.eikonal = eik;
                cfg.potential = PotentialField::LinearRamp { gx, gz: 0.0 };
                if massless {
                    cfg.massless = true;
                    cfg.regime.kind = RegimeKind::Relativistic;
                } else {
                    cfg.regime.kind = RegimeKind::Optics;
                }
                run_scenario(&cfg).unwrap()
            };
            let (opt, mass) = (run(false), run(true));
            println!("dt opt {} mass {}", opt.dt, mass.dt);
            let z_end = z_max * 0.98;
            for ray in [0usize, 25, 50, 75, 100] {
                let mut worst = 0.0f64;
                let mut worst_z = 0.0;
                for k in 1..=40 {
                    let z = z_end * k as f64 / 40.0;
                    let (a, b) =
                        (opt.x_at_z(ray, z).unwrap(), mass.x_at_z(ray, z).unwrap());
                    let g = (a - b).abs() / (1.0 + b.abs());
                    if g > worst {
                        worst = g;
                        worst_z = z;
                    }
                }
                println!("ray {ray}: worst rel gap {worst:.2e} at z {worst_z:.0}");
            }
        }
        "fit" => {
            // re-run the estimator on a saved screen (x, flux) dump
            let path = std::env::args().nth(2).expect("usage: fit <dump> <theory>");
            let theory: f64 = std::env::args().nth(3).unwrap().parse().unwrap();
            let txt = std::fs::read_to_string(path).unwrap();
            let (mut xs, mut w) = (Vec::new(), Vec::new());
            for line in txt.lines() {
                let mut it = line.split_whitespace();
                xs.push(it.next().unwrap().parse::<f64>().unwrap());
                w.push(it.next().unwrap().parse::<f64>().unwrap());
            }
            match deconv_spacing(&xs, &w) {
                Some((dsp, x1, wenv)) => println!(
                    "  [deconv] spacing {:.4} vs theory {:.4} (rel {:+.4})  x1 {:.3} W {:.3}",
                    dsp,
                    theory,
                    dsp / theory - 1.0,
                    x1,
                    wenv
                ),
                None => println!("  [deconv] failed"),
            }
        }
        "surv" => {
            let getf = |k: &str, dflt: f64| {
                std::env::var(k).ok().and_then(|v| v.parse().ok()).unwrap_or(dflt)
            };
            let zr = std::f64::consts::PI / 2e-4;
            run_case(
                2e-4,
                getf("HR_A", 2.88),
                getf("HR_D", 6.0),
                getf("HR_HW", 7.0),
                getf("HR_N", 181.0) as usize,
                getf("HR_ZR", 8.0) * zr,
                getf("HR_DT", 0.05),
                getf("HR_ORD", 2.0) as u32,
            );
        }
        "opt" => {
            let z = 12.0 * std::f64::consts::PI / 2e-4;
            run_case(2e-4, 2.0, 3.0, 5.5, 201, z, 0.05, 2);
            run_case(2e-4, 2.0, 3.0, 5.5, 281, z, 0.05, 2);
            run_case(2e-4, 4.0, 6.0, 11.0, 201, z, 0.05, 2);
        }
        "stab" => {
            let zr = std::f64::consts::PI / 2e-4;
            for &(n, safety) in &[(301, 0.1), (301, 0.03), (301, 0.01)] {
                run_case(2e-4, 2.0, 4.0, 6.0, n, 10.0 * zr, safety, 2);
            }
        }
        "gauss" => {
            let zr = std::f64::consts::PI / 2e-4;
            let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
            cfg.z_max = 3.0 * zr;
            cfg.snapshot_every = 200;
            let t0 = std::time::Instant::now();
            match run_scenario(&cfg) {
                Ok(b) => {
                    let last = b.snapshots.last().unwrap();
                    let drift = last
                        .rays
                        .iter()
                        .map(|r| ((r.h - b.energy) / b.energy).abs())
                        .fold(0.0f64, f64::max);
                    println!(
                        "gaussian 3z_R ok: {} snaps, drift {:.2e}, edge px {:.3e}, {:.1}s",
                        b.snapshots.len(),
                        drift,
                        last.rays[0].px,
                        t0.elapsed().as_secs_f64()
                    );
                    // waist-line check for the rays launched at +-w0
                    let w0 = b.units.w0;
                    let i = (0..b.n_rays())
                        .find(|&i| (b.snapshots[0].rays[i].x - w0).abs() < 1e-9)
                        .unwrap();
                    let mut worst = 0.0f64;
                    for k in 1..=60 {
                        let z = 3.0 * zr * k as f64 / 60.0;
                        let x = b.x_at_z(i, z).unwrap();
                        let reference = helmray::scenarios::gaussian_waist_reference(z, &b.units);
                        worst = worst.max((x - reference).abs() / reference);
                    }
                    println!("waist-line max rel err (+w0 ray): {worst:.3e}");
                }
                Err(e) => println!("gaussian 3z_R failed: {e} [{:.1}s]", t0.elapsed().as_secs_f64()),
            }
        }
        "scan" => {
            let zr = std::f64::consts::PI / 2e-4; // slit-waist Rayleigh length
            run_case(2e-4, 2.0, 4.0, 6.0, 601, 10.0 * zr, 0.3, 2);
            run_case(2e-4, 2.0, 8.0, 8.0, 801, 10.0 * zr, 0.3, 2);
        }
        _ => eprintln!("unknown case {which}"),
    }
}
