use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use helmray::bohm::{
    eigenmodes, evolve_tdse, guidance_velocity_at, quantum_potential, superpose,
    trace_bohm_trajectories,
};
use helmray::config::{ComparatorConfig, RunConfig};
use helmray::csvio::{read_rows, write_rows, write_trajectories, Source, TrajectoryRow};
use helmray::figure::render_svg;
use helmray::scenarios::{run_scenario, ScenarioKind};
use helmray::units::{make_unit_system, RegimeKind, UnitSystem};
use helmray::{Exec, Result, SimError};

/// Coupled-ray integrator for Helmholtz-like wave equations.
#[derive(Parser)]
#[command(name = "helmray", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario described by a config file.
    Run { config: PathBuf },
    /// Parse and range-check a config file without running it.
    Validate { config: PathBuf },
    /// Render a trajectory CSV into an SVG figure.
    Figure {
        csv: PathBuf,
        out: PathBuf,
        /// Wavelength-to-waist ratio used for the axis scales and overlay.
        #[arg(long, default_value_t = 2e-4)]
        lambda0_over_w0: f64,
        /// Scenario the CSV came from; only gaussian gets the analytic
        /// waist-line overlay.
        #[arg(long, default_value = "gaussian")]
        scenario: String,
    },
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::parse(&text)
}

/// Runs the optional 1D comparator block: a superposition of box modes
/// evolved in time, with guidance trajectories from the given seeds.
fn comparator_rows(cc: &ComparatorConfig, u: &UnitSystem) -> Result<Vec<TrajectoryRow>> {
    let n = cc.grid_points;
    let l = cc.box_length;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * l / (n - 1) as f64).collect();
    let v = vec![0.0; n];
    let need = *cc.modes.iter().max().unwrap();
    let modes = eigenmodes(&xs, &v, u, need)?;
    let picked: Vec<&_> = cc.modes.iter().map(|&m| &modes[m - 1]).collect();
    let c = Complex64::new(1.0 / (picked.len() as f64).sqrt(), 0.0);
    let coeffs = vec![c; picked.len()];
    let mut grid = superpose(&xs, &picked, &coeffs)?;
    let energy: f64 =
        picked.iter().map(|m| m.energy).sum::<f64>() / picked.len() as f64;

    let mut history = vec![grid.clone()];
    let mut done = 0;
    while done < cc.steps {
        let chunk = cc.snapshot_every.min(cc.steps - done);
        evolve_tdse(&mut grid, &v, u, cc.dt, chunk, f64::INFINITY)?;
        history.push(grid.clone());
        done += chunk;
    }

    let paths = trace_bohm_trajectories(&history, u, &cc.seeds)?;
    let mut rows = Vec::new();
    for (k, snap) in history.iter().enumerate() {
        let (q, _) = quantum_potential(snap, u, Exec::Auto)?;
        let dx = snap.dx();
        for (seed_id, path) in paths.iter().enumerate() {
            let x = path[k];
            let vel = guidance_velocity_at(snap, u, x)?;
            let j = (((x - snap.xs[0]) / dx) as usize).min(n - 2);
            let frac = (x - snap.xs[j]) / dx;
            let lerp = |a: f64, b: f64| a * (1.0 - frac) + b * frac;
            rows.push(TrajectoryRow {
                t: snap.t,
                ray_id: seed_id,
                x,
                z: 0.0,
                px: u.mass * vel,
                pz: 0.0,
                r_amp: lerp(snap.psi[j].norm(), snap.psi[j + 1].norm()),
                q: lerp(q[j], q[j + 1]),
                h: energy,
                source: Source::Bohm,
            });
        }
    }
    Ok(rows)
}

fn run(cfg: RunConfig, quiet: bool) -> Result<()> {
    let sc = cfg.to_scenario_config()?;
    let u = sc.unit_system()?;
    let out_dir = PathBuf::from(&cfg.output_dir);
    std::fs::create_dir_all(&out_dir)?;

    let bundle = run_scenario(&sc)?;
    let traj_path = out_dir.join("trajectories.csv");
    write_trajectories(&bundle, &traj_path)?;
    if !quiet {
        println!(
            "wrote {} ({} snapshots x {} rays, dt = {:.3e})",
            traj_path.display(),
            bundle.snapshots.len(),
            bundle.n_rays(),
            bundle.dt
        );
    }

    if cfg.emit_svg {
        let overlay = cfg.scenario == ScenarioKind::Gaussian;
        if !overlay {
            eprintln!("warning: non-gaussian scenario, rendering without the analytic overlay");
        }
        let rows = helmray::csvio::bundle_rows(&bundle);
        let svg = render_svg(&rows, &u, overlay)?;
        let svg_path = out_dir.join("figure.svg");
        std::fs::write(&svg_path, svg)?;
        if !quiet {
            println!("wrote {}", svg_path.display());
        }
    }

    if let Some(cc) = &cfg.comparator {
        let cu = make_unit_system(cfg.lambda0_over_w0, RegimeKind::NonRelativistic, None)?;
        let rows = comparator_rows(cc, &cu)?;
        let path = out_dir.join("comparator.csv");
        write_rows(&rows, &path)?;
        if !quiet {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run { config } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = &cli.output_dir {
                cfg.output_dir = dir.display().to_string();
            }
            run(cfg, cli.quiet)
        }
        Cmd::Validate { config } => {
            let cfg = load_config(&config)?;
            if !cli.quiet {
                println!("ok: {} scenario, {} rays", cfg.scenario.name(), cfg.n_rays);
            }
            Ok(())
        }
        Cmd::Figure {
            csv,
            out,
            lambda0_over_w0,
            scenario,
        } => {
            let kind = ScenarioKind::parse(&scenario).ok_or_else(|| {
                SimError::Config(format!(
                    "--scenario: expected gaussian|single_slit|double_slit, got '{scenario}'"
                ))
            })?;
            let u = make_unit_system(lambda0_over_w0, RegimeKind::NonRelativistic, None)?;
            let rows = read_rows(&csv)?;
            let overlay = kind == ScenarioKind::Gaussian;
            if !overlay {
                eprintln!(
                    "warning: non-gaussian scenario, rendering without the analytic overlay"
                );
            }
            let svg = render_svg(&rows, &u, overlay)?;
            std::fs::write(&out, svg)?;
            if !cli.quiet {
                println!("wrote {}", out.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
