//! Run-configuration files: a flat `key = value` format with dotted
//! sections (`scenario.*`, `units.*`, `output.*`, `comparator.*`),
//! exhaustive key checking (typos are hard errors with a suggestion),
//! and lossless round-trip serialization.

use crate::dynamics::Regime;
use crate::error::{Result, SimError};
use crate::scenarios::{ScenarioConfig, ScenarioKind};
use crate::units::{rayleigh_length, RegimeKind};

/// Everything a `run` invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    pub n_rays: usize,
    pub half_width: f64,
    /// None = default to 3 Rayleigh lengths.
    pub z_max: Option<f64>,
    pub regime: RegimeKind,
    pub eikonal: bool,
    pub q_scale: f64,
    pub slit_width: f64,
    pub slit_separation: f64,
    pub edge_order: u32,
    pub dt_safety: f64,
    pub drift_limit: f64,
    pub lambda0_over_w0: f64,
    pub pc_over_rest_energy: Option<f64>,
    pub massless: bool,
    pub output_dir: String,
    pub emit_svg: bool,
    pub snapshot_every: usize,
    pub comparator: Option<ComparatorConfig>,
}

/// Optional 1D wave-mechanics comparator block.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorConfig {
    pub grid_points: usize,
    pub box_length: f64,
    /// Box modes superposed with equal weights.
    pub modes: Vec<usize>,
    pub dt: f64,
    pub steps: usize,
    pub snapshot_every: usize,
    /// Trajectory seed positions.
    pub seeds: Vec<f64>,
}

impl Default for ComparatorConfig {
    fn default() -> Self {
        ComparatorConfig {
            grid_points: 258,
            box_length: 1.0,
            modes: vec![1, 2],
            dt: 5e-4,
            steps: 400,
            snapshot_every: 10,
            seeds: vec![0.25, 0.4, 0.5, 0.6, 0.75],
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: ScenarioKind::Gaussian,
            n_rays: 201,
            half_width: 4.0,
            z_max: None,
            regime: RegimeKind::NonRelativistic,
            eikonal: false,
            q_scale: 1.0,
            slit_width: 2.0,
            slit_separation: 8.0,
            edge_order: 8,
            dt_safety: 1.0,
            drift_limit: 1e-4,
            lambda0_over_w0: 2e-4,
            pc_over_rest_energy: None,
            massless: false,
            output_dir: "out".into(),
            emit_svg: true,
            snapshot_every: 25,
            comparator: None,
        }
    }
}

const KEYS: &[&str] = &[
    "scenario.name",
    "scenario.n_rays",
    "scenario.half_width",
    "scenario.z_max",
    "scenario.regime",
    "scenario.eikonal",
    "scenario.q_scale",
    "scenario.slit_width",
    "scenario.slit_separation",
    "scenario.edge_order",
    "scenario.dt_safety",
    "scenario.drift_limit",
    "units.lambda0_over_w0",
    "units.pc_over_rest_energy",
    "units.massless",
    "output.dir",
    "output.emit_svg",
    "output.snapshot_every",
    "comparator.enabled",
    "comparator.grid_points",
    "comparator.box_length",
    "comparator.modes",
    "comparator.dt",
    "comparator.steps",
    "comparator.snapshot_every",
    "comparator.seeds",
];

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cur = row[j + 1];
            row[j + 1] = if ca == cb {
                prev
            } else {
                1 + prev.min(cur).min(row[j])
            };
            prev = cur;
        }
    }
    row[b.len()]
}

fn nearest_key(key: &str) -> &'static str {
    KEYS.iter()
        .min_by_key(|k| levenshtein(key, k))
        .copied()
        .unwrap()
}

fn bad(line: usize, msg: String) -> SimError {
    SimError::Config(format!("line {line}: {msg}"))
}

struct Raw<'a> {
    line: usize,
    value: &'a str,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut entries: Vec<(usize, &str, &str)> = Vec::new();
        for (i, raw_line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = match raw_line.find('#') {
                Some(p) => &raw_line[..p],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(lineno, format!("expected 'key = value', got '{line}'")))?;
            entries.push((lineno, key.trim(), value.trim()));
        }

        let mut seen: std::collections::BTreeMap<&str, Raw> = Default::default();
        for (lineno, key, value) in entries {
            if !KEYS.contains(&key) {
                return Err(bad(
                    lineno,
                    format!("unknown key '{key}' (did you mean '{}'?)", nearest_key(key)),
                ));
            }
            if seen
                .insert(key, Raw { line: lineno, value })
                .is_some()
            {
                return Err(bad(lineno, format!("duplicate key '{key}'")));
            }
        }

        let mut cfg = RunConfig::default();
        let mut comparator_enabled = false;
        let mut comparator = ComparatorConfig::default();

        macro_rules! take {
            ($key:expr, $parse:expr) => {
                if let Some(raw) = seen.get($key) {
                    #[allow(clippy::redundant_closure_call)]
                    {
                        ($parse)(raw)?;
                    }
                }
            };
        }
        fn num(raw: &Raw, key: &str) -> Result<f64> {
            raw.value
                .parse::<f64>()
                .map_err(|_| bad(raw.line, format!("{key}: bad number '{}'", raw.value)))
        }
        fn int(raw: &Raw, key: &str) -> Result<usize> {
            raw.value
                .parse::<usize>()
                .map_err(|_| bad(raw.line, format!("{key}: bad integer '{}'", raw.value)))
        }
        fn boolean(raw: &Raw, key: &str) -> Result<bool> {
            match raw.value {
                "true" => Ok(true),
                "false" => Ok(false),
                v => Err(bad(raw.line, format!("{key}: expected true/false, got '{v}'"))),
            }
        }
        fn list<T: std::str::FromStr>(raw: &Raw, key: &str) -> Result<Vec<T>> {
            raw.value
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<T>()
                        .map_err(|_| bad(raw.line, format!("{key}: bad list item '{s}'")))
                })
                .collect()
        }

        take!("scenario.name", |r: &Raw| {
            cfg.scenario = ScenarioKind::parse(r.value).ok_or_else(|| {
                bad(
                    r.line,
                    format!(
                        "scenario.name: expected gaussian|single_slit|double_slit, got '{}'",
                        r.value
                    ),
                )
            })?;
            Ok::<(), SimError>(())
        });
        take!("scenario.n_rays", |r: &Raw| {
            cfg.n_rays = int(r, "scenario.n_rays")?;
            Ok::<(), SimError>(())
        });
        take!("scenario.half_width", |r: &Raw| {
            cfg.half_width = num(r, "scenario.half_width")?;
            Ok::<(), SimError>(())
        });
        take!("scenario.z_max", |r: &Raw| {
            cfg.z_max = Some(num(r, "scenario.z_max")?);
            Ok::<(), SimError>(())
        });
        take!("scenario.regime", |r: &Raw| {
            cfg.regime = RegimeKind::parse(r.value).ok_or_else(|| {
                bad(
                    r.line,
                    format!(
                        "scenario.regime: expected nonrelativistic|relativistic|optics, got '{}'",
                        r.value
                    ),
                )
            })?;
            Ok::<(), SimError>(())
        });
        take!("scenario.eikonal", |r: &Raw| {
            cfg.eikonal = boolean(r, "scenario.eikonal")?;
            Ok::<(), SimError>(())
        });
        take!("scenario.q_scale", |r: &Raw| {
            cfg.q_scale = num(r, "scenario.q_scale")?;
            Ok::<(), SimError>(())
        });
        take!("scenario.slit_width", |r: &Raw| {
            cfg.slit_width = num(r, "scenario.slit_width")?;
            Ok::<(), SimError>(())
        });
        take!("scenario.slit_separation", |r: &Raw| {
            cfg.slit_separation = num(r, "scenario.slit_separation")?;
            Ok::<(), SimError>(())
        });
        take!("scenario.edge_order", |r: &Raw| {
            cfg.edge_order = int(r, "scenario.edge_order")? as u32;
            Ok::<(), SimError>(())
        });
        take!("scenario.dt_safety", |r: &Raw| {
            cfg.dt_safety = num(r, "scenario.dt_safety")?;
            Ok::<(), SimError>(())
        });
        take!("scenario.drift_limit", |r: &Raw| {
            cfg.drift_limit = num(r, "scenario.drift_limit")?;
            Ok::<(), SimError>(())
        });
        take!("units.lambda0_over_w0", |r: &Raw| {
            cfg.lambda0_over_w0 = num(r, "units.lambda0_over_w0")?;
            Ok::<(), SimError>(())
        });
        take!("units.pc_over_rest_energy", |r: &Raw| {
            cfg.pc_over_rest_energy = Some(num(r, "units.pc_over_rest_energy")?);
            Ok::<(), SimError>(())
        });
        take!("units.massless", |r: &Raw| {
            cfg.massless = boolean(r, "units.massless")?;
            Ok::<(), SimError>(())
        });
        take!("output.dir", |r: &Raw| {
            cfg.output_dir = r.value.to_string();
            Ok::<(), SimError>(())
        });
        take!("output.emit_svg", |r: &Raw| {
            cfg.emit_svg = boolean(r, "output.emit_svg")?;
            Ok::<(), SimError>(())
        });
        take!("output.snapshot_every", |r: &Raw| {
            cfg.snapshot_every = int(r, "output.snapshot_every")?;
            Ok::<(), SimError>(())
        });
        take!("comparator.enabled", |r: &Raw| {
            comparator_enabled = boolean(r, "comparator.enabled")?;
            Ok::<(), SimError>(())
        });
        take!("comparator.grid_points", |r: &Raw| {
            comparator.grid_points = int(r, "comparator.grid_points")?;
            Ok::<(), SimError>(())
        });
        take!("comparator.box_length", |r: &Raw| {
            comparator.box_length = num(r, "comparator.box_length")?;
            Ok::<(), SimError>(())
        });
        take!("comparator.modes", |r: &Raw| {
            comparator.modes = list::<usize>(r, "comparator.modes")?;
            Ok::<(), SimError>(())
        });
        take!("comparator.dt", |r: &Raw| {
            comparator.dt = num(r, "comparator.dt")?;
            Ok::<(), SimError>(())
        });
        take!("comparator.steps", |r: &Raw| {
            comparator.steps = int(r, "comparator.steps")?;
            Ok::<(), SimError>(())
        });
        take!("comparator.snapshot_every", |r: &Raw| {
            comparator.snapshot_every = int(r, "comparator.snapshot_every")?;
            Ok::<(), SimError>(())
        });
        take!("comparator.seeds", |r: &Raw| {
            comparator.seeds = list::<f64>(r, "comparator.seeds")?;
            Ok::<(), SimError>(())
        });

        if comparator_enabled {
            cfg.comparator = Some(comparator);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, key: &str, bound: &str| {
            if ok {
                Ok(())
            } else {
                Err(SimError::Config(format!("{key}: must be {bound}")))
            }
        };
        check(self.lambda0_over_w0 > 0.0, "units.lambda0_over_w0", "> 0")?;
        if let Some(r) = self.pc_over_rest_energy {
            check(r > 0.0, "units.pc_over_rest_energy", "> 0")?;
        }
        check(
            self.n_rays >= 51 && self.n_rays % 2 == 1,
            "scenario.n_rays",
            "odd and >= 51",
        )?;
        if let Some(z) = self.z_max {
            check(z > 0.0, "scenario.z_max", "> 0")?;
        }
        check(self.q_scale >= 0.0, "scenario.q_scale", ">= 0")?;
        check(self.dt_safety > 0.0, "scenario.dt_safety", "> 0")?;
        check(self.drift_limit > 0.0, "scenario.drift_limit", "> 0")?;
        check(self.snapshot_every >= 1, "output.snapshot_every", ">= 1")?;
        if let Some(c) = &self.comparator {
            check(
                c.grid_points >= 64 && c.grid_points <= 514,
                "comparator.grid_points",
                "in [64, 514] (dense eigenmode solve)",
            )?;
            check(c.box_length > 0.0, "comparator.box_length", "> 0")?;
            check(!c.modes.is_empty(), "comparator.modes", "non-empty")?;
            check(c.modes.iter().all(|&m| m >= 1), "comparator.modes", ">= 1")?;
            check(c.dt > 0.0, "comparator.dt", "> 0")?;
            check(c.steps >= 1, "comparator.steps", ">= 1")?;
            check(c.snapshot_every >= 1, "comparator.snapshot_every", ">= 1")?;
            check(!c.seeds.is_empty(), "comparator.seeds", "non-empty")?;
            check(
                c.seeds
                    .iter()
                    .all(|&s| s > 0.0 && s < c.box_length),
                "comparator.seeds",
                "inside the box",
            )?;
        }
        // full scenario-level validation (slit geometry etc.)
        self.to_scenario_config()?;
        Ok(())
    }

    /// Builds the engine-facing scenario description, resolving the z_max
    /// default (3 Rayleigh lengths).
    pub fn to_scenario_config(&self) -> Result<ScenarioConfig> {
        let mut sc = ScenarioConfig::new(self.scenario);
        sc.n_rays = self.n_rays;
        sc.half_width = self.half_width;
        sc.regime = Regime::new(self.regime);
        sc.regime.eikonal = self.eikonal;
        sc.regime.q_scale = self.q_scale;
        sc.lambda0_over_w0 = self.lambda0_over_w0;
        sc.pc_over_rest_energy = self.pc_over_rest_energy;
        sc.massless = self.massless;
        sc.slit_width = self.slit_width;
        sc.slit_separation = self.slit_separation;
        sc.edge_order = self.edge_order;
        sc.snapshot_every = self.snapshot_every;
        sc.dt_safety = self.dt_safety;
        sc.drift_limit = self.drift_limit;
        sc.z_max = match self.z_max {
            Some(z) => z,
            None => 3.0 * rayleigh_length(&sc.unit_system()?),
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Exhaustive serialization; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("scenario.name", self.scenario.name().into());
        kv("scenario.n_rays", self.n_rays.to_string());
        kv("scenario.half_width", self.half_width.to_string());
        if let Some(z) = self.z_max {
            kv("scenario.z_max", z.to_string());
        }
        kv("scenario.regime", self.regime.name().into());
        kv("scenario.eikonal", self.eikonal.to_string());
        kv("scenario.q_scale", self.q_scale.to_string());
        kv("scenario.slit_width", self.slit_width.to_string());
        kv("scenario.slit_separation", self.slit_separation.to_string());
        kv("scenario.edge_order", self.edge_order.to_string());
        kv("scenario.dt_safety", self.dt_safety.to_string());
        kv("scenario.drift_limit", self.drift_limit.to_string());
        kv("units.lambda0_over_w0", self.lambda0_over_w0.to_string());
        if let Some(r) = self.pc_over_rest_energy {
            kv("units.pc_over_rest_energy", r.to_string());
        }
        kv("units.massless", self.massless.to_string());
        kv("output.dir", self.output_dir.clone());
        kv("output.emit_svg", self.emit_svg.to_string());
        kv("output.snapshot_every", self.snapshot_every.to_string());
        kv(
            "comparator.enabled",
            self.comparator.is_some().to_string(),
        );
        if let Some(c) = &self.comparator {
            kv("comparator.grid_points", c.grid_points.to_string());
            kv("comparator.box_length", c.box_length.to_string());
            kv(
                "comparator.modes",
                c.modes
                    .iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            kv("comparator.dt", c.dt.to_string());
            kv("comparator.steps", c.steps.to_string());
            kv("comparator.snapshot_every", c.snapshot_every.to_string());
            kv(
                "comparator.seeds",
                c.seeds
                    .iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = RunConfig::parse(
            "scenario.name = gaussian\nunits.lambda0_over_w0 = 2e-4\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::Gaussian);
        assert_eq!(cfg.n_rays, 201);
        assert_eq!(cfg.lambda0_over_w0, 2e-4);
        let sc = cfg.to_scenario_config().unwrap();
        // z_max defaults to 3 Rayleigh lengths
        assert!((sc.z_max - 3.0 * std::f64::consts::PI / 2e-4).abs() < 1e-6);
    }

    #[test]
    fn zero_wavelength_names_the_key() {
        let err = RunConfig::parse("units.lambda0_over_w0 = 0\n").unwrap_err();
        assert!(err.to_string().contains("units.lambda0_over_w0"), "{err}");
    }

    #[test]
    fn unknown_key_suggests_nearest() {
        let err = RunConfig::parse("scenario.nrays_ = 201\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("scenario.nrays_"), "{msg}");
        assert!(msg.contains("scenario.n_rays"), "{msg}");
    }

    #[test]
    fn duplicate_and_malformed_lines_error_with_line_numbers() {
        let err =
            RunConfig::parse("scenario.n_rays = 201\nscenario.n_rays = 301\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = RunConfig::parse("just some text\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn round_trip_is_identity() {
        let mut cfg = RunConfig::default();
        cfg.scenario = ScenarioKind::DoubleSlit;
        cfg.half_width = 9.0;
        cfg.lambda0_over_w0 = 0.05;
        cfg.z_max = Some(42.5);
        cfg.comparator = Some(ComparatorConfig::default());
        let text = cfg.serialize();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        // and a second trip is byte-stable
        assert_eq!(back.serialize(), text);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::parse(
            "# a comment\n\nscenario.name = single_slit # trailing\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::SingleSlit);
    }
}
