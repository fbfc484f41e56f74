//! Scenario presets and the CLI-facing orchestration layer.
//!
//! A scenario wires the surrogate blackbox (mesh build, forming, actuation
//! sweep, metric extraction) to the MADS optimizer with one of five preset
//! constraint/bound combinations, and writes the run artifacts: the full
//! evaluation history, the champion's energy landscape, and a plain-text
//! report.

use crate::design::{
    validate_design, DesignBounds, DesignError, DesignVector, GeometryParams, MaterialPair,
};
use crate::engine::{actuation_sweep, extract_metrics, forming, BistabilityMetrics, EnergyLandscape, HiddenFailure, SweepOptions};
use crate::mads::{self, Blackbox, BlackboxOutcome, MadsConfig, OptimizationReport};
use crate::mesh::build_mesh;
use crate::spring::{spring_energy_curve, SpringModelParams};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Exit codes of the CLI.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_NO_FEASIBLE_POINT: i32 = 3;
pub const EXIT_LANDSCAPE_FAILURE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("config error: {0}")]
    Config(String),
    #[error("no feasible point found within the budget")]
    NoFeasiblePoint,
    #[error("landscape evaluation failed: {0}")]
    Landscape(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// The five preset optimization scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Manufacturing bounds, all five variables free.
    A,
    /// Manufacturing bounds, forming height frozen at 0.6.
    B,
    /// Relaxed angular bounds, all five variables free.
    C,
    /// Relaxed angular bounds, forming height frozen at 0.6.
    D,
    /// Manufacturing bounds plus the energy floor U_max >= U_max(x0).
    E,
}

impl Scenario {
    pub fn parse(name: &str) -> Result<Self, ScenarioError> {
        match name {
            "a" => Ok(Scenario::A),
            "b" => Ok(Scenario::B),
            "c" => Ok(Scenario::C),
            "d" => Ok(Scenario::D),
            "e" => Ok(Scenario::E),
            other => Err(ScenarioError::Config(format!(
                "unknown scenario {other:?}; expected one of a, b, c, d, e"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::A => "a",
            Scenario::B => "b",
            Scenario::C => "c",
            Scenario::D => "d",
            Scenario::E => "e",
        }
    }

    fn bounds(&self) -> Result<DesignBounds, DesignError> {
        let base = match self {
            Scenario::A | Scenario::B | Scenario::E => DesignBounds::default_bounds(),
            Scenario::C | Scenario::D => DesignBounds::relaxed_bounds(),
        };
        match self {
            Scenario::B | Scenario::D => base.freeze(4, 0.6),
            _ => Ok(base),
        }
    }

    fn energy_floor(&self) -> bool {
        matches!(self, Scenario::E)
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub budget: usize,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub x0: DesignVector,
    pub bounds: DesignBounds,
    pub energy_floor: bool,
    pub materials: MaterialPair,
    pub geometry: GeometryParams,
    pub sweep: SweepOptions,
}

/// On-disk config: every field optional so an empty file runs scenario "a"
/// with all defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    scenario: Option<String>,
    seed: Option<u64>,
    budget: Option<usize>,
    workers: Option<usize>,
    out_dir: Option<String>,
    x0: Option<[f64; 5]>,
    bounds: Option<BoundsSection>,
    materials: Option<MaterialPair>,
    geometry: Option<GeometryParams>,
    sweep: Option<SweepOptions>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsSection {
    lower: Option<[f64; 5]>,
    upper: Option<[f64; 5]>,
    /// Freezes the forming height at the given value (overrides the
    /// scenario preset).
    frozen_h: Option<f64>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        let scenario = Scenario::parse(file.scenario.as_deref().unwrap_or("a"))?;
        let mut bounds = scenario
            .bounds()
            .map_err(|e| ScenarioError::Config(e.to_string()))?;
        if let Some(section) = &file.bounds {
            if let Some(lower) = section.lower {
                bounds.lower = lower;
            }
            if let Some(upper) = section.upper {
                bounds.upper = upper;
            }
            for i in 0..5 {
                if bounds.lower[i] > bounds.upper[i] {
                    return Err(ScenarioError::Config(format!(
                        "bounds: lower[{i}] > upper[{i}]"
                    )));
                }
            }
            if let Some(h) = section.frozen_h {
                bounds = bounds
                    .freeze(4, h)
                    .map_err(|e| ScenarioError::Config(e.to_string()))?;
            }
        }
        let materials = file.materials.unwrap_or_default();
        materials.validate().map_err(ScenarioError::Config)?;
        let geometry = file.geometry.unwrap_or_default();
        geometry.validate().map_err(ScenarioError::Config)?;
        let sweep = file.sweep.unwrap_or_default();
        sweep.validate().map_err(ScenarioError::Config)?;
        let x0_raw = file.x0.unwrap_or(DesignVector::design_i().as_array());
        let x0 = validate_design(x0_raw, &bounds)
            .map_err(|e| ScenarioError::Config(format!("x0: {e}")))?;
        Ok(ScenarioConfig {
            scenario,
            seed: file.seed.unwrap_or(0),
            budget: file.budget.unwrap_or(1000),
            workers: file.workers.unwrap_or(0),
            out_dir: PathBuf::from(file.out_dir.as_deref().unwrap_or("out")),
            x0,
            bounds,
            energy_floor: scenario.energy_floor(),
            materials,
            geometry,
            sweep,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The reporting normalization E_f * r_o * nu_f.
    pub fn energy_normalization(&self) -> f64 {
        self.materials.face_modulus * self.geometry.outer_radius * self.materials.face_poisson
    }
}

/// Runs the full surrogate pipeline at one design: mesh build, forming,
/// actuation sweep, metric extraction.
pub fn evaluate_design(
    x: &DesignVector,
    cfg: &ScenarioConfig,
) -> Result<(EnergyLandscape, BistabilityMetrics), HiddenFailure> {
    let mesh = build_mesh(x, &cfg.geometry, &cfg.materials)
        .map_err(|e| HiddenFailure::new(format!("mesh build: {e}")))?;
    let h = x.h_ratio * cfg.geometry.outer_radius;
    let formed = forming(&mesh, h, &cfg.sweep)?;
    let land = actuation_sweep(&formed, &cfg.sweep, cfg.energy_normalization())?;
    let metrics = extract_metrics(&land, &cfg.materials)
        .map_err(|e| HiddenFailure::new(format!("metric extraction: {e}")))?;
    Ok((land, metrics))
}

/// The surrogate blackbox seen by the optimizer: constraint residuals are
/// sigma_ratio - 1 and, when the energy floor is active,
/// (U_max^0 - U_max) / U_max^0.
pub struct SurrogateBlackbox {
    cfg: ScenarioConfig,
    umax_floor: Option<f64>,
}

impl Blackbox for SurrogateBlackbox {
    fn evaluate(&self, raw: &[f64; 5]) -> BlackboxOutcome {
        let x = match validate_design(*raw, &self.cfg.bounds) {
            Ok(x) => x,
            Err(DesignError::OrderingViolation { th1, th2, th3 }) => {
                // A-priori rejection: report the ordering residuals as
                // violated constraints.
                return BlackboxOutcome::Infeasible {
                    constraints: vec![th1 - th2, th2 - th3],
                };
            }
            Err(e) => {
                return BlackboxOutcome::HiddenFail {
                    reason: e.to_string(),
                }
            }
        };
        match evaluate_design(&x, &self.cfg) {
            Ok((_, m)) => {
                let mut constraints = vec![m.sigma_ratio - 1.0];
                if let Some(floor) = self.umax_floor {
                    constraints.push((floor - m.u_max) / floor);
                }
                BlackboxOutcome::Valid {
                    phi: m.phi,
                    constraints,
                    sigma_ratio: m.sigma_ratio,
                    u_max: m.u_max,
                }
            }
            Err(e) => BlackboxOutcome::HiddenFail { reason: e.reason },
        }
    }
}

impl SurrogateBlackbox {
    /// Builds the blackbox; for energy-floor scenarios this evaluates x0
    /// once (outside the optimization budget) to fix U_max^0.
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, ScenarioError> {
        let umax_floor = if cfg.energy_floor {
            let (_, m) = evaluate_design(&cfg.x0, cfg)
                .map_err(|e| ScenarioError::Config(format!("energy floor at x0: {}", e.reason)))?;
            if !(m.u_max > 0.0) {
                return Err(ScenarioError::Config(
                    "energy floor requires U_max(x0) > 0".into(),
                ));
            }
            Some(m.u_max)
        } else {
            None
        };
        Ok(SurrogateBlackbox {
            cfg: cfg.clone(),
            umax_floor,
        })
    }

    pub fn umax_floor(&self) -> Option<f64> {
        self.umax_floor
    }
}

/// Runs one preset scenario end to end and writes `history.csv`,
/// `landscape_champion.csv`, and `report.txt` into the output directory.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<OptimizationReport, ScenarioError> {
    let blackbox = SurrogateBlackbox::new(cfg)?;
    let mads_cfg = MadsConfig {
        budget: cfg.budget,
        seed: cfg.seed,
        ..MadsConfig::default()
    };
    let report = in_pool(cfg.workers, || {
        mads::run(&blackbox, cfg.x0.as_array(), &cfg.bounds, &mads_cfg)
    })
    .map_err(ScenarioError::Config)?;

    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(cfg.out_dir.join("history.csv"), report.history_csv())?;
    if let Some(champion) = &report.champion {
        let x = validate_design(champion.x, &cfg.bounds)
            .map_err(|e| ScenarioError::Config(format!("champion: {e}")))?;
        let (land, _) = evaluate_design(&x, cfg)
            .map_err(|e| ScenarioError::Landscape(e.reason))?;
        std::fs::write(cfg.out_dir.join("landscape_champion.csv"), land.to_csv())?;
    }
    std::fs::write(
        cfg.out_dir.join("report.txt"),
        report_text(cfg, &report, blackbox.umax_floor()),
    )?;
    if report.no_feasible_point {
        return Err(ScenarioError::NoFeasiblePoint);
    }
    Ok(report)
}

fn report_text(cfg: &ScenarioConfig, report: &OptimizationReport, floor: Option<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", cfg.scenario.name());
    let _ = writeln!(out, "seed: {}", cfg.seed);
    let _ = writeln!(out, "budget: {}", cfg.budget);
    let _ = writeln!(out, "evaluations: {}", report.history.len());
    let _ = writeln!(
        out,
        "counts: valid {} / hidden-fail {} / infeasible {}",
        report.valid_count, report.hidden_fail_count, report.infeasible_count
    );
    if let Some(floor) = floor {
        let _ = writeln!(out, "energy floor U_max(x0): {floor} N*mm");
    }
    match &report.champion {
        Some(c) => {
            let _ = writeln!(
                out,
                "champion x: ({}, {}, {}, {}, {})",
                c.x[0], c.x[1], c.x[2], c.x[3], c.x[4]
            );
            let _ = writeln!(out, "champion phi: {}", c.phi.unwrap_or(f64::NAN));
            let _ = writeln!(
                out,
                "champion sigma_ratio: {}",
                c.sigma_ratio.unwrap_or(f64::NAN)
            );
            let _ = writeln!(out, "champion U_max: {} N*mm", c.u_max.unwrap_or(f64::NAN));
        }
        None => {
            let _ = writeln!(out, "champion: NONE (no feasible point)");
        }
    }
    out
}

/// One row of a design comparison table.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub x: [f64; 5],
    pub metrics: Option<BistabilityMetrics>,
    pub normalized_u_max: Option<f64>,
    pub error: Option<String>,
}

/// Evaluates each design and tabulates metrics; failed evaluations produce
/// FAILED rows rather than aborting.
pub fn compare_designs(designs: &[[f64; 5]], cfg: &ScenarioConfig) -> Vec<ComparisonRow> {
    designs
        .iter()
        .map(|raw| match validate_design(*raw, &cfg.bounds) {
            Ok(x) => match evaluate_design(&x, cfg) {
                Ok((_, m)) => ComparisonRow {
                    x: *raw,
                    normalized_u_max: Some(m.u_max / cfg.energy_normalization()),
                    metrics: Some(m),
                    error: None,
                },
                Err(e) => ComparisonRow {
                    x: *raw,
                    metrics: None,
                    normalized_u_max: None,
                    error: Some(e.reason),
                },
            },
            Err(e) => ComparisonRow {
                x: *raw,
                metrics: None,
                normalized_u_max: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "th1,th2,th3,omega,h_ratio,status,phi,umax_Nmm,umax_normalized,delta_u_Nmm,delta_state2_mm,sigma_ratio\n",
    );
    for row in rows {
        let x = row.x;
        match (&row.metrics, &row.error) {
            (Some(m), _) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},OK,{},{},{},{},{},{}",
                    x[0],
                    x[1],
                    x[2],
                    x[3],
                    x[4],
                    m.phi,
                    m.u_max,
                    row.normalized_u_max.unwrap_or(f64::NAN),
                    m.delta_u,
                    m.delta_state2,
                    m.sigma_ratio
                );
            }
            (None, Some(e)) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},FAILED,,,,,,{}",
                    x[0],
                    x[1],
                    x[2],
                    x[3],
                    x[4],
                    e.replace(',', ";")
                );
            }
            (None, None) => unreachable!("row has neither metrics nor error"),
        }
    }
    out
}

fn in_pool<T: Send>(
    workers: usize,
    job: impl FnOnce() -> Result<T, String> + Send,
) -> Result<T, String> {
    if workers == 0 {
        return job();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(job)
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "waterbomb-opt",
    about = "Derivative-free design optimization of bistable waterbomb origami"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOverrides {
    /// RNG seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluation budget override.
    #[arg(long)]
    budget: Option<usize>,
    /// Worker threads for poll evaluation (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one optimization scenario from a config file.
    Optimize {
        config: PathBuf,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Evaluate one design and write its full energy landscape.
    Landscape {
        config: PathBuf,
        /// Design vector as th1,th2,th3,omega,h_ratio.
        #[arg(long, value_delimiter = ',', num_args = 5)]
        x: Vec<f64>,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Tabulate metrics for a list of designs (one comma-separated design
    /// per line).
    Compare {
        config: PathBuf,
        #[arg(long)]
        designs: PathBuf,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Sweep the reduced torsion-spring model and write its landscape.
    SweepSpring {
        config: PathBuf,
        /// Mountain fold stiffness (N*mm/rad).
        #[arg(long, default_value_t = 0.0)]
        km: f64,
        /// Valley fold stiffness (N*mm/rad).
        #[arg(long, default_value_t = 0.0)]
        kv: f64,
        /// Facet bending stiffness (N*mm/rad).
        #[arg(long, default_value_t = 1.0)]
        kf: f64,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
}

fn load_config(path: &Path, overrides: &CommonOverrides) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = ScenarioConfig::from_file(path)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(budget) = overrides.budget {
        cfg.budget = budget;
    }
    if let Some(workers) = overrides.workers {
        cfg.workers = workers;
    }
    if let Some(out) = &overrides.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn exit_code(err: &ScenarioError) -> i32 {
    match err {
        ScenarioError::Config(_) | ScenarioError::Io(_) => EXIT_CONFIG_ERROR,
        ScenarioError::NoFeasiblePoint => EXIT_NO_FEASIBLE_POINT,
        ScenarioError::Landscape(_) => EXIT_LANDSCAPE_FAILURE,
    }
}

fn dispatch(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Optimize { config, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            let report = run_scenario(&cfg)?;
            let champion = report.champion.as_ref().expect("feasible run has champion");
            println!(
                "champion phi {} at ({}, {}, {}, {}, {}); artifacts in {}",
                champion.phi.unwrap_or(f64::NAN),
                champion.x[0],
                champion.x[1],
                champion.x[2],
                champion.x[3],
                champion.x[4],
                cfg.out_dir.display()
            );
            Ok(())
        }
        Command::Landscape {
            config,
            x,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            let raw: [f64; 5] = x
                .try_into()
                .map_err(|_| ScenarioError::Config("--x needs exactly 5 values".into()))?;
            let design = validate_design(raw, &cfg.bounds)
                .map_err(|e| ScenarioError::Config(format!("--x: {e}")))?;
            let (land, m) =
                evaluate_design(&design, &cfg).map_err(|e| ScenarioError::Landscape(e.reason))?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let path = cfg.out_dir.join("landscape_design.csv");
            std::fs::write(&path, land.to_csv())?;
            println!(
                "phi {} u_max {} N*mm delta_u {} N*mm delta_state2 {} mm sigma_ratio {} bistable {} -> {}",
                m.phi,
                m.u_max,
                m.delta_u,
                m.delta_state2,
                m.sigma_ratio,
                m.bistable,
                path.display()
            );
            Ok(())
        }
        Command::Compare {
            config,
            designs,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            let text = std::fs::read_to_string(&designs)
                .map_err(|e| ScenarioError::Config(format!("{}: {e}", designs.display())))?;
            let mut list = Vec::new();
            for (ln, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let vals: Vec<f64> = line
                    .split(',')
                    .map(|f| {
                        f.trim()
                            .parse::<f64>()
                            .map_err(|e| ScenarioError::Config(format!("line {}: {e}", ln + 1)))
                    })
                    .collect::<Result<_, _>>()?;
                let raw: [f64; 5] = vals.try_into().map_err(|_| {
                    ScenarioError::Config(format!("line {}: expected 5 values", ln + 1))
                })?;
                list.push(raw);
            }
            let rows = compare_designs(&list, &cfg);
            print!("{}", comparison_table(&rows));
            Ok(())
        }
        Command::SweepSpring {
            config,
            km,
            kv,
            kf,
            overrides,
        } => {
            let cfg = load_config(&config, &overrides)?;
            let params = SpringModelParams {
                k_mountain: km,
                k_valley: kv,
                k_facet: kf,
                geometry: cfg.geometry,
                ..SpringModelParams::default()
            };
            params.validate().map_err(ScenarioError::Config)?;
            let land = spring_energy_curve(&params, &cfg.sweep)
                .map_err(|e| ScenarioError::Landscape(e.reason))?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let path = cfg.out_dir.join("landscape_spring.csv");
            std::fs::write(&path, land.to_csv())?;
            let metrics = extract_metrics(&land, &cfg.materials);
            match metrics {
                Ok(m) => println!(
                    "u_max {} N*mm second well {} N*mm at delta {} mm -> {}",
                    m.u_max,
                    m.u_max - m.delta_u,
                    m.delta_state2,
                    path.display()
                ),
                Err(e) => println!("metrics unavailable ({e}) -> {}", path.display()),
            }
            Ok(())
        }
    }
}

/// CLI entry point; returns the process exit code.
pub fn cli_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_runs_scenario_a_defaults() {
        let cfg = ScenarioConfig::from_toml("").unwrap();
        assert_eq!(cfg.scenario, Scenario::A);
        assert_eq!(cfg.budget, 1000);
        assert_eq!(cfg.x0, DesignVector::design_i());
        assert_eq!(cfg.bounds, DesignBounds::default_bounds());
        assert!(!cfg.energy_floor);
    }

    #[test]
    fn scenario_b_freezes_height() {
        let cfg = ScenarioConfig::from_toml("scenario = \"b\"").unwrap();
        assert_eq!(cfg.bounds.frozen[4], Some(0.6));
        assert_eq!(cfg.bounds.active_dimensions(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn scenario_c_relaxes_bounds() {
        let cfg = ScenarioConfig::from_toml("scenario = \"c\"").unwrap();
        assert_eq!(cfg.bounds.lower[0], 0.02);
        assert_eq!(cfg.bounds.upper[2], 0.98);
        assert_eq!(cfg.bounds.frozen, [None; 5]);
    }

    #[test]
    fn scenario_e_enables_energy_floor() {
        let cfg = ScenarioConfig::from_toml("scenario = \"e\"").unwrap();
        assert!(cfg.energy_floor);
        assert_eq!(cfg.bounds, DesignBounds::default_bounds());
    }

    #[test]
    fn unknown_scenario_rejected() {
        let err = ScenarioConfig::from_toml("scenario = \"z\"").unwrap_err();
        assert!(matches!(err, ScenarioError::Config(_)));
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ScenarioConfig::from_toml("scneario = \"a\"").unwrap_err();
        assert!(matches!(err, ScenarioError::Config(_)));
    }

    #[test]
    fn invalid_x0_rejected() {
        let err = ScenarioConfig::from_toml("x0 = [0.9, 0.5, 0.1, 1.0, 0.6]").unwrap_err();
        assert!(matches!(err, ScenarioError::Config(_)));
    }

    #[test]
    fn bounds_overrides_apply() {
        let cfg = ScenarioConfig::from_toml(
            "[bounds]\nlower = [0.1, 0.2, 0.2, 0.5, 0.3]\nfrozen_h = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.bounds.lower[1], 0.2);
        assert_eq!(cfg.bounds.frozen[4], Some(0.5));
    }

    #[test]
    fn config_material_section_parsed() {
        let cfg = ScenarioConfig::from_toml(
            "[materials]\nface_modulus = 2000.0\ncrease_modulus = 100.0\nface_poisson = 0.3\ncrease_poisson = 0.4\nface_yield = 45.0\ncrease_yield = 40.0\n",
        )
        .unwrap();
        assert_eq!(cfg.materials.face_modulus, 2000.0);
        assert_eq!(cfg.energy_normalization(), 2000.0 * 50.0 * 0.3);
    }
}
