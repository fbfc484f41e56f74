//! Mesh Adaptive Direct Search over a box, with extreme-barrier constraint
//! handling, hidden-failure tolerance, frozen variables, an evaluation
//! cache, and a deterministic audit trail.
//!
//! The optimizer maximizes the bistability ratio phi (or any scalar a
//! blackbox reports) over the five design variables. Each iteration polls
//! N+1 points from a randomized positive spanning set on a mesh lattice
//! anchored at the incumbent champion; the frame expands on success and
//! shrinks on failure. Points violating a constraint are discarded outright
//! (extreme barrier) and failed solves count toward the budget but never
//! toward the champion.

pub mod poll;

pub use poll::{poll_directions, positively_spans};

use crate::design::DesignBounds;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;
use std::time::Instant;

/// Smallest meaningful frame size, as a fraction of the box.
pub const FRAME_UNDERFLOW: f64 = 1e-9;

/// Upper bound on the frame-to-mesh size ratio. The poll directions carry
/// integer entries up to this ratio, and their n x n determinant is checked
/// exactly in i128, so the ratio must stay small enough that products of two
/// fourth-order minors (the largest intermediates of fraction-free
/// elimination, about ratio^8) cannot overflow.
const MAX_FRAME_MESH_RATIO: f64 = 16_384.0;

/// Outcome of one blackbox invocation, before barrier classification.
#[derive(Debug, Clone, PartialEq)]
pub enum BlackboxOutcome {
    /// The evaluation produced a metric and constraint residuals
    /// (c_j <= 0 means feasible).
    Valid {
        phi: f64,
        constraints: Vec<f64>,
        sigma_ratio: f64,
        u_max: f64,
    },
    /// The point is rejected a priori (e.g. ill-ordered crease angles)
    /// with the violated residuals but no metric.
    Infeasible { constraints: Vec<f64> },
    /// The solve crashed or failed to converge.
    HiddenFail { reason: String },
}

/// Objective wrapper evaluated at a full (frozen-dimension-applied) design
/// vector.
pub trait Blackbox: Sync {
    fn evaluate(&self, x: &[f64; 5]) -> BlackboxOutcome;
}

impl<F> Blackbox for F
where
    F: Fn(&[f64; 5]) -> BlackboxOutcome + Sync,
{
    fn evaluate(&self, x: &[f64; 5]) -> BlackboxOutcome {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalStatus {
    Valid,
    HiddenFail,
    Infeasible,
}

impl EvalStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvalStatus::Valid => "Valid",
            EvalStatus::HiddenFail => "HiddenFail",
            EvalStatus::Infeasible => "Infeasible",
        }
    }
}

/// One evaluated design point as recorded in the audit trail.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub x: [f64; 5],
    pub status: EvalStatus,
    /// Present iff status is Valid.
    pub phi: Option<f64>,
    /// Constraint residuals c_j(x) <= 0; empty for hidden failures.
    pub constraints: Vec<f64>,
    pub sigma_ratio: Option<f64>,
    pub u_max: Option<f64>,
    /// Seconds spent in the blackbox (zero for cache hits).
    pub wall_time: f64,
    /// True when this evaluation replaced the champion.
    pub is_champion: bool,
}

impl EvaluationResult {
    /// Valid and satisfying every constraint: the only points the extreme
    /// barrier lets become champion.
    pub fn feasible(&self) -> bool {
        self.status == EvalStatus::Valid && self.constraints.iter().all(|&c| c <= 0.0)
    }
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MadsConfig {
    /// Maximum number of blackbox invocations.
    pub budget: usize,
    /// Initial frame size as a fraction of the box.
    pub frame_size0: f64,
    /// Frame multiplier on a successful iteration.
    pub expand: f64,
    /// Frame multiplier on a failed iteration.
    pub shrink: f64,
    pub seed: u64,
    /// Stop a poll at the first improving point instead of evaluating all
    /// N+1 candidates.
    pub opportunistic: bool,
    /// Reuse results for re-visited mesh points without re-invoking the
    /// blackbox.
    pub cache: bool,
}

impl Default for MadsConfig {
    fn default() -> Self {
        MadsConfig {
            budget: 1000,
            frame_size0: 0.125,
            expand: 2.0,
            shrink: 0.5,
            seed: 0,
            opportunistic: false,
            cache: true,
        }
    }
}

impl MadsConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.budget < 1 {
            return Err("budget must be at least 1".into());
        }
        if !(self.frame_size0 > 0.0 && self.frame_size0 <= 1.0) {
            return Err("frame_size0 must lie in (0, 1]".into());
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0 && self.expand > 1.0) {
            return Err("need 0 < shrink < 1 < expand".into());
        }
        Ok(())
    }
}

/// Full account of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    /// Best Valid-and-feasible evaluation, if any was found.
    pub champion: Option<EvaluationResult>,
    /// Every blackbox invocation, in evaluation order (cache hits are not
    /// re-recorded).
    pub history: Vec<EvaluationResult>,
    pub valid_count: usize,
    pub hidden_fail_count: usize,
    pub infeasible_count: usize,
    /// Best-so-far phi at each evaluation index (NaN before the first
    /// feasible point).
    pub convergence: Vec<f64>,
    /// Budget exhausted without a single Valid feasible evaluation.
    pub no_feasible_point: bool,
}

impl OptimizationReport {
    /// History export, one row per blackbox invocation.
    pub fn history_csv(&self) -> String {
        let mut out = String::from(
            "eval_index,th1,th2,th3,omega,h_ratio,status,phi,sigma_ratio,umax_Nmm,is_champion\n",
        );
        for (k, r) in self.history.iter().enumerate() {
            let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                k,
                r.x[0],
                r.x[1],
                r.x[2],
                r.x[3],
                r.x[4],
                r.status.as_str(),
                opt(r.phi),
                opt(r.sigma_ratio),
                opt(r.u_max),
                r.is_champion
            ));
        }
        out
    }
}

struct Runner<'a, B: Blackbox + ?Sized> {
    blackbox: &'a B,
    bounds: &'a DesignBounds,
    /// Free dimensions (unfrozen, nonzero span).
    active: Vec<usize>,
    cfg: MadsConfig,
    cache: HashMap<[i64; 5], EvaluationResult>,
    history: Vec<EvaluationResult>,
    champion: Option<EvaluationResult>,
}

fn cache_key(x: &[f64; 5]) -> [i64; 5] {
    // Fixed quantization well below the frame underflow threshold, so any
    // two candidates closer than the finest reachable mesh share a key.
    let mut key = [0i64; 5];
    for (k, v) in key.iter_mut().zip(x) {
        *k = (v * 1e10).round() as i64;
    }
    key
}

impl<'a, B: Blackbox + ?Sized> Runner<'a, B> {
    /// Runs the blackbox at x (or reuses the cached result) and records
    /// fresh evaluations in the history. Returns None when the budget is
    /// exhausted.
    fn evaluate(&mut self, x: [f64; 5]) -> Option<EvaluationResult> {
        let key = cache_key(&x);
        if self.cfg.cache {
            if let Some(hit) = self.cache.get(&key) {
                let mut r = hit.clone();
                r.wall_time = 0.0;
                r.is_champion = false;
                return Some(r);
            }
        }
        if self.history.len() >= self.cfg.budget {
            return None;
        }
        let result = invoke(self.blackbox, x);
        self.record(key, result.clone());
        Some(result)
    }

    /// Evaluates a poll batch in parallel. Cache hits are resolved first;
    /// fresh candidates are truncated to the remaining budget and invoked
    /// concurrently, then recorded in candidate order so the audit trail
    /// is independent of completion order.
    fn evaluate_batch(&mut self, candidates: &[[f64; 5]]) -> Vec<EvaluationResult> {
        let mut slots: Vec<Option<EvaluationResult>> = vec![None; candidates.len()];
        let mut fresh: Vec<(usize, [f64; 5])> = Vec::new();
        let mut seen: Vec<[i64; 5]> = Vec::new();
        for (i, x) in candidates.iter().enumerate() {
            let key = cache_key(x);
            if self.cfg.cache {
                if let Some(hit) = self.cache.get(&key) {
                    let mut r = hit.clone();
                    r.wall_time = 0.0;
                    r.is_champion = false;
                    slots[i] = Some(r);
                    continue;
                }
            }
            if self.cfg.cache && seen.contains(&key) {
                // Duplicate within the same poll: evaluate once, reuse below.
                continue;
            }
            seen.push(key);
            fresh.push((i, *x));
        }
        let room = self.cfg.budget.saturating_sub(self.history.len());
        fresh.truncate(room);
        let results: Vec<(usize, EvaluationResult)> = fresh
            .par_iter()
            .map(|&(i, x)| (i, invoke(self.blackbox, x)))
            .collect();
        for (i, r) in results {
            self.record(cache_key(&candidates[i]), r.clone());
            slots[i] = Some(r);
        }
        // Resolve intra-poll duplicates against the freshly filled cache.
        if self.cfg.cache {
            for (i, x) in candidates.iter().enumerate() {
                if slots[i].is_none() {
                    if let Some(hit) = self.cache.get(&cache_key(x)) {
                        let mut r = hit.clone();
                        r.wall_time = 0.0;
                        r.is_champion = false;
                        slots[i] = Some(r);
                    }
                }
            }
        }
        slots.into_iter().flatten().collect()
    }

    fn record(&mut self, key: [i64; 5], result: EvaluationResult) {
        if self.cfg.cache {
            self.cache.insert(key, result.clone());
        }
        self.history.push(result);
    }

    /// Installs a strictly improving feasible result as champion; returns
    /// whether the iteration counts as a success.
    fn try_improve(&mut self, result: &EvaluationResult) -> bool {
        if !result.feasible() {
            return false;
        }
        let improves = match &self.champion {
            Some(c) => result.phi > c.phi,
            None => true,
        };
        if improves {
            let mut r = result.clone();
            r.is_champion = true;
            // Mark the history row as the champion row.
            if let Some(row) = self
                .history
                .iter_mut()
                .rev()
                .find(|h| cache_key(&h.x) == cache_key(&result.x))
            {
                row.is_champion = true;
            }
            if self.cfg.cache {
                self.cache.insert(cache_key(&result.x), r.clone());
            }
            self.champion = Some(r);
        }
        improves
    }
}

fn invoke<B: Blackbox + ?Sized>(blackbox: &B, x: [f64; 5]) -> EvaluationResult {
    let start = Instant::now();
    let outcome = blackbox.evaluate(&x);
    let wall_time = start.elapsed().as_secs_f64();
    match outcome {
        BlackboxOutcome::Valid {
            phi,
            constraints,
            sigma_ratio,
            u_max,
        } => {
            let status = if constraints.iter().all(|&c| c <= 0.0) {
                EvalStatus::Valid
            } else {
                EvalStatus::Infeasible
            };
            EvaluationResult {
                x,
                status,
                phi: (status == EvalStatus::Valid).then_some(phi),
                constraints,
                sigma_ratio: Some(sigma_ratio),
                u_max: Some(u_max),
                wall_time,
                is_champion: false,
            }
        }
        BlackboxOutcome::Infeasible { constraints } => EvaluationResult {
            x,
            status: EvalStatus::Infeasible,
            phi: None,
            constraints,
            sigma_ratio: None,
            u_max: None,
            wall_time,
            is_champion: false,
        },
        BlackboxOutcome::HiddenFail { .. } => EvaluationResult {
            x,
            status: EvalStatus::HiddenFail,
            phi: None,
            constraints: vec![],
            sigma_ratio: None,
            u_max: None,
            wall_time,
            is_champion: false,
        },
    }
}

/// Runs MADS from x0. The start point is evaluated first; polling then
/// iterates (propose, evaluate all N+1 points, update) until the budget is
/// exhausted or the frame underflows.
pub fn run<B: Blackbox + ?Sized>(
    blackbox: &B,
    x0: [f64; 5],
    bounds: &DesignBounds,
    cfg: &MadsConfig,
) -> Result<OptimizationReport, String> {
    cfg.validate()?;
    let active: Vec<usize> = bounds
        .active_dimensions()
        .into_iter()
        .filter(|&i| bounds.upper[i] > bounds.lower[i])
        .collect();
    if active.is_empty() {
        return Err("no free dimensions to optimize".into());
    }
    let mut x0 = x0;
    for i in 0..5 {
        if let Some(v) = bounds.frozen[i] {
            x0[i] = v;
        }
        if x0[i] < bounds.lower[i] || x0[i] > bounds.upper[i] {
            return Err(format!("x0[{i}] = {} outside bounds", x0[i]));
        }
    }

    let mut runner = Runner {
        blackbox,
        bounds,
        active,
        cfg: *cfg,
        cache: HashMap::new(),
        history: Vec::new(),
        champion: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut frame = cfg.frame_size0;

    if let Some(first) = runner.evaluate(x0) {
        runner.try_improve(&first);
    }

    while runner.history.len() < cfg.budget && frame >= FRAME_UNDERFLOW {
        let n = runner.active.len();
        // Cap the frame-to-mesh ratio so the integer poll directions (and the
        // exact determinant certificate over them) stay well inside i128.
        let mesh = frame.min(frame * frame).max(frame / MAX_FRAME_MESH_RATIO);
        let ratio = (frame / mesh).round().max(1.0) as i64;
        let dirs = poll_directions(n, ratio, &mut rng);
        debug_assert!(positively_spans(&dirs));
        let center = runner.champion.as_ref().map(|c| c.x).unwrap_or(x0);
        let candidates: Vec<[f64; 5]> = dirs
            .iter()
            .map(|d| {
                let mut x = center;
                for (j, &dim) in runner.active.iter().enumerate() {
                    let span = runner.bounds.upper[dim] - runner.bounds.lower[dim];
                    let step = mesh * span * d[j] as f64;
                    x[dim] = (x[dim] + step)
                        .clamp(runner.bounds.lower[dim], runner.bounds.upper[dim]);
                }
                x
            })
            .collect();

        let success = if cfg.opportunistic {
            let mut success = false;
            for x in &candidates {
                let Some(r) = runner.evaluate(*x) else { break };
                if runner.try_improve(&r) {
                    success = true;
                    break;
                }
            }
            success
        } else {
            let results = runner.evaluate_batch(&candidates);
            // Install the best improving point of the whole poll.
            let best = results
                .iter()
                .filter(|r| r.feasible())
                .max_by(|a, b| a.phi.partial_cmp(&b.phi).expect("finite phi"));
            best.map(|r| runner.try_improve(&r.clone())).unwrap_or(false)
        };
        frame *= if success { cfg.expand } else { cfg.shrink };
    }

    let valid_count = runner
        .history
        .iter()
        .filter(|r| r.status == EvalStatus::Valid)
        .count();
    let hidden_fail_count = runner
        .history
        .iter()
        .filter(|r| r.status == EvalStatus::HiddenFail)
        .count();
    let infeasible_count = runner
        .history
        .iter()
        .filter(|r| r.status == EvalStatus::Infeasible)
        .count();
    let mut best = f64::NAN;
    let convergence = runner
        .history
        .iter()
        .map(|r| {
            if r.feasible() {
                let phi = r.phi.expect("valid result has phi");
                if !(best >= phi) {
                    best = phi;
                }
            }
            best
        })
        .collect();
    let no_feasible_point = runner.champion.is_none();
    Ok(OptimizationReport {
        champion: runner.champion,
        history: runner.history,
        valid_count,
        hidden_fail_count,
        infeasible_count,
        convergence,
        no_feasible_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_blackbox(c: [f64; 5]) -> impl Fn(&[f64; 5]) -> BlackboxOutcome {
        move |x: &[f64; 5]| {
            let phi = -x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            BlackboxOutcome::Valid {
                phi,
                constraints: vec![],
                sigma_ratio: 0.0,
                u_max: 0.0,
            }
        }
    }

    fn unit_box() -> DesignBounds {
        DesignBounds::new([0.0; 5], [1.0; 5]).unwrap()
    }

    #[test]
    fn budget_one_evaluates_only_x0() {
        let cfg = MadsConfig {
            budget: 1,
            ..MadsConfig::default()
        };
        let report = run(&sphere_blackbox([0.5; 5]), [0.2; 5], &unit_box(), &cfg).unwrap();
        assert_eq!(report.history.len(), 1);
        assert_eq!(report.history[0].x, [0.2; 5]);
        assert!(report.champion.is_some());
    }

    #[test]
    fn converges_on_interior_sphere_maximum() {
        let c = [0.37, 0.61, 0.52, 0.44, 0.7];
        let cfg = MadsConfig {
            seed: 17,
            ..MadsConfig::default()
        };
        let report = run(&sphere_blackbox(c), [0.2; 5], &unit_box(), &cfg).unwrap();
        let champ = report.champion.unwrap();
        for (a, b) in champ.x.iter().zip(&c) {
            assert!((a - b).abs() < 1e-3, "{:?} vs {:?}", champ.x, c);
        }
    }

    #[test]
    fn budget_never_exceeded() {
        let cfg = MadsConfig {
            budget: 100,
            ..MadsConfig::default()
        };
        let report = run(&sphere_blackbox([0.5; 5]), [0.1; 5], &unit_box(), &cfg).unwrap();
        assert!(report.history.len() <= 100);
    }

    #[test]
    fn champion_phi_non_decreasing() {
        let cfg = MadsConfig {
            budget: 300,
            seed: 5,
            ..MadsConfig::default()
        };
        let report = run(&sphere_blackbox([0.8; 5]), [0.3; 5], &unit_box(), &cfg).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for &b in &report.convergence {
            if b.is_nan() {
                continue;
            }
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn frozen_dimension_never_moves() {
        let bounds = unit_box().freeze(4, 0.6).unwrap();
        let cfg = MadsConfig {
            budget: 200,
            seed: 2,
            ..MadsConfig::default()
        };
        let report = run(&sphere_blackbox([0.5; 5]), [0.2, 0.2, 0.2, 0.2, 0.6], &bounds, &cfg)
            .unwrap();
        assert!(report.history.iter().all(|r| r.x[4] == 0.6));
        // 4 free dimensions -> 5 poll candidates per iteration after x0.
        assert!(report.history.len() > 1);
    }

    #[test]
    fn infeasible_points_never_champion() {
        // Feasible only when x[0] <= 0.5, but phi rewards large x[0].
        let blackbox = |x: &[f64; 5]| BlackboxOutcome::Valid {
            phi: x[0],
            constraints: vec![x[0] - 0.5],
            sigma_ratio: 0.0,
            u_max: 0.0,
        };
        let cfg = MadsConfig {
            budget: 300,
            seed: 9,
            ..MadsConfig::default()
        };
        let report = run(&blackbox, [0.2; 5], &unit_box(), &cfg).unwrap();
        let champ = report.champion.unwrap();
        assert!(champ.x[0] <= 0.5);
        assert!(champ.feasible());
    }

    #[test]
    fn same_seed_reproduces_history() {
        let cfg = MadsConfig {
            budget: 150,
            seed: 31,
            ..MadsConfig::default()
        };
        let a = run(&sphere_blackbox([0.6; 5]), [0.25; 5], &unit_box(), &cfg).unwrap();
        let b = run(&sphere_blackbox([0.6; 5]), [0.25; 5], &unit_box(), &cfg).unwrap();
        assert_eq!(a.history_csv(), b.history_csv());
    }

    #[test]
    fn counts_sum_to_history_length() {
        let blackbox = |x: &[f64; 5]| {
            // Mix of statuses keyed deterministically off the coordinates.
            let t = (x.iter().sum::<f64>() * 1e4).round() as i64 % 3;
            match t {
                0 => BlackboxOutcome::HiddenFail {
                    reason: "synthetic".into(),
                },
                1 => BlackboxOutcome::Infeasible {
                    constraints: vec![1.0],
                },
                _ => BlackboxOutcome::Valid {
                    phi: -x[0],
                    constraints: vec![],
                    sigma_ratio: 0.0,
                    u_max: 0.0,
                },
            }
        };
        let cfg = MadsConfig {
            budget: 120,
            seed: 4,
            ..MadsConfig::default()
        };
        let report = run(&blackbox, [0.21; 5], &unit_box(), &cfg).unwrap();
        assert_eq!(
            report.valid_count + report.hidden_fail_count + report.infeasible_count,
            report.history.len()
        );
    }

    #[test]
    fn cache_prevents_duplicate_invocations() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = AtomicUsize::new(0);
        let blackbox = |x: &[f64; 5]| {
            calls.fetch_add(1, Ordering::SeqCst);
            BlackboxOutcome::Valid {
                phi: -x[0],
                constraints: vec![],
                sigma_ratio: 0.0,
                u_max: 0.0,
            }
        };
        let cfg = MadsConfig {
            budget: 400,
            seed: 12,
            ..MadsConfig::default()
        };
        let report = run(&blackbox, [0.5; 5], &unit_box(), &cfg).unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), report.history.len());
    }

    #[test]
    fn history_csv_header_and_rows() {
        let cfg = MadsConfig {
            budget: 12,
            ..MadsConfig::default()
        };
        let report = run(&sphere_blackbox([0.5; 5]), [0.4; 5], &unit_box(), &cfg).unwrap();
        let csv = report.history_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "eval_index,th1,th2,th3,omega,h_ratio,status,phi,sigma_ratio,umax_Nmm,is_champion"
        );
        assert_eq!(lines.count(), report.history.len());
    }
}
