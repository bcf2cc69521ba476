//! Randomised conformance harness.
//!
//! Each trial draws a game and a start vector from a seeded stream, runs the
//! dynamics and checks every invariant of the engine against it. Trials are
//! independent and run in parallel; results are merged in trial order, so
//! a configuration always produces the same report.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    detect_period, difference_trace, simulate_with, Classifier, DynamicsOutcome, Trajectory,
    DEFAULT_EPS, DEFAULT_MAX_PERIOD, DEFAULT_MAX_STEPS,
};
use crate::equilibrium::nash_equilibrium;
use crate::format::{serialize_f64, serialize_f64_vec};
use crate::model::{is_equilibrium, step_values, GameParams, QuantityVector};
use crate::oscillation::{
    find_all_oscillations, match_cycle, verify_quantity_matrix, QuantityMatrix,
};
use crate::reduction::{estimate_n_bar, reduce_window, surviving_suffix};
use crate::scalar::max_abs_diff;

/// Every property a sweep reports, whether or not it was exercised.
pub const SWEEP_PROPERTIES: &[&str] = &[
    "boundedness",
    "cycle_matched",
    "decided",
    "envelope",
    "equal_cost_halving",
    "equilibrium_fixed_point",
    "equilibrium_match",
    "non_negativity",
    "ordering",
    "oscillation_soundness",
    "period_at_most_two",
    "reduction",
    "update_oracle",
];

pub const FALSIFY_PROPERTIES: &[&str] = &["no_long_cycle", "snapshot_matched"];

/// Counterexamples kept in a report; failures beyond this are only counted.
pub const MAX_COUNTEREXAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostDistribution {
    /// Uniform on `[0, A]`.
    Uniform,
    /// Uniform on the multiples of the step in `[0, A]`; the step is
    /// [`SweepConfig::cost_step`].
    Grid,
}

/// Deliberate engine defects for checking that the harness notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    None,
    /// Negative best responses are not clamped.
    NoClamp,
    /// Divides by 3 instead of 2.
    WrongSlope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub trials: u64,
    pub n_min: usize,
    pub n_max: usize,
    /// `A` is uniform on `[capacity_min, capacity_max]`, or drawn from
    /// `capacity_choices` when that is non-empty.
    #[serde(serialize_with = "serialize_f64")]
    pub capacity_min: f64,
    #[serde(serialize_with = "serialize_f64")]
    pub capacity_max: f64,
    #[serde(serialize_with = "serialize_f64_vec")]
    pub capacity_choices: Vec<f64>,
    pub costs: CostDistribution,
    #[serde(serialize_with = "serialize_f64")]
    pub cost_step: f64,
    /// All firms share one drawn cost.
    pub equal_costs: bool,
    /// Share of trials whose costs are moved to `[A, 2A]`.
    #[serde(serialize_with = "serialize_f64")]
    pub degenerate_fraction: f64,
    pub max_steps: usize,
    #[serde(serialize_with = "serialize_f64")]
    pub eps: f64,
    pub max_period: usize,
    pub seed: u64,
    pub mutation: Mutation,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            trials: 1000,
            n_min: 1,
            n_max: 10,
            capacity_min: 1.0,
            capacity_max: 100.0,
            capacity_choices: Vec::new(),
            costs: CostDistribution::Uniform,
            cost_step: 1.0,
            equal_costs: false,
            degenerate_fraction: 0.0,
            max_steps: DEFAULT_MAX_STEPS,
            eps: DEFAULT_EPS,
            max_period: DEFAULT_MAX_PERIOD,
            seed: 42,
            mutation: Mutation::None,
        }
    }
}

impl SweepConfig {
    fn classifier(&self) -> Classifier {
        Classifier {
            max_steps: self.max_steps,
            eps: self.eps,
            max_period: self.max_period,
        }
    }

    fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }

    fn validate(&self) -> Result<(), String> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(format!(
                "need 1 <= n_min <= n_max, got {}..={}",
                self.n_min, self.n_max
            ));
        }
        let range_ok = self.capacity_min > 0.0
            && self.capacity_min <= self.capacity_max
            && self.capacity_max.is_finite();
        let choices_ok = self
            .capacity_choices
            .iter()
            .all(|a| *a > 0.0 && a.is_finite());
        if !(range_ok || !self.capacity_choices.is_empty()) || !choices_ok {
            return Err("capacities must be positive and finite".into());
        }
        if self.costs == CostDistribution::Grid
            && !(self.cost_step > 0.0 && self.cost_step.is_finite())
        {
            return Err(format!(
                "grid step must be positive, got {}",
                self.cost_step
            ));
        }
        if !(0.0..=1.0).contains(&self.degenerate_fraction) {
            return Err("degenerate_fraction must lie in [0, 1]".into());
        }
        if self.eps.is_nan() || self.eps <= 0.0 || self.max_period == 0 {
            return Err("eps must be positive and max_period at least 1".into());
        }
        Ok(())
    }
}

/// A game and start vector in the caller's firm order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    #[serde(rename = "A", serialize_with = "serialize_f64")]
    pub capacity: f64,
    #[serde(serialize_with = "serialize_f64_vec")]
    pub costs: Vec<f64>,
    #[serde(serialize_with = "serialize_f64_vec")]
    pub init: Vec<f64>,
}

impl Instance {
    pub fn params(&self) -> GameParams {
        GameParams::new(self.capacity, self.costs.clone()).expect("generated instances are valid")
    }

    /// Start vector in ascending cost order.
    pub fn start(&self, params: &GameParams) -> QuantityVector {
        QuantityVector::for_game(params, params.from_user_order(&self.init))
            .expect("generated instances are valid")
    }
}

/// The instance of `trial` under `config`.
pub fn draw_instance(config: &SweepConfig, trial: u64) -> Instance {
    let mut rng = config.rng(trial);
    let n = rng.gen_range(config.n_min..=config.n_max);
    let capacity = if config.capacity_choices.is_empty() {
        if config.capacity_min == config.capacity_max {
            config.capacity_min
        } else {
            rng.gen_range(config.capacity_min..=config.capacity_max)
        }
    } else {
        config.capacity_choices[rng.gen_range(0..config.capacity_choices.len())]
    };
    let draw_cost = |rng: &mut ChaCha8Rng| match config.costs {
        CostDistribution::Uniform => rng.gen_range(0.0..=capacity),
        CostDistribution::Grid => {
            let steps = (capacity / config.cost_step).floor() as u64;
            rng.gen_range(0..=steps) as f64 * config.cost_step
        }
    };
    let mut costs: Vec<f64> = if config.equal_costs {
        vec![draw_cost(&mut rng); n]
    } else {
        (0..n).map(|_| draw_cost(&mut rng)).collect()
    };
    if config.degenerate_fraction > 0.0 && rng.gen_bool(config.degenerate_fraction) {
        for c in &mut costs {
            *c += capacity;
        }
    }
    let init = (0..n)
        .map(|_| rng.gen_range(0.0..=capacity / 2.0))
        .collect();
    Instance {
        capacity,
        costs,
        init,
    }
}

/// Result of one property on one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    Pass { residual: f64 },
    Fail { residual: f64, detail: String },
    Skip,
}

impl Check {
    fn from_residual(residual: f64, tol: f64, detail: impl FnOnce() -> String) -> Check {
        if residual <= tol {
            Check::Pass { residual }
        } else {
            Check::Fail {
                residual,
                detail: detail(),
            }
        }
    }

    fn from_bool(ok: bool, detail: impl FnOnce() -> String) -> Check {
        if ok {
            Check::Pass { residual: 0.0 }
        } else {
            Check::Fail {
                residual: 1.0,
                detail: detail(),
            }
        }
    }

    pub fn failed(&self) -> bool {
        matches!(self, Check::Fail { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub outcome: &'static str,
    pub checks: Vec<(&'static str, Check)>,
}

fn mutated_step(mutation: Mutation, params: &GameParams, q: &[f64]) -> Vec<f64> {
    match mutation {
        Mutation::None => step_values(params, q),
        Mutation::NoClamp | Mutation::WrongSlope => {
            let total: f64 = q.iter().sum();
            let divisor = if mutation == Mutation::WrongSlope {
                3.0
            } else {
                2.0
            };
            (0..q.len())
                .map(|i| {
                    let v = (params.capacity() - (total - q[i]) - params.cost(i)) / divisor;
                    if mutation == Mutation::WrongSlope {
                        v.max(0.0)
                    } else {
                        v
                    }
                })
                .collect()
        }
    }
}

/// Best responses by direct summation, independent of the engine.
fn oracle_step(params: &GameParams, q: &[f64]) -> Vec<f64> {
    (0..q.len())
        .map(|i| {
            let mut others = 0.0;
            for (j, v) in q.iter().enumerate() {
                if j != i {
                    others += v;
                }
            }
            let v = 0.5 * (params.capacity() - params.cost(i) - others);
            if v > 0.0 {
                v
            } else {
                0.0
            }
        })
        .collect()
}

fn run_engine(config: &SweepConfig, params: &GameParams, q0: &QuantityVector) -> Trajectory {
    simulate_with(params, q0, config.max_steps, |p, q| {
        mutated_step(config.mutation, p, q)
    })
    .expect("generated instances are valid")
}

/// Runs every property on one instance.
pub fn check_instance(config: &SweepConfig, instance: &Instance) -> TrialResult {
    let params = instance.params();
    let q0 = instance.start(&params);
    let a = *params.capacity();
    let scale = a.max(1.0);
    let n = params.n();
    let classifier = config.classifier();
    let raw = run_engine(config, &params, &q0);
    let traj = classifier.prepare(&raw);
    let states = traj.states();
    let mut checks: Vec<(&'static str, Check)> = Vec::new();

    let most_negative = states
        .iter()
        .flat_map(|s| s.values())
        .fold(0.0f64, |m, v| m.min(*v));
    checks.push((
        "non_negativity",
        Check::from_residual(0.0 - most_negative.min(0.0), 0.0, || {
            format!("output {most_negative}")
        }),
    ));

    let excess = states
        .iter()
        .skip(1)
        .flat_map(|s| {
            s.values()
                .iter()
                .enumerate()
                .map(|(i, v)| v - 0.5 * (a - params.cost(i)).max(0.0))
        })
        .fold(0.0f64, f64::max);
    checks.push((
        "boundedness",
        Check::from_residual(excess, 1e-12 * scale, || {
            format!("output exceeds the monopoly level by {excess}")
        }),
    ));

    let oracle_gap = states
        .windows(2)
        .map(|w| max_abs_diff(&oracle_step(&params, w[0].values()), w[1].values()))
        .fold(0.0f64, f64::max);
    checks.push((
        "update_oracle",
        Check::from_residual(oracle_gap, 1e-10 * scale, || {
            format!("transition differs from direct summation by {oracle_gap}")
        }),
    ));

    let outcome = match classifier.classify_trajectory(&raw) {
        Ok(outcome) => outcome,
        Err(e) => {
            checks.push((
                "decided",
                Check::Fail {
                    residual: 1.0,
                    detail: format!("run cannot be classified: {e}"),
                },
            ));
            return TrialResult {
                outcome: "invalid",
                checks,
            };
        }
    };
    let period = if traj.len() > 2 * config.max_period {
        detect_period(&traj, config.eps, config.max_period).expect("config validated")
    } else {
        None
    };
    checks.push((
        "period_at_most_two",
        Check::from_bool(period.is_none_or(|p| p <= 2), || {
            format!("period {period:?} detected")
        }),
    ));
    checks.push((
        "decided",
        match &outcome {
            DynamicsOutcome::Undecided { period: None, .. } => Check::Skip,
            DynamicsOutcome::Undecided {
                period: Some(p), ..
            } => Check::Fail {
                residual: *p as f64,
                detail: format!("settled into period {p}"),
            },
            _ => Check::Pass { residual: 0.0 },
        },
    ));

    // Pairwise differences, firm i at least as expensive as firm j.
    let mut envelope = 0.0f64;
    let mut ordering = Check::Skip;
    let mut halving = Check::Skip;
    let decided = !matches!(outcome, DynamicsOutcome::Undecided { .. });
    for j in 0..n {
        for i in j + 1..n {
            let trace = difference_trace(&traj, i, j).expect("sorted pair");
            envelope = envelope.max(trace.envelope_violation());
            if trace.delta_c == 0.0 {
                let excess = trace.halving_excess().max(0.0);
                if !halving.failed() {
                    halving = Check::from_residual(excess, 1e-12, || {
                        format!(
                            "|Q'| exceeds |Q|/2 by {excess} for equal-cost firms {} and {}",
                            i + 1,
                            j + 1
                        )
                    });
                }
            } else if decided && !ordering.failed() {
                let settled = trace
                    .settle_round(1e-9 * scale)
                    .is_some_and(|t| t + 2 <= trace.values.len());
                ordering = Check::from_bool(settled, || {
                    format!(
                        "firm {} keeps out-producing the cheaper firm {}",
                        i + 1,
                        j + 1
                    )
                });
            }
        }
    }
    checks.push((
        "envelope",
        Check::from_residual(envelope, 1e-9 * scale, || {
            format!("difference leaves the envelope by {envelope}")
        }),
    ));
    checks.push(("ordering", ordering));
    checks.push(("equal_cost_halving", halving));

    let eq = nash_equilibrium(&params);
    let fixed = is_equilibrium(&params, &eq.q_star, 1e-12 * scale).expect("dimensions match");
    checks.push((
        "equilibrium_fixed_point",
        Check::from_bool(fixed, || {
            format!("{:?} is not a fixed point", eq.q_star.values())
        }),
    ));
    checks.push((
        "equilibrium_match",
        match &outcome {
            DynamicsOutcome::Equilibrium { witness, .. } => {
                let gap = max_abs_diff(witness.values(), eq.q_star.values());
                Check::from_residual(gap, 1e-6 * scale, || {
                    format!("run settled {gap} away from the equilibrium")
                })
            }
            _ => Check::Skip,
        },
    ));

    let report = find_all_oscillations(&params);
    let worst = report
        .oscillations
        .iter()
        .map(|o| {
            verify_quantity_matrix(&params, &o.matrix, 0.0)
                .expect("dimensions match")
                .max_residual
        })
        .fold(0.0f64, f64::max);
    checks.push((
        "oscillation_soundness",
        if report.oscillations.is_empty() {
            Check::Skip
        } else {
            Check::from_residual(worst, 1e-12 * scale, || {
                format!("constructed cycle misses by {worst}")
            })
        },
    ));
    checks.push((
        "cycle_matched",
        match &outcome {
            DynamicsOutcome::TwoCycle { matrix, .. } => {
                Check::from_bool(match_cycle(&report, matrix, 1e-6 * scale).is_some(), || {
                    format!(
                        "observed cycle {:?} is not among the constructed ones",
                        matrix.rows()
                    )
                })
            }
            _ => Check::Skip,
        },
    ));

    checks.push(("reduction", reduction_check(&traj, config.eps, scale)));

    TrialResult {
        outcome: outcome.kind().as_str(),
        checks,
    }
}

/// Averages the always-active cheapest firms over the window in which they
/// all produce and compares against the averaged game's update.
fn reduction_check(traj: &Trajectory, eps: f64, scale: f64) -> Check {
    let n_bar = estimate_n_bar(traj, eps);
    if n_bar == 0 {
        return Check::Skip;
    }
    let start = surviving_suffix(traj, n_bar);
    if traj.len() - start < 2 {
        return Check::Skip;
    }
    match reduce_window(traj, n_bar, start..traj.len()) {
        Ok(reduced) => {
            let residual = reduced.update_residual();
            Check::from_residual(residual, 1e-9 * scale, || {
                format!("averaged run misses the averaged update by {residual}")
            })
        }
        Err(e) => Check::Fail {
            residual: 1.0,
            detail: e.to_string(),
        },
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PropertyStats {
    pub passed: u64,
    pub failed: u64,
    pub skipped: u64,
    #[serde(serialize_with = "serialize_f64")]
    pub worst_residual: f64,
}

impl PropertyStats {
    fn record(&mut self, check: &Check) {
        match check {
            Check::Pass { residual } => {
                self.passed += 1;
                self.worst_residual = self.worst_residual.max(*residual);
            }
            Check::Fail { residual, .. } => {
                self.failed += 1;
                self.worst_residual = self.worst_residual.max(*residual);
            }
            Check::Skip => self.skipped += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: u64,
    pub property: String,
    pub instance: Instance,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformanceReport {
    pub config: SweepConfig,
    pub trials: u64,
    pub properties: BTreeMap<String, PropertyStats>,
    /// Trials per outcome kind, or snapshot counts for a falsification run.
    pub outcomes: BTreeMap<String, u64>,
    pub total_failures: u64,
    /// The first [`MAX_COUNTEREXAMPLES`] failures by trial index.
    pub counterexamples: Vec<Counterexample>,
}

impl ConformanceReport {
    fn new(config: &SweepConfig, names: &[&str]) -> Self {
        ConformanceReport {
            config: config.clone(),
            trials: 0,
            properties: names
                .iter()
                .map(|p| (p.to_string(), PropertyStats::default()))
                .collect(),
            outcomes: BTreeMap::new(),
            total_failures: 0,
            counterexamples: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.total_failures == 0
    }

    /// Indented JSON with 17-digit numbers.
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    fn absorb(&mut self, trial: u64, instance: &Instance, result: &TrialResult) {
        self.trials += 1;
        *self.outcomes.entry(result.outcome.to_string()).or_default() += 1;
        for (name, check) in &result.checks {
            self.properties
                .entry(name.to_string())
                .or_default()
                .record(check);
            if let Check::Fail { detail, .. } = check {
                self.total_failures += 1;
                if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    self.counterexamples.push(Counterexample {
                        trial,
                        property: name.to_string(),
                        instance: instance.clone(),
                        detail: detail.clone(),
                    });
                }
            }
        }
    }
}

/// Runs `config.trials` independent trials. An invalid configuration gives
/// an error message instead of a report.
pub fn run_sweep(config: &SweepConfig) -> Result<ConformanceReport, String> {
    config.validate()?;
    let results: Vec<(Instance, TrialResult)> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let instance = draw_instance(config, t);
            let result = check_instance(config, &instance);
            (instance, result)
        })
        .collect();
    let mut report = ConformanceReport::new(config, SWEEP_PROPERTIES);
    for (t, (instance, result)) in results.iter().enumerate() {
        report.absorb(t as u64, instance, result);
    }
    Ok(report)
}

/// Whether `example` still fails its property when re-run on its own.
pub fn replay(config: &SweepConfig, example: &Counterexample) -> bool {
    let result = if FALSIFY_PROPERTIES.contains(&example.property.as_str()) {
        falsify_instance(config, &example.instance)
    } else {
        check_instance(config, &example.instance)
    };
    result
        .checks
        .iter()
        .any(|(name, check)| *name == example.property && check.failed())
}

fn pairwise_distinct(rows: &[Vec<f64>], eps: f64) -> bool {
    (0..rows.len()).all(|i| (i + 1..rows.len()).all(|j| max_abs_diff(&rows[i], &rows[j]) > eps))
}

/// Searches one instance for cycles of length 3 to `max_period`, both in
/// the tail of a run and by iterating a random row.
pub fn falsify_instance(config: &SweepConfig, instance: &Instance) -> TrialResult {
    let params = instance.params();
    let q0 = instance.start(&params);
    let scale = params.capacity().max(1.0);
    let tol = 1e-9 * scale;
    let traj = config
        .classifier()
        .prepare(&run_engine(config, &params, &q0));
    let tail: Vec<Vec<f64>> = traj.states().iter().map(|s| s.values().to_vec()).collect();

    let mut candidates: Vec<Vec<Vec<f64>>> = Vec::new();
    // Iterating from the cost-reversed start gives a second, unrelated orbit.
    let mut row: Vec<f64> = q0.values().iter().rev().copied().collect();
    let mut orbit = vec![row.clone()];
    for _ in 1..config.max_period {
        row = mutated_step(config.mutation, &params, &row);
        orbit.push(row.clone());
    }
    for t in 3..=config.max_period {
        if tail.len() >= t {
            candidates.push(tail[tail.len() - t..].to_vec());
        }
        candidates.push(orbit[..t].to_vec());
    }
    let mut long = Check::Pass { residual: 0.0 };
    for rows in candidates {
        let t = rows.len();
        if !pairwise_distinct(&rows, config.eps) {
            continue;
        }
        let Ok(matrix) = QuantityMatrix::new(rows) else {
            continue;
        };
        let report = verify_quantity_matrix(&params, &matrix, tol).expect("dimensions match");
        if report.valid {
            long = Check::Fail {
                residual: t as f64,
                detail: format!("period-{t} matrix {:?} verifies", matrix.rows()),
            };
            break;
        }
    }

    let mut outcome = "no_cycle_snapshot";
    let mut matched = Check::Skip;
    if tail.len() >= 2 {
        let rows = tail[tail.len() - 2..].to_vec();
        if let (true, Ok(matrix)) = (
            pairwise_distinct(&rows, 10.0 * config.eps),
            QuantityMatrix::new(rows),
        ) {
            if verify_quantity_matrix(&params, &matrix, tol)
                .expect("dimensions match")
                .valid
            {
                outcome = "period_2_snapshot";
                let report = find_all_oscillations(&params);
                matched = Check::from_bool(
                    match_cycle(&report, &matrix, 1e-6 * scale).is_some(),
                    || {
                        format!(
                            "period-2 snapshot {:?} is not among the constructed cycles",
                            matrix.rows()
                        )
                    },
                );
            }
        }
    }
    TrialResult {
        outcome,
        checks: vec![("no_long_cycle", long), ("snapshot_matched", matched)],
    }
}

/// Random search for cycles longer than two. With `max_period < 3` there is
/// nothing to search and the report is vacuously clean.
pub fn falsify_long_cycles(config: &SweepConfig) -> Result<ConformanceReport, String> {
    config.validate()?;
    let results: Vec<(Instance, TrialResult)> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let instance = draw_instance(config, t);
            let result = falsify_instance(config, &instance);
            (instance, result)
        })
        .collect();
    let mut report = ConformanceReport::new(config, FALSIFY_PROPERTIES);
    for (t, (instance, result)) in results.iter().enumerate() {
        report.absorb(t as u64, instance, result);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: u64) -> SweepConfig {
        SweepConfig {
            trials,
            n_max: 5,
            max_steps: 2000,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn empty_sweep() {
        let report = run_sweep(&SweepConfig {
            trials: 0,
            ..SweepConfig::default()
        })
        .unwrap();
        assert!(report.passed());
        assert_eq!(report.trials, 0);
        assert_eq!(report.properties.len(), SWEEP_PROPERTIES.len());
    }

    #[test]
    fn sweep_is_clean_and_deterministic() {
        let config = small(60);
        let a = run_sweep(&config).unwrap();
        assert!(a.passed(), "{:?}", a.counterexamples);
        let b = run_sweep(&config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a
            .properties
            .values()
            .all(|p| p.passed + p.failed + p.skipped == 60));
    }

    #[test]
    fn mutations_are_caught_and_replay() {
        for mutation in [Mutation::NoClamp, Mutation::WrongSlope] {
            let config = SweepConfig {
                mutation,
                ..small(20)
            };
            let report = run_sweep(&config).unwrap();
            assert!(!report.passed(), "{mutation:?}");
            assert!(report.properties["update_oracle"].failed > 0);
            for example in &report.counterexamples {
                assert!(replay(&config, example), "{example:?}");
            }
        }
    }

    #[test]
    fn grid_equal_costs_always_decide() {
        let config = SweepConfig {
            trials: 40,
            n_min: 3,
            n_max: 3,
            capacity_choices: vec![6.0, 12.0],
            costs: CostDistribution::Grid,
            cost_step: 1.0,
            equal_costs: true,
            ..SweepConfig::default()
        };
        let report = run_sweep(&config).unwrap();
        assert!(report.passed(), "{:?}", report.counterexamples);
        assert_eq!(report.outcomes.get("undecided"), None);
        for t in 0..40 {
            let c = draw_instance(&config, t).costs;
            assert!(c.iter().all(|x| *x == c[0] && *x == x.round()));
        }
    }

    #[test]
    fn degenerate_instances_are_drawn() {
        let config = SweepConfig {
            trials: 200,
            degenerate_fraction: 0.5,
            ..small(200)
        };
        let degenerate = (0..200).filter(|t| {
            let i = draw_instance(&config, *t);
            i.costs.iter().all(|c| *c >= i.capacity)
        });
        assert!(degenerate.count() > 50);
    }

    #[test]
    fn falsification_finds_nothing_long() {
        let report = falsify_long_cycles(&small(40)).unwrap();
        assert!(report.passed(), "{:?}", report.counterexamples);
        let trio = SweepConfig {
            n_min: 3,
            n_max: 3,
            equal_costs: true,
            ..small(30)
        };
        let report = falsify_long_cycles(&trio).unwrap();
        assert!(report.passed());
        assert!(
            report
                .outcomes
                .get("period_2_snapshot")
                .copied()
                .unwrap_or(0)
                > 0
        );
        let vacuous = SweepConfig {
            max_period: 2,
            ..small(10)
        };
        assert_eq!(
            falsify_long_cycles(&vacuous).unwrap().properties["no_long_cycle"].failed,
            0
        );
    }

    #[test]
    fn invalid_configs() {
        assert!(run_sweep(&SweepConfig {
            n_min: 0,
            ..SweepConfig::default()
        })
        .is_err());
        assert!(run_sweep(&SweepConfig {
            capacity_min: -1.0,
            ..SweepConfig::default()
        })
        .is_err());
        assert!(run_sweep(&SweepConfig {
            eps: 0.0,
            ..SweepConfig::default()
        })
        .is_err());
    }
}
