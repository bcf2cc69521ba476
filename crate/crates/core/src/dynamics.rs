//! Trajectories of the best-response map and their limit behaviour.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hasher};
use std::io::{self, Write};

use thiserror::Error;

use crate::format::sig17;
use crate::model::{self, GameParams, ModelError, QuantityVector};
use crate::oscillation::QuantityMatrix;
use crate::scalar::{max_abs_diff, Scalar};

pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_MAX_PERIOD: usize = 12;
pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("trajectory has {len} states, period detection needs more than {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("invalid firm pair ({i}, {j}): need distinct firms with c_i >= c_j")]
    InvalidPair { i: usize, j: usize },
    #[error("{0}")]
    InvalidArgument(String),
}

/// States `q^0, q^1, ...` with `states[t + 1] = step(states[t])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S = f64> {
    params: GameParams<S>,
    states: Vec<QuantityVector<S>>,
    truncated: bool,
    /// Index of the earlier state equal to the last one.
    repeat_of: Option<usize>,
}

impl<S: Scalar> Trajectory<S> {
    pub(crate) fn from_states(params: GameParams<S>, states: Vec<QuantityVector<S>>) -> Self {
        Trajectory {
            params,
            states,
            truncated: true,
            repeat_of: None,
        }
    }

    pub fn params(&self) -> &GameParams<S> {
        &self.params
    }

    pub fn states(&self) -> &[QuantityVector<S>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &QuantityVector<S> {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }

    /// True when the step budget ran out before any state repeated exactly.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// `(first index of the cycle, period)` when the run ended on an exact
    /// repeat.
    pub fn exact_cycle(&self) -> Option<(usize, usize)> {
        self.repeat_of.map(|j| (j, self.len() - 1 - j))
    }

    /// Extends an exactly cycling trajectory to at least `min_len` states by
    /// replaying its cycle. The result equals what an uninterrupted
    /// simulation would have produced. Truncated trajectories are returned
    /// unchanged.
    pub fn unrolled(&self, min_len: usize) -> Trajectory<S> {
        let mut out = self.clone();
        let Some((start, period)) = self.exact_cycle() else {
            return out;
        };
        let last = self.len() - 1;
        let mut k = 1;
        while out.states.len() < min_len {
            let src = &self.states[start + k % period];
            out.states.push(QuantityVector::from_parts(
                src.values().to_vec(),
                (last + k) as u64,
            ));
            k += 1;
        }
        out.repeat_of = Some(out.states.len() - 1 - period);
        out
    }

    /// Largest deviation of any recorded transition from the update map.
    pub fn update_residual(&self) -> S {
        self.states
            .windows(2)
            .map(|w| {
                max_abs_diff(
                    &model::step_values(&self.params, w[0].values()),
                    w[1].values(),
                )
            })
            .fold(S::zero(), |acc, d| if d > acc { d } else { acc })
    }

    /// CSV with header `round,q_1,...,q_n`, firms in the caller's order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.params.n();
        let header: Vec<String> = (1..=n).map(|i| format!("q_{i}")).collect();
        writeln!(out, "round,{}", header.join(","))?;
        for state in &self.states {
            let user = self.params.to_user_order(state.values());
            let cells: Vec<String> = user.iter().map(|v| sig17(v.to_f64())).collect();
            writeln!(out, "{},{}", state.round(), cells.join(","))?;
        }
        Ok(())
    }
}

fn state_hash<S: Scalar>(values: &[S]) -> u64 {
    let mut h = DefaultHasher::new();
    for v in values {
        v.hash_value(&mut h);
    }
    h.finish()
}

/// Iterates the best-response map from `q0` for at most `max_steps` rounds,
/// stopping early once a state repeats exactly.
pub fn simulate<S: Scalar>(
    params: &GameParams<S>,
    q0: &QuantityVector<S>,
    max_steps: usize,
) -> Result<Trajectory<S>, ModelError> {
    simulate_with(params, q0, max_steps, model::step_values)
}

/// [`simulate`] with a caller-supplied update rule in place of the
/// best-response map. Used by the conformance harness to run deliberately
/// broken engines.
pub fn simulate_with<S, F>(
    params: &GameParams<S>,
    q0: &QuantityVector<S>,
    max_steps: usize,
    mut update: F,
) -> Result<Trajectory<S>, ModelError>
where
    S: Scalar,
    F: FnMut(&GameParams<S>, &[S]) -> Vec<S>,
{
    let q0 = QuantityVector::for_game(params, q0.values().to_vec())?.at_round(0);
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    seen.entry(state_hash(q0.values())).or_default().push(0);
    let mut states = vec![q0];
    let mut repeat_of = None;
    for t in 1..=max_steps {
        let next = update(params, states[t - 1].values());
        let h = state_hash(&next);
        let bucket = seen.entry(h).or_default();
        let earlier = bucket
            .iter()
            .copied()
            .find(|&j| states[j].values() == next.as_slice());
        bucket.push(t);
        states.push(QuantityVector::from_parts(next, t as u64));
        if earlier.is_some() {
            repeat_of = earlier;
            break;
        }
    }
    Ok(Trajectory {
        params: params.clone(),
        truncated: repeat_of.is_none(),
        states,
        repeat_of,
    })
}

/// Smallest `p <= max_period` such that the trailing `2 * max_period` states
/// satisfy `|q^t - q^{t-p}|_inf < eps` for every `t` inside the window.
pub fn detect_period<S: Scalar>(
    traj: &Trajectory<S>,
    eps: f64,
    max_period: usize,
) -> Result<Option<usize>, DynamicsError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(DynamicsError::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if max_period == 0 {
        return Err(DynamicsError::InvalidArgument(
            "max_period must be at least 1".into(),
        ));
    }
    let window = 2 * max_period;
    if traj.len() <= window {
        return Err(DynamicsError::TooShort {
            len: traj.len(),
            needed: window,
        });
    }
    let eps = S::from_f64(eps);
    let start = traj.len() - window;
    let states = traj.states();
    let found = (1..=max_period).find(|&p| {
        (start + p..traj.len())
            .all(|t| max_abs_diff(states[t].values(), states[t - p].values()) < eps)
    });
    Ok(found)
}

pub fn survivor_count<S: Scalar>(q: &QuantityVector<S>, eps: f64) -> usize {
    let eps = S::from_f64(eps);
    q.values().iter().filter(|v| **v > eps).count()
}

/// Limit behaviour of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsOutcome {
    Equilibrium {
        witness: QuantityVector,
        settle_round: u64,
    },
    /// Rows are ordered by phase: row 0 holds the even rounds.
    TwoCycle {
        matrix: QuantityMatrix,
        settle_round: u64,
    },
    /// No period up to the scan limit was found within the step budget. A
    /// period found beyond 2 is reported here as well.
    Undecided { rounds: u64, period: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    Equilibrium,
    TwoCycle,
    Undecided,
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Equilibrium => "equilibrium",
            OutcomeKind::TwoCycle => "two_cycle",
            OutcomeKind::Undecided => "undecided",
        }
    }
}

impl DynamicsOutcome {
    pub fn kind(&self) -> OutcomeKind {
        match self {
            DynamicsOutcome::Equilibrium { .. } => OutcomeKind::Equilibrium,
            DynamicsOutcome::TwoCycle { .. } => OutcomeKind::TwoCycle,
            DynamicsOutcome::Undecided { .. } => OutcomeKind::Undecided,
        }
    }
}

/// Settings for turning a run into a [`DynamicsOutcome`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classifier {
    pub max_steps: usize,
    pub eps: f64,
    pub max_period: usize,
}

impl Default for Classifier {
    fn default() -> Self {
        Classifier {
            max_steps: DEFAULT_MAX_STEPS,
            eps: DEFAULT_EPS,
            max_period: DEFAULT_MAX_PERIOD,
        }
    }
}

impl Classifier {
    /// Rounds discarded before the trailing window may be trusted.
    pub fn burn_in(n: usize) -> usize {
        64.max(10 * n)
    }

    pub fn classify(
        &self,
        params: &GameParams,
        q0: &QuantityVector,
    ) -> Result<DynamicsOutcome, DynamicsError> {
        Ok(self.run(params, q0)?.1)
    }

    /// Simulates and classifies, returning the raw trajectory as well.
    pub fn run(
        &self,
        params: &GameParams,
        q0: &QuantityVector,
    ) -> Result<(Trajectory, DynamicsOutcome), DynamicsError> {
        let traj = simulate(params, q0, self.max_steps)?;
        let outcome = self.classify_trajectory(&traj)?;
        Ok((traj, outcome))
    }

    /// `traj` extended along its exact cycle, if it ended on one, so that
    /// the detection window lies past the burn-in and inside the cycle.
    pub fn prepare<S: Scalar>(&self, traj: &Trajectory<S>) -> Trajectory<S> {
        let window = 2 * self.max_period;
        let needed = Self::burn_in(traj.params().n()) + window + 1;
        let min_len = match traj.exact_cycle() {
            Some((start, _)) => needed.max(start + window + 1),
            None => needed,
        };
        traj.unrolled(min_len)
    }

    pub fn classify_trajectory(&self, traj: &Trajectory) -> Result<DynamicsOutcome, DynamicsError> {
        let needed = Self::burn_in(traj.params().n()) + 2 * self.max_period + 1;
        let traj = self.prepare(traj);
        let rounds = traj.last().round();
        if traj.len() < needed {
            return Ok(DynamicsOutcome::Undecided {
                rounds,
                period: None,
            });
        }
        let period = match detect_period(&traj, self.eps, self.max_period)? {
            Some(p) if p <= 2 => p,
            other => {
                return Ok(DynamicsOutcome::Undecided {
                    rounds,
                    period: other,
                })
            }
        };
        let settle_round = settle_round(&traj, period, self.eps);
        let states = traj.states();
        let last = &states[states.len() - 1];
        if period == 2 {
            let prev = &states[states.len() - 2];
            let gap = max_abs_diff(last.values(), prev.values());
            if gap > 10.0 * self.eps {
                let (even, odd) = if last.round().is_multiple_of(2) {
                    (last, prev)
                } else {
                    (prev, last)
                };
                let matrix =
                    QuantityMatrix::new(vec![even.values().to_vec(), odd.values().to_vec()])?;
                return Ok(DynamicsOutcome::TwoCycle {
                    matrix,
                    settle_round,
                });
            }
        }
        Ok(DynamicsOutcome::Equilibrium {
            witness: last.clone(),
            settle_round,
        })
    }
}

/// Earliest round from which every later state is within `eps` of the state
/// `period` rounds before it.
fn settle_round<S: Scalar>(traj: &Trajectory<S>, period: usize, eps: f64) -> u64 {
    let eps = S::from_f64(eps);
    let states = traj.states();
    let mut t = states.len() - 1;
    while t >= period && max_abs_diff(states[t].values(), states[t - period].values()) < eps {
        t -= 1;
    }
    if t < period {
        0
    } else {
        states[t - period + 1].round()
    }
}

/// Runs `params` from `q0` with default period settings.
pub fn classify(
    params: &GameParams,
    q0: &QuantityVector,
    max_steps: usize,
    eps: f64,
) -> Result<DynamicsOutcome, DynamicsError> {
    Classifier {
        max_steps,
        eps,
        ..Classifier::default()
    }
    .classify(params, q0)
}

/// `Q^t = q_i^t - q_j^t` along a trajectory for a pair with `c_i >= c_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceTrace {
    pub i: usize,
    pub j: usize,
    pub values: Vec<f64>,
    pub delta_c: f64,
}

impl DifferenceTrace {
    fn bound(&self, q: f64) -> (f64, f64) {
        let f = 0.5 * q - 0.5 * self.delta_c;
        (f.min(0.0), f.max(0.0))
    }

    /// Worst amount by which a transition leaves the region
    /// `min(0, f(Q)) <= Q' <= max(0, f(Q))`, `f(Q) = (Q - delta_c) / 2`.
    pub fn envelope_violation(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| {
                let (lo, hi) = self.bound(w[0]);
                (lo - w[1]).max(w[1] - hi).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// First `t` whose transition to `t + 1` leaves the envelope by more
    /// than `tol`.
    pub fn first_envelope_violation(&self, tol: f64) -> Option<usize> {
        self.values.windows(2).position(|w| {
            let (lo, hi) = self.bound(w[0]);
            w[1] < lo - tol || w[1] > hi + tol
        })
    }

    /// Smallest `T` with `Q^t <= tol` for every recorded `t >= T`; `None`
    /// when the last value is still above `tol`.
    pub fn settle_round(&self, tol: f64) -> Option<usize> {
        let bad = self.values.iter().rposition(|&v| v > tol);
        match bad {
            None => Some(0),
            Some(t) if t + 1 < self.values.len() => Some(t + 1),
            Some(_) => None,
        }
    }

    /// Worst excess of `|Q^{t+1}|` over `|Q^t| / 2`. Only meaningful for
    /// equal costs, where it is non-positive.
    pub fn halving_excess(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1].abs() - 0.5 * w[0].abs())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn difference_trace(
    traj: &Trajectory,
    i: usize,
    j: usize,
) -> Result<DifferenceTrace, DynamicsError> {
    let params = traj.params();
    let n = params.n();
    if i == j || i >= n || j >= n || params.cost(i) < params.cost(j) {
        return Err(DynamicsError::InvalidPair { i, j });
    }
    let values = traj
        .states()
        .iter()
        .map(|s| s.values()[i] - s.values()[j])
        .collect();
    Ok(DifferenceTrace {
        i,
        j,
        values,
        delta_c: params.cost(i) - params.cost(j),
    })
}
