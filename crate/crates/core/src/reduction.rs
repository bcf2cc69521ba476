//! Averaged game: the cheapest `n_bar` firms replaced by identical firms at
//! their mean cost, with their outputs averaged round by round.
//!
//! While those firms all produce positive output, the averaged sequence is
//! itself a best-response trajectory of the averaged game.

use std::ops::Range;

use thiserror::Error;

use crate::dynamics::{survivor_count, Trajectory};
use crate::model::{GameParams, QuantityVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("n_bar must be between 1 and {n}, got {n_bar}")]
    InvalidSize { n_bar: usize, n: usize },
    #[error("averaged cost {mean} exceeds the cost {next} of the next firm")]
    SortOrderViolation { mean: f64, next: f64 },
    #[error("firm {firm} has zero output at round {round}, so it does not survive the window")]
    HypothesisViolation { round: u64, firm: usize },
    #[error("window {start}..{end} does not fit a trajectory of {len} states")]
    InvalidWindow {
        start: usize,
        end: usize,
        len: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGame<S = f64> {
    pub params: GameParams<S>,
    pub n_bar: usize,
}

/// Mean of `values`, returned verbatim when they are all equal so that
/// symmetric blocks stay bit-identical.
fn block_mean<S: Scalar>(values: &[S]) -> S {
    if values.windows(2).all(|w| w[0] == w[1]) {
        return values[0].clone();
    }
    let total = values.iter().cloned().fold(S::zero(), |acc, v| acc + v);
    total / S::from_i64(values.len() as i64)
}

pub fn reduce_game<S: Scalar>(
    params: &GameParams<S>,
    n_bar: usize,
) -> Result<ReducedGame<S>, ReductionError> {
    let n = params.n();
    if n_bar == 0 || n_bar > n {
        return Err(ReductionError::InvalidSize { n_bar, n });
    }
    let costs = params.costs();
    let mean = block_mean(&costs[..n_bar]);
    if n_bar < n && mean > costs[n_bar] {
        return Err(ReductionError::SortOrderViolation {
            mean: mean.to_f64(),
            next: costs[n_bar].to_f64(),
        });
    }
    let mut reduced = costs.to_vec();
    reduced[..n_bar].fill(mean);
    Ok(ReducedGame {
        params: params.with_sorted_costs(reduced),
        n_bar,
    })
}

/// Averages the first `n_bar` coordinates of every state.
pub fn reduce_trajectory<S: Scalar>(
    traj: &Trajectory<S>,
    n_bar: usize,
) -> Result<Trajectory<S>, ReductionError> {
    reduce_window(traj, n_bar, 0..traj.len())
}

/// [`reduce_trajectory`] restricted to the states in `window`.
pub fn reduce_window<S: Scalar>(
    traj: &Trajectory<S>,
    n_bar: usize,
    window: Range<usize>,
) -> Result<Trajectory<S>, ReductionError> {
    let reduced = reduce_game(traj.params(), n_bar)?;
    if window.start >= window.end || window.end > traj.len() {
        return Err(ReductionError::InvalidWindow {
            start: window.start,
            end: window.end,
            len: traj.len(),
        });
    }
    let mut states = Vec::with_capacity(window.len());
    for state in &traj.states()[window] {
        let values = state.values();
        if let Some(firm) = values[..n_bar].iter().position(|v| *v <= S::zero()) {
            return Err(ReductionError::HypothesisViolation {
                round: state.round(),
                firm,
            });
        }
        let mut averaged = values.to_vec();
        averaged[..n_bar].fill(block_mean(&values[..n_bar]));
        states.push(QuantityVector::from_parts(averaged, state.round()));
    }
    Ok(Trajectory::from_states(reduced.params, states))
}

/// Smallest survivor count over the trailing half of the trajectory, the
/// practical stand-in for the number of firms that survive forever.
pub fn estimate_n_bar<S: Scalar>(traj: &Trajectory<S>, eps: f64) -> usize {
    let half = traj.len() / 2;
    traj.states()[half..]
        .iter()
        .map(|s| survivor_count(s, eps))
        .min()
        .unwrap_or(0)
}

/// Start of the longest suffix in which the first `n_bar` firms all have
/// positive output; equals `traj.len()` when even the last state fails.
pub fn surviving_suffix<S: Scalar>(traj: &Trajectory<S>, n_bar: usize) -> usize {
    let states = traj.states();
    let mut start = states.len();
    while start > 0
        && states[start - 1].values()[..n_bar]
            .iter()
            .all(|v| *v > S::zero())
    {
        start -= 1;
    }
    start
}
