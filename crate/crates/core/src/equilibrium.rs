//! Nash equilibrium of the one-shot game via support search.
//!
//! At an equilibrium with the `m` cheapest firms active, every active firm
//! produces `A - c_i - Q` where `Q = (m A - sum_{i<m} c_i) / (m + 1)` is the
//! total output. The support is the largest `m` for which all active outputs
//! are positive and the next firm would not enter.

use crate::model::{GameParams, QuantityVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution<S = f64> {
    pub q_star: QuantityVector<S>,
    pub support_size: usize,
    pub total: S,
}

impl<S: Scalar> EquilibriumSolution<S> {
    pub fn price(&self, params: &GameParams<S>) -> S {
        params.capacity().clone() - self.total.clone()
    }
}

/// Feasibility of one candidate support size.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportCheck<S = f64> {
    pub m: usize,
    /// Total output the candidate would produce.
    pub total: S,
    /// Every active firm has positive output.
    pub interior: bool,
    /// No inactive firm has a positive best response.
    pub exclusion: bool,
}

impl<S> SupportCheck<S> {
    pub fn feasible(&self) -> bool {
        self.interior && self.exclusion
    }
}

pub(crate) fn prefix_sums<S: Scalar>(values: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(S::zero());
    for v in values {
        let next = out.last().expect("seeded").clone() + v.clone();
        out.push(next);
    }
    out
}

fn check_support<S: Scalar>(params: &GameParams<S>, prefix: &[S], m: usize) -> SupportCheck<S> {
    let a = params.capacity().clone();
    let n = params.n();
    let slack = S::slack(a.to_f64());
    let total = (S::from_i64(m as i64) * a.clone() - prefix[m].clone()) / S::from_i64(m as i64 + 1);
    let interior = m == 0 || a.clone() - params.cost(m - 1).clone() - total.clone() > S::zero();
    let exclusion = m == n || a - total.clone() - params.cost(m).clone() <= slack;
    SupportCheck {
        m,
        total,
        interior,
        exclusion,
    }
}

/// Conditions for every support size `0..=n`.
pub fn equilibrium_support_scan<S: Scalar>(params: &GameParams<S>) -> Vec<SupportCheck<S>> {
    let prefix = prefix_sums(params.costs());
    (0..=params.n())
        .map(|m| check_support(params, &prefix, m))
        .collect()
}

/// The fixed point of the clamped best-response map.
pub fn nash_equilibrium<S: Scalar>(params: &GameParams<S>) -> EquilibriumSolution<S> {
    let prefix = prefix_sums(params.costs());
    let chosen = (0..=params.n())
        .rev()
        .map(|m| check_support(params, &prefix, m))
        .find(SupportCheck::feasible)
        // Only rounding can leave every size infeasible; the all-zero
        // vector is then the closest candidate.
        .unwrap_or_else(|| SupportCheck {
            m: 0,
            total: S::zero(),
            interior: true,
            exclusion: true,
        });
    let a = params.capacity();
    let values: Vec<S> = (0..params.n())
        .map(|i| {
            if i < chosen.m {
                a.clone() - params.cost(i).clone() - chosen.total.clone()
            } else {
                S::zero()
            }
        })
        .collect();
    let q_star = QuantityVector::from_parts(values, 0);
    let total = q_star.total();
    EquilibriumSolution {
        support_size: chosen.m,
        q_star,
        total,
    }
}
