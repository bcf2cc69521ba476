//! Game instance and the simultaneous best-response update.
//!
//! Firms are indexed 0-based in ascending cost order throughout the crate.
//! [`GameParams`] remembers where each firm sat in the caller's ordering so
//! results can be reported back in that order.

use thiserror::Error;

use crate::scalar::{Exact, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("market capacity must be positive and finite, got {0}")]
    InvalidCapacity(f64),
    #[error("cost of firm {firm} must be finite and non-negative, got {value}")]
    InvalidCost { firm: usize, value: f64 },
    #[error("a game needs at least one firm")]
    NoFirms,
    #[error("expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("firm index {index} out of range for {n} firms")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("quantity of firm {firm} must be finite and non-negative, got {value}")]
    InvalidQuantity { firm: usize, value: f64 },
    #[error("a quantity matrix needs at least one row")]
    EmptyMatrix,
}

/// Market capacity `A` and per-unit costs, stored in ascending cost order.
#[derive(Debug, Clone, PartialEq)]
pub struct GameParams<S = f64> {
    capacity: S,
    costs: Vec<S>,
    /// `user_index[i]` is the caller's position of the `i`-th cheapest firm.
    user_index: Vec<usize>,
}

impl<S: Scalar> GameParams<S> {
    /// Builds a game from costs in the caller's order. Ties keep their
    /// relative order.
    pub fn new(capacity: S, costs: impl Into<Vec<S>>) -> Result<Self, ModelError> {
        let costs = costs.into();
        if !capacity.is_finite() || capacity <= S::zero() {
            return Err(ModelError::InvalidCapacity(capacity.to_f64()));
        }
        if costs.is_empty() {
            return Err(ModelError::NoFirms);
        }
        for (firm, c) in costs.iter().enumerate() {
            if !c.is_finite() || *c < S::zero() {
                return Err(ModelError::InvalidCost {
                    firm,
                    value: c.to_f64(),
                });
            }
        }
        let mut user_index: Vec<usize> = (0..costs.len()).collect();
        user_index.sort_by(|&a, &b| costs[a].partial_cmp(&costs[b]).expect("validated costs"));
        let sorted = user_index.iter().map(|&u| costs[u].clone()).collect();
        Ok(GameParams {
            capacity,
            costs: sorted,
            user_index,
        })
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn capacity(&self) -> &S {
        &self.capacity
    }

    /// Costs in ascending order.
    pub fn costs(&self) -> &[S] {
        &self.costs
    }

    pub fn cost(&self, firm: usize) -> &S {
        &self.costs[firm]
    }

    pub fn user_index(&self) -> &[usize] {
        &self.user_index
    }

    pub fn user_costs(&self) -> Vec<S> {
        self.to_user_order(&self.costs)
    }

    /// Rearranges per-firm values from sorted order into the caller's order.
    pub fn to_user_order<T: Clone>(&self, sorted: &[T]) -> Vec<T> {
        let mut out = sorted.to_vec();
        for (i, &u) in self.user_index.iter().enumerate() {
            out[u] = sorted[i].clone();
        }
        out
    }

    /// Rearranges per-firm values from the caller's order into sorted order.
    pub fn from_user_order<T: Clone>(&self, user: &[T]) -> Vec<T> {
        self.user_index.iter().map(|&u| user[u].clone()).collect()
    }

    /// The same game over another scalar type. Lossless from `f64` to
    /// [`Exact`]; rounds the other way.
    pub fn convert<T: Scalar>(&self) -> GameParams<T> {
        GameParams {
            capacity: T::from_f64(self.capacity.to_f64()),
            costs: self.costs.iter().map(|c| T::from_f64(c.to_f64())).collect(),
            user_index: self.user_index.clone(),
        }
    }

    /// Replaces the sorted cost vector, keeping the firm mapping. The new
    /// costs must still be ascending.
    pub(crate) fn with_sorted_costs(&self, costs: Vec<S>) -> Self {
        debug_assert_eq!(costs.len(), self.n());
        debug_assert!(costs.windows(2).all(|w| w[0] <= w[1]));
        GameParams {
            capacity: self.capacity.clone(),
            costs,
            user_index: self.user_index.clone(),
        }
    }

    fn check_len(&self, found: usize) -> Result<(), ModelError> {
        if found != self.n() {
            return Err(ModelError::DimensionMismatch {
                expected: self.n(),
                found,
            });
        }
        Ok(())
    }

    fn check_firm(&self, index: usize) -> Result<(), ModelError> {
        if index >= self.n() {
            return Err(ModelError::IndexOutOfRange { index, n: self.n() });
        }
        Ok(())
    }
}

impl GameParams<f64> {
    pub fn exact(&self) -> GameParams<Exact> {
        self.convert()
    }
}

/// One round's outputs, in sorted firm order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityVector<S = f64> {
    values: Vec<S>,
    round: u64,
}

impl<S: Scalar> QuantityVector<S> {
    pub fn new(values: impl Into<Vec<S>>) -> Result<Self, ModelError> {
        let values = values.into();
        for (firm, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < S::zero() {
                return Err(ModelError::InvalidQuantity {
                    firm,
                    value: v.to_f64(),
                });
            }
        }
        let values = values
            .into_iter()
            .map(|v| if v == S::zero() { S::zero() } else { v })
            .collect();
        Ok(QuantityVector { values, round: 0 })
    }

    /// A vector for `params`, checking the length as well.
    pub fn for_game(params: &GameParams<S>, values: impl Into<Vec<S>>) -> Result<Self, ModelError> {
        let q = Self::new(values)?;
        params.check_len(q.len())?;
        Ok(q)
    }

    pub fn zeros(n: usize) -> Self {
        QuantityVector {
            values: vec![S::zero(); n],
            round: 0,
        }
    }

    pub(crate) fn from_parts(values: Vec<S>, round: u64) -> Self {
        QuantityVector { values, round }
    }

    pub fn at_round(mut self, round: u64) -> Self {
        self.round = round;
        self
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> S {
        sum(&self.values)
    }
}

/// Profit of one firm in one round.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Payoff<S = f64>(pub S);

pub(crate) fn sum<S: Scalar>(values: &[S]) -> S {
    values.iter().cloned().fold(S::zero(), |acc, v| acc + v)
}

/// `A - sum(q)`. Negative when the market is oversupplied.
pub fn price<S: Scalar>(params: &GameParams<S>, q: &QuantityVector<S>) -> Result<S, ModelError> {
    params.check_len(q.len())?;
    Ok(params.capacity.clone() - q.total())
}

/// `(A - sum(q) - c_i) * q_i`.
pub fn utility<S: Scalar>(
    params: &GameParams<S>,
    q: &QuantityVector<S>,
    firm: usize,
) -> Result<Payoff<S>, ModelError> {
    params.check_firm(firm)?;
    let margin = price(params, q)? - params.costs[firm].clone();
    Ok(Payoff(margin * q.values[firm].clone()))
}

/// Best response against a known total of rivals' outputs:
/// `max(0, (A - others - c_i) / 2)`. Never returns a negative zero.
pub(crate) fn respond<S: Scalar>(capacity: &S, cost: &S, others: S) -> S {
    let x = (capacity.clone() - others - cost.clone()).half();
    if x > S::zero() {
        x
    } else {
        S::zero()
    }
}

pub fn best_response<S: Scalar>(
    params: &GameParams<S>,
    q: &QuantityVector<S>,
    firm: usize,
) -> Result<S, ModelError> {
    params.check_firm(firm)?;
    params.check_len(q.len())?;
    let others = q.total() - q.values[firm].clone();
    Ok(respond(&params.capacity, &params.costs[firm], others))
}

/// Every firm's best response to the same previous round.
pub(crate) fn step_values<S: Scalar>(params: &GameParams<S>, q: &[S]) -> Vec<S> {
    let total = sum(q);
    q.iter()
        .zip(&params.costs)
        .map(|(own, cost)| respond(&params.capacity, cost, total.clone() - own.clone()))
        .collect()
}

/// Simultaneous update of all firms; the round counter advances by one.
pub fn step<S: Scalar>(
    params: &GameParams<S>,
    q: &QuantityVector<S>,
) -> Result<QuantityVector<S>, ModelError> {
    params.check_len(q.len())?;
    Ok(QuantityVector {
        values: step_values(params, &q.values),
        round: q.round + 1,
    })
}

/// Whether `q` moves by at most `tol` (sup norm) under one update.
pub fn is_equilibrium<S: Scalar>(
    params: &GameParams<S>,
    q: &QuantityVector<S>,
    tol: f64,
) -> Result<bool, ModelError> {
    let next = step(params, q)?;
    let gap = crate::scalar::max_abs_diff(next.values(), q.values());
    Ok(gap <= S::from_f64(tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(a: f64, costs: &[f64]) -> GameParams {
        GameParams::new(a, costs.to_vec()).unwrap()
    }

    fn qv(values: &[f64]) -> QuantityVector {
        QuantityVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn price_examples() {
        assert_eq!(
            price(&game(20.0, &[0.0; 4]), &qv(&[10.0; 4])).unwrap(),
            -20.0
        );
        assert_eq!(price(&game(20.0, &[0.0; 4]), &qv(&[0.0; 4])).unwrap(), 20.0);
        assert_eq!(
            price(&game(10.0, &[0.0; 3]), &qv(&[3.0, 0.0, 0.0])).unwrap(),
            7.0
        );
    }

    #[test]
    fn utility_examples() {
        let g = game(20.0, &[0.0; 4]);
        assert_eq!(utility(&g, &qv(&[10.0; 4]), 0).unwrap(), Payoff(-200.0));
        assert_eq!(
            utility(&g, &qv(&[10.0, 0.0, 3.0, 1.0]), 1).unwrap(),
            Payoff(0.0)
        );
        let g = game(10.0, &[0.0, 3.0, 3.0]);
        assert_eq!(utility(&g, &qv(&[3.0, 0.0, 0.0]), 0).unwrap(), Payoff(21.0));
    }

    #[test]
    fn best_response_examples() {
        let g = game(20.0, &[0.0; 4]);
        assert_eq!(best_response(&g, &qv(&[10.0; 4]), 0).unwrap(), 0.0);
        assert_eq!(best_response(&g, &qv(&[0.0; 4]), 0).unwrap(), 10.0);
        let g = game(10.0, &[3.0, 3.0]);
        assert_eq!(best_response(&g, &qv(&[0.0, 3.0]), 0).unwrap(), 2.0);
    }

    #[test]
    fn step_examples() {
        let g = game(20.0, &[0.0; 4]);
        assert_eq!(step(&g, &qv(&[10.0; 4])).unwrap().values(), &[0.0; 4]);
        let next = step(&g, &qv(&[0.0; 4])).unwrap();
        assert_eq!(next.values(), &[10.0; 4]);
        assert_eq!(next.round(), 1);
        let mono = game(8.0, &[2.0]);
        for start in [0.0, 3.0, 100.0] {
            assert_eq!(step(&mono, &qv(&[start])).unwrap().values(), &[3.0]);
        }
    }

    #[test]
    fn equilibrium_examples() {
        assert!(is_equilibrium(&game(8.0, &[2.0]), &qv(&[3.0]), 0.0).unwrap());
        assert!(is_equilibrium(&game(12.0, &[0.0, 0.0]), &qv(&[4.0, 4.0]), 0.0).unwrap());
        assert!(!is_equilibrium(&game(20.0, &[0.0; 4]), &qv(&[10.0; 4]), 1e-9).unwrap());
    }

    #[test]
    fn clamp_yields_positive_zero() {
        let g = game(1.0, &[1.0]);
        let r = best_response(&g, &qv(&[5.0]), 0).unwrap();
        assert!(r == 0.0 && r.is_sign_positive());
    }

    #[test]
    fn errors() {
        let g = game(10.0, &[1.0, 2.0]);
        assert_eq!(
            price(&g, &qv(&[1.0])),
            Err(ModelError::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
        assert_eq!(
            utility(&g, &qv(&[1.0, 1.0]), 2),
            Err(ModelError::IndexOutOfRange { index: 2, n: 2 })
        );
        assert!(best_response(&g, &qv(&[1.0, 1.0]), 7).is_err());
        assert!(step(&g, &qv(&[1.0, 1.0, 1.0])).is_err());
        assert_eq!(
            GameParams::new(0.0, vec![1.0]),
            Err(ModelError::InvalidCapacity(0.0))
        );
        assert_eq!(
            GameParams::<f64>::new(1.0, vec![]),
            Err(ModelError::NoFirms)
        );
        assert!(matches!(
            GameParams::new(1.0, vec![0.0, -1.0]),
            Err(ModelError::InvalidCost { firm: 1, .. })
        ));
        assert!(GameParams::new(f64::NAN, vec![0.0]).is_err());
        assert!(QuantityVector::new(vec![1.0, -0.5]).is_err());
        assert!(QuantityVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn costs_are_sorted_and_order_round_trips() {
        let g = game(10.0, &[3.0, 0.0, 3.0, 1.0]);
        assert_eq!(g.costs(), &[0.0, 1.0, 3.0, 3.0]);
        assert_eq!(g.user_index(), &[1, 3, 0, 2]);
        assert_eq!(g.user_costs(), vec![3.0, 0.0, 3.0, 1.0]);
        let user = vec!["a", "b", "c", "d"];
        assert_eq!(g.to_user_order(&g.from_user_order(&user)), user);
    }

    #[test]
    fn exact_and_float_agree_on_dyadic_inputs() {
        let g = game(20.0, &[0.0, 1.0, 2.0, 3.0]);
        let q = qv(&[1.5, 2.25, 0.0, 7.0]);
        let e = g.exact();
        let qe = QuantityVector::new(
            q.values()
                .iter()
                .map(|&x| Exact::from_f64(x))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let a = step(&g, &q).unwrap();
        let b = step(&e, &qe).unwrap();
        let b: Vec<f64> = b.values().iter().map(Scalar::to_f64).collect();
        assert_eq!(a.values(), b.as_slice());
    }
}
