//! Period-2 oscillations of the best-response dynamics.
//!
//! Every 2-cycle has nested supports: the firms active in the quieter row are
//! the `k1` cheapest, and the louder row adds the next `k2` firms. Three
//! shapes are possible:
//!
//! * Case 1, `k1 = 0`: nobody produces in one row, the `k` firms with
//!   `c_i < A` produce their monopoly output in the other.
//! * Case 2, `k1` in {1, 2}: a unique cycle, except for `k1 = 1, k2 = 4`
//!   where a whole interval of cycles appears under an equality on costs.
//! * Case 3, `k1 = 3, k2 = 0`: the three cheapest firms swing around their
//!   three-firm equilibrium by `+-delta_a / 2`, a one-parameter family.

mod family;
mod matrix;
mod shape;

use std::fmt;

use thiserror::Error;

pub use family::{Affine, Bound, Family, FamilyParameter, Interval};
pub use matrix::{verify_quantity_matrix, Cell, QuantityMatrix, VerifyReport};
pub use shape::{cycle_shape, match_cycle, CycleShape};

use crate::equilibrium::{nash_equilibrium, prefix_sums, EquilibriumSolution};
use crate::model::{GameParams, ModelError};
use crate::scalar::Scalar;
use family::{template_interval, Pattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OscillationCase {
    Case1,
    Case2,
    Case3,
}

impl OscillationCase {
    pub fn number(self) -> u8 {
        match self {
            OscillationCase::Case1 => 1,
            OscillationCase::Case2 => 2,
            OscillationCase::Case3 => 3,
        }
    }
}

impl fmt::Display for OscillationCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}", self.number())
    }
}

/// A feasible 2-cycle. Row 0 is the quieter row (support of size `k1`),
/// row 1 the louder one (support of size `k1 + k2`). For a family, `matrix`
/// is the member at `family.representative`.
#[derive(Debug, Clone, PartialEq)]
pub struct Oscillation<S = f64> {
    pub case: OscillationCase,
    pub k1: usize,
    pub k2: usize,
    pub matrix: QuantityMatrix<S>,
    pub family: Option<Family<S>>,
}

/// The first condition that rules a candidate cycle out. Indices are
/// 1-based and firms are numbered by ascending cost.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoActiveFirm {
        capacity: f64,
        cheapest: f64,
    },
    Case1Inequality {
        k: usize,
        value: f64,
    },
    FamilyConsistency {
        lhs: f64,
        rhs: f64,
    },
    EntryNotPositive {
        row: usize,
        firm: usize,
        value: f64,
    },
    WouldEnter {
        row: usize,
        firm: usize,
        value: f64,
    },
    NotBestResponse {
        row: usize,
        firm: usize,
        residual: f64,
    },
    EmptyFamily {
        parameter: FamilyParameter,
        detail: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoActiveFirm { capacity, cheapest } => {
                write!(f, "(A - c_k)/2 > 0 fails: no firm has cost below A = {capacity} (cheapest {cheapest})")
            }
            Violation::Case1Inequality { k, value } => {
                write!(
                    f,
                    "(k-3)A + 3c_1 - sum_{{i<=k}} c_i >= 0 fails with k = {k}: value {value}"
                )
            }
            Violation::FamilyConsistency { lhs, rhs } => {
                write!(f, "2A = sum_{{i=2}}^{{5}} c_i - 2c_1 fails: {lhs} != {rhs}")
            }
            Violation::EntryNotPositive { row, firm, value } => {
                write!(f, "a_{{{row},{firm}}} = {value} must be positive")
            }
            Violation::WouldEnter { row, firm, value } => {
                write!(
                    f,
                    "firm {firm} must stay out of row {row} but its best response is {value}"
                )
            }
            Violation::NotBestResponse {
                row,
                firm,
                residual,
            } => {
                write!(
                    f,
                    "a_{{{row},{firm}}} misses the best response to the other row by {residual}"
                )
            }
            Violation::EmptyFamily { parameter, detail } => {
                write!(f, "no admissible {}: {detail}", parameter.as_str())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscillationError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("delta_a = {value} lies outside the admissible range {range}")]
    InfeasibleDelta { value: f64, range: String },
    #[error("infeasible: {0}")]
    Infeasible(Violation),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<Violation> for OscillationError {
    fn from(v: Violation) -> Self {
        OscillationError::Infeasible(v)
    }
}

/// All 2-cycles of a game together with its Nash equilibrium, which is the
/// degenerate period-2 solution.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport<S = f64> {
    pub oscillations: Vec<Oscillation<S>>,
    pub equilibrium: EquilibriumSolution<S>,
}

fn half<S: Scalar>(x: S) -> S {
    x.half()
}

fn pattern(n: usize, row0: usize, row1: usize) -> Pattern {
    [
        (0..n).map(|j| j < row0).collect(),
        (0..n).map(|j| j < row1).collect(),
    ]
}

/// Positivity first, then exits, then the best-response equalities.
fn check_point<S: Scalar>(
    params: &GameParams<S>,
    rows: &[Vec<S>; 2],
    pattern: &Pattern,
) -> Result<(), Violation> {
    let a = params.capacity();
    let slack = S::slack(a.to_f64());
    for r in 0..2 {
        for (j, v) in rows[r].iter().enumerate() {
            if pattern[r][j] && *v <= slack {
                return Err(Violation::EntryNotPositive {
                    row: r + 1,
                    firm: j + 1,
                    value: v.to_f64(),
                });
            }
        }
    }
    let unclamped = |r: usize| -> Vec<S> {
        let src = &rows[1 - r];
        let total = crate::model::sum(src);
        (0..params.n())
            .map(|j| half(a.clone() - (total.clone() - src[j].clone()) - params.cost(j).clone()))
            .collect()
    };
    let responses = [unclamped(0), unclamped(1)];
    for r in 0..2 {
        for (j, u) in responses[r].iter().enumerate() {
            if !pattern[r][j] && *u > slack {
                return Err(Violation::WouldEnter {
                    row: r + 1,
                    firm: j + 1,
                    value: u.to_f64(),
                });
            }
        }
    }
    for r in 0..2 {
        for (j, u) in responses[r].iter().enumerate() {
            let residual = (u.clone() - rows[r][j].clone()).abs();
            if pattern[r][j] && residual > slack {
                return Err(Violation::NotBestResponse {
                    row: r + 1,
                    firm: j + 1,
                    residual: residual.to_f64(),
                });
            }
        }
    }
    Ok(())
}

fn finish<S: Scalar>(
    params: &GameParams<S>,
    case: OscillationCase,
    k1: usize,
    k2: usize,
    rows: [Vec<S>; 2],
    family: Option<Family<S>>,
) -> Result<Oscillation<S>, OscillationError> {
    check_point(params, &rows, &pattern(params.n(), k1, k1 + k2))?;
    let matrix = QuantityMatrix::new(rows.to_vec())?;
    let tol = S::slack(params.capacity().to_f64()).to_f64() * 4.0;
    let report = verify_quantity_matrix(params, &matrix, tol)?;
    if !report.valid {
        return Err(Violation::NotBestResponse {
            row: report.worst.row + 1,
            firm: report.worst.firm + 1,
            residual: report.max_residual.to_f64(),
        }
        .into());
    }
    Ok(Oscillation {
        case,
        k1,
        k2,
        matrix,
        family,
    })
}

/// Case 1: one row empty, the other holding every firm's monopoly output.
pub fn construct_case1<S: Scalar>(
    params: &GameParams<S>,
) -> Result<Oscillation<S>, OscillationError> {
    let a = params.capacity().clone();
    let n = params.n();
    let slack = S::slack(a.to_f64());
    let k = params.costs().iter().take_while(|c| **c < a).count();
    if k == 0 {
        return Err(Violation::NoActiveFirm {
            capacity: a.to_f64(),
            cheapest: params.cost(0).to_f64(),
        }
        .into());
    }
    let prefix = prefix_sums(params.costs());
    let value = S::from_i64(k as i64 - 3) * a.clone() + S::from_i64(3) * params.cost(0).clone()
        - prefix[k].clone();
    if value < -slack {
        return Err(Violation::Case1Inequality {
            k,
            value: value.to_f64(),
        }
        .into());
    }
    let loud = (0..n)
        .map(|i| {
            if i < k {
                half(a.clone() - params.cost(i).clone())
            } else {
                S::zero()
            }
        })
        .collect();
    finish(
        params,
        OscillationCase::Case1,
        0,
        k,
        [vec![S::zero(); n], loud],
        None,
    )
}

/// Case 2 with `k1` firms active in the quiet row and `k2` more in the loud one.
pub fn construct_case2<S: Scalar>(
    params: &GameParams<S>,
    k1: usize,
    k2: usize,
) -> Result<Oscillation<S>, OscillationError> {
    let n = params.n();
    if !(1..=2).contains(&k1) || k2 == 0 || k1 + k2 > n {
        return Err(OscillationError::InvalidShape(format!(
            "case 2 needs k1 in {{1, 2}}, k2 >= 1 and k1 + k2 <= n = {n}, got k1 = {k1}, k2 = {k2}"
        )));
    }
    match (k1, k2) {
        (1, 4) => case2_family(params),
        (1, _) => case2_single(params, k2),
        _ => case2_pair(params, k2),
    }
}

fn case2_single<S: Scalar>(
    params: &GameParams<S>,
    k2: usize,
) -> Result<Oscillation<S>, OscillationError> {
    let a = params.capacity().clone();
    let c = params.costs();
    let n = params.n();
    let group: S = crate::model::sum(&c[1..=k2]);
    let k2s = S::from_i64(k2 as i64);
    let lead = (S::from_i64(2) - k2s.clone()) * a.clone() + group - S::from_i64(2) * c[0].clone();
    let lead = lead / (S::from_i64(4) - k2s);
    let mut quiet = vec![S::zero(); n];
    quiet[0] = lead.clone();
    let mut loud = vec![S::zero(); n];
    loud[0] = half(a.clone() - c[0].clone());
    for j in 1..=k2 {
        loud[j] = half(a.clone() - lead.clone() - c[j].clone());
    }
    finish(params, OscillationCase::Case2, 1, k2, [quiet, loud], None)
}

fn case2_pair<S: Scalar>(
    params: &GameParams<S>,
    k2: usize,
) -> Result<Oscillation<S>, OscillationError> {
    let a = params.capacity().clone();
    let c = params.costs();
    let n = params.n();
    let group: S = crate::model::sum(&c[2..2 + k2]);
    let k2s = S::from_i64(k2 as i64);
    let one_minus = S::from_i64(1) - k2s.clone();
    let two = S::from_i64(2);
    let three = S::from_i64(3);
    let loud_total = (two.clone() * one_minus.clone() * a.clone() + two.clone() * group.clone()
        - (c[0].clone() + c[1].clone()))
        / (three.clone() - two.clone() * k2s.clone());
    let common = one_minus * a.clone() + k2s * loud_total + group;
    let first = (common.clone() + c[1].clone() - two.clone() * c[0].clone()) / three.clone();
    let second = (common + c[0].clone() - two * c[1].clone()) / three;
    let mut quiet = vec![S::zero(); n];
    quiet[0] = first.clone();
    quiet[1] = second.clone();
    let mut loud = vec![S::zero(); n];
    loud[0] = half(a.clone() - second.clone() - c[0].clone());
    loud[1] = half(a.clone() - first.clone() - c[1].clone());
    for j in 2..2 + k2 {
        loud[j] = half(a.clone() - first.clone() - second.clone() - c[j].clone());
    }
    finish(params, OscillationCase::Case2, 2, k2, [quiet, loud], None)
}

/// `k1 = 1, k2 = 4`: the lead firm's quiet-row output is free within an
/// interval, provided `2A = c_2 + c_3 + c_4 + c_5 - 2c_1`.
fn case2_family<S: Scalar>(params: &GameParams<S>) -> Result<Oscillation<S>, OscillationError> {
    let a = params.capacity().clone();
    let c = params.costs();
    let n = params.n();
    let slack = S::slack(a.to_f64());
    let lhs = S::from_i64(2) * a.clone();
    let rhs = crate::model::sum(&c[1..=4]) - S::from_i64(2) * c[0].clone();
    if (lhs.clone() - rhs.clone()).abs() > slack {
        return Err(Violation::FamilyConsistency {
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
        }
        .into());
    }
    let minus_half = -half(S::from_i64(1));
    let mut quiet = vec![Affine::constant(S::zero()); n];
    quiet[0] = Affine {
        base: S::zero(),
        slope: S::from_i64(1),
    };
    let mut loud = vec![Affine::constant(S::zero()); n];
    loud[0] = Affine::constant(half(a.clone() - c[0].clone()));
    for j in 1..=4 {
        loud[j] = Affine {
            base: half(a.clone() - c[j].clone()),
            slope: minus_half.clone(),
        };
    }
    let template = [quiet, loud];
    let interval = template_interval(params, &template, &pattern(n, 1, 5), Interval::everything());
    family_member(
        params,
        OscillationCase::Case2,
        1,
        4,
        FamilyParameter::LeadOutput,
        template,
        interval,
        None,
    )
}

#[allow(clippy::too_many_arguments)]
fn family_member<S: Scalar>(
    params: &GameParams<S>,
    case: OscillationCase,
    k1: usize,
    k2: usize,
    parameter: FamilyParameter,
    template: [Vec<Affine<S>>; 2],
    interval: Interval<S>,
    chosen: Option<S>,
) -> Result<Oscillation<S>, OscillationError> {
    let representative = match interval.midpoint() {
        Some(mid) => mid,
        None => {
            return Err(Violation::EmptyFamily {
                parameter,
                detail: format!("the entry, exit and best-response constraints leave {interval}"),
            }
            .into())
        }
    };
    let theta = match chosen {
        Some(value) => {
            if !interval.contains(&value, &S::zero()) {
                return Err(OscillationError::InfeasibleDelta {
                    value: value.to_f64(),
                    range: interval.to_string(),
                });
            }
            value
        }
        None => representative.clone(),
    };
    let family = Family::new(parameter, interval, representative, template);
    let rows = family.instantiate(&theta).rows().to_vec();
    let rows = [rows[0].clone(), rows[1].clone()];
    finish(params, case, k1, k2, rows, Some(family))
}

/// Case 3: the three cheapest firms alternate between their three-firm
/// equilibrium output minus and plus `delta_a / 2`. Without `delta_a`, the
/// midpoint of the admissible range is used.
pub fn construct_case3<S: Scalar>(
    params: &GameParams<S>,
    delta_a: Option<S>,
) -> Result<Oscillation<S>, OscillationError> {
    let n = params.n();
    if n < 3 {
        return Err(OscillationError::InvalidShape(format!(
            "case 3 needs at least 3 firms, got {n}"
        )));
    }
    let a = params.capacity().clone();
    let c = params.costs();
    let trio = crate::model::sum(&c[..3]);
    let mut quiet = vec![Affine::constant(S::zero()); n];
    let mut loud = vec![Affine::constant(S::zero()); n];
    let swing = half(S::from_i64(1));
    for i in 0..3 {
        let base = (a.clone() + trio.clone() - S::from_i64(4) * c[i].clone()) / S::from_i64(4);
        quiet[i] = Affine {
            base: base.clone(),
            slope: -swing.clone(),
        };
        loud[i] = Affine {
            base,
            slope: swing.clone(),
        };
    }
    let mut start = Interval::everything();
    start.raise_lower(S::zero(), false);
    let template = [quiet, loud];
    let interval = template_interval(params, &template, &pattern(n, 3, 3), start);
    if interval.is_empty() {
        return Err(Violation::EmptyFamily {
            parameter: FamilyParameter::DeltaA,
            detail: case3_detail(params),
        }
        .into());
    }
    family_member(
        params,
        OscillationCase::Case3,
        3,
        0,
        FamilyParameter::DeltaA,
        template,
        interval,
        delta_a,
    )
}

/// Closed-form upper limit of `delta_a`, as text for error messages.
fn case3_detail<S: Scalar>(params: &GameParams<S>) -> String {
    let (u1, u2) = case3_limits(params);
    let u1 = u1.to_f64();
    match u2 {
        Some(u2) => format!(
            "need 0 < delta_a < (A + c_1 + c_2 - 3c_3)/2 = {u1} and delta_a <= (4c_4 - A - c_1 - c_2 - c_3)/6 = {}",
            u2.to_f64()
        ),
        None => format!("need 0 < delta_a < (A + c_1 + c_2 - 3c_3)/2 = {u1}"),
    }
}

/// `(A + c_1 + c_2 - 3c_3)/2` (strict) and `(4c_4 - A - c_1 - c_2 - c_3)/6`
/// (weak, absent with three firms). Needs at least three firms.
pub fn case3_limits<S: Scalar>(params: &GameParams<S>) -> (S, Option<S>) {
    let a = params.capacity().clone();
    let c = params.costs();
    let u1 = half(a.clone() + c[0].clone() + c[1].clone() - S::from_i64(3) * c[2].clone());
    let u2 = (params.n() > 3)
        .then(|| (S::from_i64(4) * c[3].clone() - a - crate::model::sum(&c[..3])) / S::from_i64(6));
    (u1, u2)
}

/// Necessary conditions for Case 2 in O(1) from prefix sums, evaluated at
/// the binding firm of each group. `slack` should be at least as loose as
/// the full check's; with exact numbers and zero slack, the screen is also
/// sufficient whenever `(k1, k2) != (1, 4)`.
pub(crate) fn screen_case2<S: Scalar>(
    params: &GameParams<S>,
    prefix: &[S],
    k1: usize,
    k2: usize,
    slack: &S,
) -> bool {
    let a = params.capacity().clone();
    let c = params.costs();
    let n = params.n();
    let pos = |x: &S| *x > *slack;
    let out = |x: &S| *x <= *slack;
    let k2s = S::from_i64(k2 as i64);
    if k1 == 1 {
        if k2 == 4 {
            let gap = S::from_i64(2) * a - (prefix[5].clone() - prefix[1].clone())
                + S::from_i64(2) * c[0].clone();
            return gap.abs() <= *slack;
        }
        let group = prefix[k2 + 1].clone() - prefix[1].clone();
        let lead = ((S::from_i64(2) - k2s.clone()) * a.clone() + group.clone()
            - S::from_i64(2) * c[0].clone())
            / (S::from_i64(4) - k2s.clone());
        let head = half(a.clone() - c[0].clone());
        let loud_total = head.clone() + half(k2s * (a.clone() - lead.clone()) - group);
        let member = |j: usize| half(a.clone() - lead.clone() - c[j].clone());
        if !(pos(&lead) && pos(&head) && pos(&member(k2))) {
            return false;
        }
        let entry = half(a.clone() - (loud_total.clone() - member(1)) - c[1].clone());
        if !out(&entry) {
            return false;
        }
        if k2 + 1 < n {
            let j = k2 + 1;
            return out(&member(j)) && out(&half(a - loud_total - c[j].clone()));
        }
        return true;
    }
    let group = prefix[k2 + 2].clone() - prefix[2].clone();
    let two = S::from_i64(2);
    let three = S::from_i64(3);
    let one_minus = S::from_i64(1) - k2s.clone();
    let s = (two.clone() * one_minus.clone() * a.clone() + two.clone() * group.clone()
        - prefix[2].clone())
        / (three.clone() - two.clone() * k2s.clone());
    let common = one_minus * a.clone() + k2s.clone() * s + group.clone();
    let first = (common.clone() + c[1].clone() - two.clone() * c[0].clone()) / three.clone();
    let second = (common + c[0].clone() - two * c[1].clone()) / three;
    let pair = first.clone() + second.clone();
    let r0 = half(a.clone() - second.clone() - c[0].clone());
    let r1 = half(a.clone() - first.clone() - c[1].clone());
    let member = |j: usize| half(a.clone() - pair.clone() - c[j].clone());
    let loud_total = r0.clone() + r1.clone() + half(k2s * (a.clone() - pair.clone()) - group);
    if !(pos(&first) && pos(&second) && pos(&r0) && pos(&r1) && pos(&member(k2 + 1))) {
        return false;
    }
    if !out(&half(
        a.clone() - (loud_total.clone() - member(2)) - c[2].clone(),
    )) {
        return false;
    }
    if k2 + 2 < n {
        let j = k2 + 2;
        return out(&member(j)) && out(&half(a - loud_total - c[j].clone()));
    }
    true
}

/// Every 2-cycle of the game, ordered by case, `k1` and `k2`. Candidate
/// shapes are screened in O(1) each, so the search is linear in `n` plus
/// O(n) per cycle found.
pub fn find_all_oscillations<S: Scalar>(params: &GameParams<S>) -> OscillationReport<S> {
    let n = params.n();
    let mut oscillations = Vec::new();
    if let Ok(o) = construct_case1(params) {
        oscillations.push(o);
    }
    let prefix = prefix_sums(params.costs());
    let screen_slack = if S::EXACT {
        S::zero()
    } else {
        S::from_f64(1e-9 * params.capacity().to_f64().max(1.0))
    };
    for k1 in 1..=2usize {
        for k2 in 1..=n.saturating_sub(k1) {
            if screen_case2(params, &prefix, k1, k2, &screen_slack) {
                if let Ok(o) = construct_case2(params, k1, k2) {
                    oscillations.push(o);
                }
            }
        }
    }
    if n >= 3 {
        if let Ok(o) = construct_case3(params, None) {
            oscillations.push(o);
        }
    }
    OscillationReport {
        oscillations,
        equilibrium: nash_equilibrium(params),
    }
}

#[cfg(test)]
mod tests;
