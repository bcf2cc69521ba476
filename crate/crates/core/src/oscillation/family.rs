//! One-parameter families of 2-cycles.
//!
//! Every matrix entry is affine in the family parameter `theta`, so each
//! positivity, exit and best-response condition cuts the parameter line at
//! one point and the feasible set is an interval.

use std::fmt;

use super::matrix::QuantityMatrix;
use crate::model::GameParams;
use crate::scalar::Scalar;

/// `base + slope * theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine<S = f64> {
    pub base: S,
    pub slope: S,
}

impl<S: Scalar> Affine<S> {
    pub fn constant(base: S) -> Self {
        Affine {
            base,
            slope: S::zero(),
        }
    }

    pub fn at(&self, theta: &S) -> S {
        self.base.clone() + self.slope.clone() * theta.clone()
    }

    fn add(&self, other: &Self) -> Self {
        Affine {
            base: self.base.clone() + other.base.clone(),
            slope: self.slope.clone() + other.slope.clone(),
        }
    }

    fn sub(&self, other: &Self) -> Self {
        Affine {
            base: self.base.clone() - other.base.clone(),
            slope: self.slope.clone() - other.slope.clone(),
        }
    }

    fn half(&self) -> Self {
        Affine {
            base: self.base.half(),
            slope: self.slope.half(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bound<S = f64> {
    pub value: S,
    pub closed: bool,
}

/// Interval on the parameter line; `None` means unbounded on that side.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<S = f64> {
    pub lower: Option<Bound<S>>,
    pub upper: Option<Bound<S>>,
    void: bool,
}

impl<S: Scalar> Interval<S> {
    pub fn everything() -> Self {
        Interval {
            lower: None,
            upper: None,
            void: false,
        }
    }

    pub fn raise_lower(&mut self, value: S, closed: bool) {
        let tighter = match &self.lower {
            None => true,
            Some(b) => value > b.value || (value == b.value && b.closed && !closed),
        };
        if tighter {
            self.lower = Some(Bound { value, closed });
        }
    }

    pub fn cut_upper(&mut self, value: S, closed: bool) {
        let tighter = match &self.upper {
            None => true,
            Some(b) => value < b.value || (value == b.value && b.closed && !closed),
        };
        if tighter {
            self.upper = Some(Bound { value, closed });
        }
    }

    pub fn clear(&mut self) {
        self.void = true;
    }

    pub fn is_empty(&self) -> bool {
        if self.void {
            return true;
        }
        match (&self.lower, &self.upper) {
            (Some(lo), Some(hi)) => {
                lo.value > hi.value || (lo.value == hi.value && !(lo.closed && hi.closed))
            }
            _ => false,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_some() && self.upper.is_some()
    }

    /// Whether `theta` lies inside, allowing `slack` past each endpoint.
    pub fn contains(&self, theta: &S, slack: &S) -> bool {
        if self.is_empty() {
            return false;
        }
        let above = self.lower.as_ref().is_none_or(|b| {
            if b.closed {
                *theta >= b.value.clone() - slack.clone()
            } else {
                *theta > b.value.clone() - slack.clone()
            }
        });
        let below = self.upper.as_ref().is_none_or(|b| {
            if b.closed {
                *theta <= b.value.clone() + slack.clone()
            } else {
                *theta < b.value.clone() + slack.clone()
            }
        });
        above && below
    }

    /// Midpoint of a bounded, non-empty interval.
    pub fn midpoint(&self) -> Option<S> {
        match (&self.lower, &self.upper) {
            (Some(lo), Some(hi)) if !self.is_empty() => {
                Some((lo.value.clone() + hi.value.clone()).half())
            }
            _ => None,
        }
    }

    /// Intersects with `{theta : g(theta) > 0}`.
    ///
    /// `slack` only matters when `g` is constant, as do the other `require_*`.
    pub fn require_positive(&mut self, g: &Affine<S>, slack: &S) {
        self.require(g, Sign::Positive, slack);
    }

    /// Intersects with `{theta : g(theta) <= 0}`.
    pub fn require_nonpositive(&mut self, g: &Affine<S>, slack: &S) {
        self.require(g, Sign::NonPositive, slack);
    }

    /// Intersects with `{theta : g(theta) = 0}`.
    pub fn require_zero(&mut self, g: &Affine<S>, slack: &S) {
        self.require(g, Sign::Zero, slack);
    }

    fn require(&mut self, g: &Affine<S>, sign: Sign, slack: &S) {
        // Slopes are small dyadic combinations that floats represent exactly
        // unless cancellation leaves rounding dust.
        let flat = if S::EXACT {
            g.slope == S::zero()
        } else {
            g.slope.abs() <= S::from_f64(1e-12)
        };
        if flat {
            let b = &g.base;
            let ok = match sign {
                Sign::Positive => *b > *slack,
                Sign::NonPositive => *b <= *slack,
                Sign::Zero => b.abs() <= *slack,
            };
            if !ok {
                self.clear();
            }
            return;
        }
        let mut root = -(g.base.clone() / g.slope.clone());
        if root == S::zero() {
            root = S::zero();
        }
        let rising = g.slope > S::zero();
        match (sign, rising) {
            (Sign::Positive, true) => self.raise_lower(root, false),
            (Sign::Positive, false) => self.cut_upper(root, false),
            (Sign::NonPositive, true) => self.cut_upper(root, true),
            (Sign::NonPositive, false) => self.raise_lower(root, true),
            (Sign::Zero, _) => {
                self.raise_lower(root.clone(), true);
                self.cut_upper(root, true);
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Sign {
    Positive,
    NonPositive,
    Zero,
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "(empty)");
        }
        match &self.lower {
            Some(b) => write!(
                f,
                "{}{}",
                if b.closed { '[' } else { '(' },
                b.value.to_f64()
            )?,
            None => write!(f, "(-inf")?,
        }
        match &self.upper {
            Some(b) => write!(
                f,
                ", {}{}",
                b.value.to_f64(),
                if b.closed { ']' } else { ')' }
            ),
            None => write!(f, ", inf)"),
        }
    }
}

/// Cells of a 2-row template that are meant to be positive.
pub(crate) type Pattern = [Vec<bool>; 2];

/// Feasible parameter set of a 2-row template under the clamped update.
///
/// Positive cells must be positive and equal their unclamped best response
/// to the other row; zero cells must have a non-positive best response.
pub(crate) fn template_interval<S: Scalar>(
    params: &GameParams<S>,
    template: &[Vec<Affine<S>>; 2],
    pattern: &Pattern,
    mut interval: Interval<S>,
) -> Interval<S> {
    let a = Affine::constant(params.capacity().clone());
    let slack = S::slack(params.capacity().to_f64());
    for r in 0..2 {
        let src = &template[1 - r];
        let total = src
            .iter()
            .fold(Affine::constant(S::zero()), |acc, x| acc.add(x));
        for j in 0..params.n() {
            let others = total.sub(&src[j]);
            let unclamped = a
                .sub(&others)
                .sub(&Affine::constant(params.cost(j).clone()))
                .half();
            if pattern[r][j] {
                interval.require_positive(&template[r][j], &slack);
                interval.require_zero(&unclamped.sub(&template[r][j]), &slack);
            } else {
                interval.require_nonpositive(&unclamped, &slack);
            }
            if interval.is_empty() {
                return interval;
            }
        }
    }
    interval
}

/// Which quantity the family is parameterised by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyParameter {
    /// Output of the cheapest firm in the row where it produces alone.
    LeadOutput,
    /// Half the swing of each of the three firms between the two rows.
    DeltaA,
}

impl FamilyParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyParameter::LeadOutput => "lead_output",
            FamilyParameter::DeltaA => "delta_a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family<S = f64> {
    pub parameter: FamilyParameter,
    pub interval: Interval<S>,
    pub representative: S,
    template: [Vec<Affine<S>>; 2],
}

impl<S: Scalar> Family<S> {
    pub(crate) fn new(
        parameter: FamilyParameter,
        interval: Interval<S>,
        representative: S,
        template: [Vec<Affine<S>>; 2],
    ) -> Self {
        Family {
            parameter,
            interval,
            representative,
            template,
        }
    }

    pub fn lower(&self) -> &Bound<S> {
        self.interval.lower.as_ref().expect("families are bounded")
    }

    pub fn upper(&self) -> &Bound<S> {
        self.interval.upper.as_ref().expect("families are bounded")
    }

    pub fn contains(&self, theta: &S) -> bool {
        self.interval.contains(theta, &S::zero())
    }

    pub fn template(&self) -> &[Vec<Affine<S>>; 2] {
        &self.template
    }

    /// The member with parameter `theta`; rounding dust below zero is cleared.
    pub fn instantiate(&self, theta: &S) -> QuantityMatrix<S> {
        let rows = self
            .template
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        let v = x.at(theta);
                        if v < S::zero() {
                            S::zero()
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        QuantityMatrix::new(rows).expect("entries are finite and non-negative")
    }
}
