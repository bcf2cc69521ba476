//! Recognising simulated 2-cycles among the constructed ones.

use super::{Oscillation, OscillationCase, OscillationReport, QuantityMatrix};
use crate::scalar::{max_abs_diff, Scalar};

/// Support structure of an observed 2-cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleShape {
    pub case: OscillationCase,
    pub k1: usize,
    pub k2: usize,
    /// The quiet row is row 1 of the observed matrix rather than row 0.
    pub flipped: bool,
}

fn support<S: Scalar>(row: &[S], eps: &S) -> Option<usize> {
    let k = row.iter().take_while(|v| **v > *eps).count();
    row[k..].iter().all(|v| *v <= *eps).then_some(k)
}

/// Support shape of a period-2 matrix, or `None` when the supports are not
/// nested cost prefixes of one of the three known shapes.
pub fn cycle_shape<S: Scalar>(matrix: &QuantityMatrix<S>, eps: f64) -> Option<CycleShape> {
    if matrix.period() != 2 {
        return None;
    }
    let eps = S::from_f64(eps);
    let s0 = support(matrix.row(0), &eps)?;
    let s1 = support(matrix.row(1), &eps)?;
    let flipped = if s0 == s1 {
        crate::model::sum(matrix.row(0)) > crate::model::sum(matrix.row(1))
    } else {
        s0 > s1
    };
    let (k1, total) = (s0.min(s1), s0.max(s1));
    let k2 = total - k1;
    let case = match (k1, k2) {
        (0, k2) if k2 > 0 => OscillationCase::Case1,
        (1 | 2, k2) if k2 > 0 => OscillationCase::Case2,
        (3, 0) => OscillationCase::Case3,
        _ => return None,
    };
    Some(CycleShape {
        case,
        k1,
        k2,
        flipped,
    })
}

impl Oscillation<f64> {
    /// Whether an observed 2-cycle (in either phase) is this cycle or, for
    /// a family, one of its members, within `tol` per entry.
    pub fn matches(&self, observed: &QuantityMatrix<f64>, tol: f64) -> bool {
        if observed.period() != 2 || observed.n_firms() != self.matrix.n_firms() {
            return false;
        }
        [observed.clone(), observed.rotated()]
            .iter()
            .any(|m| self.matches_in_phase(m, tol))
    }

    fn matches_in_phase(&self, observed: &QuantityMatrix<f64>, tol: f64) -> bool {
        let candidate = match &self.family {
            None => self.matrix.clone(),
            Some(family) => {
                let [quiet, loud] = family.template();
                // Read the parameter off the steepest cell.
                let mut best: Option<(f64, f64)> = None;
                for (r, row) in [quiet, loud].iter().enumerate() {
                    for (j, cell) in row.iter().enumerate() {
                        if best.is_none_or(|(s, _)| cell.slope.abs() > s) && cell.slope != 0.0 {
                            let theta = (observed.row(r)[j] - cell.base) / cell.slope;
                            best = Some((cell.slope.abs(), theta));
                        }
                    }
                }
                let Some((_, theta)) = best else { return false };
                if !family.interval.contains(&theta, &(tol * 4.0)) {
                    return false;
                }
                family.instantiate(&theta)
            }
        };
        candidate
            .rows()
            .iter()
            .zip(observed.rows())
            .all(|(a, b)| max_abs_diff(a, b) <= tol)
    }
}

/// Index of the reported oscillation that `observed` matches, if any.
pub fn match_cycle(
    report: &OscillationReport<f64>,
    observed: &QuantityMatrix<f64>,
    tol: f64,
) -> Option<usize> {
    report
        .oscillations
        .iter()
        .position(|o| o.matches(observed, tol))
}
