//! Python module `cournot`. Every per-firm list is in the caller's firm
//! order; indices are 0-based.

use cournot_core::propcheck::{self, SweepConfig};
use cournot_core::{
    construct_case1, construct_case2, construct_case3, find_all_oscillations, is_equilibrium,
    nash_equilibrium, price, reduce_game, simulate, step, utility, verify_quantity_matrix,
    Classifier, DynamicsOutcome, GameParams, ModelError, Oscillation as CoreOscillation,
    OscillationError, QuantityMatrix, QuantityVector, ReductionError, Trajectory as CoreTrajectory,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

create_exception!(
    cournot,
    InfeasibleError,
    PyValueError,
    "The requested oscillation does not exist for this game."
);

fn model_err(e: ModelError) -> PyErr {
    match e {
        ModelError::IndexOutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn oscillation_err(e: OscillationError) -> PyErr {
    match e {
        OscillationError::Model(m) => model_err(m),
        OscillationError::InvalidShape(_) => PyValueError::new_err(e.to_string()),
        _ => InfeasibleError::new_err(e.to_string()),
    }
}

fn reduction_err(e: ReductionError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A linear Cournot game: price `max(0, A - Q)`, constant unit costs.
#[pyclass(frozen, module = "cournot")]
struct Game {
    params: GameParams,
}

impl Game {
    fn sorted(&self, q: Vec<f64>) -> PyResult<QuantityVector> {
        if q.len() != self.params.n() {
            return Err(model_err(ModelError::DimensionMismatch {
                expected: self.params.n(),
                found: q.len(),
            }));
        }
        QuantityVector::new(self.params.from_user_order(&q)).map_err(model_err)
    }

    fn user(&self, sorted: &[f64]) -> Vec<f64> {
        self.params.to_user_order(sorted)
    }

    fn sorted_firm(&self, firm: usize) -> PyResult<usize> {
        self.params
            .user_index()
            .iter()
            .position(|&u| u == firm)
            .ok_or_else(|| {
                model_err(ModelError::IndexOutOfRange {
                    index: firm,
                    n: self.params.n(),
                })
            })
    }

    fn wrap(&self, o: CoreOscillation) -> Oscillation {
        Oscillation::new(&self.params, &o)
    }
}

#[pymethods]
impl Game {
    #[new]
    #[pyo3(signature = (capacity, costs))]
    fn new(capacity: f64, costs: Vec<f64>) -> PyResult<Self> {
        Ok(Game {
            params: GameParams::new(capacity, costs).map_err(model_err)?,
        })
    }

    /// Market capacity `A`.
    #[getter]
    fn capacity(&self) -> f64 {
        *self.params.capacity()
    }

    #[getter]
    fn costs(&self) -> Vec<f64> {
        self.params.user_costs()
    }

    #[getter]
    fn n(&self) -> usize {
        self.params.n()
    }

    fn price(&self, q: Vec<f64>) -> PyResult<f64> {
        price(&self.params, &self.sorted(q)?).map_err(model_err)
    }

    fn utility(&self, q: Vec<f64>, firm: usize) -> PyResult<f64> {
        let firm = self.sorted_firm(firm)?;
        Ok(utility(&self.params, &self.sorted(q)?, firm)
            .map_err(model_err)?
            .0)
    }

    fn best_response(&self, q: Vec<f64>, firm: usize) -> PyResult<f64> {
        let firm = self.sorted_firm(firm)?;
        cournot_core::best_response(&self.params, &self.sorted(q)?, firm).map_err(model_err)
    }

    /// One simultaneous best-response round.
    fn step(&self, q: Vec<f64>) -> PyResult<Vec<f64>> {
        let next = step(&self.params, &self.sorted(q)?).map_err(model_err)?;
        Ok(self.user(next.values()))
    }

    fn equilibrium(&self) -> Equilibrium {
        let eq = nash_equilibrium(&self.params);
        Equilibrium {
            q_star: self.user(eq.q_star.values()),
            support_size: eq.support_size,
            total: eq.total,
            price: eq.price(&self.params),
        }
    }

    #[pyo3(signature = (q, tol = 1e-12))]
    fn is_equilibrium(&self, q: Vec<f64>, tol: f64) -> PyResult<bool> {
        is_equilibrium(&self.params, &self.sorted(q)?, tol).map_err(model_err)
    }

    /// Runs at most `steps` rounds, stopping early on an exact repeat.
    #[pyo3(signature = (q0, steps = 10_000))]
    fn simulate(&self, q0: Vec<f64>, steps: usize) -> PyResult<Trajectory> {
        let traj = simulate(&self.params, &self.sorted(q0)?, steps).map_err(model_err)?;
        Ok(Trajectory { traj })
    }

    #[pyo3(signature = (q0, steps = 10_000, eps = 1e-9, max_period = 12))]
    fn classify(
        &self,
        q0: Vec<f64>,
        steps: usize,
        eps: f64,
        max_period: usize,
    ) -> PyResult<Outcome> {
        if eps.is_nan() || eps <= 0.0 || max_period == 0 {
            return Err(PyValueError::new_err(
                "eps must be positive and max_period at least 1",
            ));
        }
        let classifier = Classifier {
            max_steps: steps,
            eps,
            max_period,
        };
        let outcome = classifier
            .classify(&self.params, &self.sorted(q0)?)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Outcome::new(&self.params, &outcome))
    }

    /// Every two-period oscillation of the game.
    fn oscillations(&self) -> Vec<Oscillation> {
        find_all_oscillations(&self.params)
            .oscillations
            .into_iter()
            .map(|o| self.wrap(o))
            .collect()
    }

    fn construct_case1(&self) -> PyResult<Oscillation> {
        Ok(self.wrap(construct_case1(&self.params).map_err(oscillation_err)?))
    }

    fn construct_case2(&self, k1: usize, k2: usize) -> PyResult<Oscillation> {
        Ok(self.wrap(construct_case2(&self.params, k1, k2).map_err(oscillation_err)?))
    }

    #[pyo3(signature = (delta_a = None))]
    fn construct_case3(&self, delta_a: Option<f64>) -> PyResult<Oscillation> {
        Ok(self.wrap(construct_case3(&self.params, delta_a).map_err(oscillation_err)?))
    }

    /// Residuals of `rows` under the cyclic update.
    #[pyo3(signature = (rows, tol = 1e-9))]
    fn verify(&self, rows: Vec<Vec<f64>>, tol: f64) -> PyResult<VerifyReport> {
        let matrix = QuantityMatrix::from_user_rows(&self.params, &rows).map_err(model_err)?;
        let report = verify_quantity_matrix(&self.params, &matrix, tol).map_err(model_err)?;
        Ok(VerifyReport {
            valid: report.valid,
            max_residual: report.max_residual,
            worst: (
                report.worst.row,
                self.params.user_index()[report.worst.firm],
            ),
            residuals: report.residuals.iter().map(|r| self.user(r)).collect(),
        })
    }

    /// The game with the `n_bar` cheapest firms at their mean cost.
    fn reduce(&self, n_bar: usize) -> PyResult<Game> {
        Ok(Game {
            params: reduce_game(&self.params, n_bar)
                .map_err(reduction_err)?
                .params,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Game(capacity={}, costs={:?})",
            self.params.capacity(),
            self.params.user_costs()
        )
    }
}

#[pyclass(frozen, get_all, module = "cournot")]
struct Equilibrium {
    q_star: Vec<f64>,
    support_size: usize,
    total: f64,
    price: f64,
}

#[pymethods]
impl Equilibrium {
    fn __repr__(&self) -> String {
        format!(
            "Equilibrium(q_star={:?}, support_size={}, total={}, price={})",
            self.q_star, self.support_size, self.total, self.price
        )
    }
}

#[pyclass(frozen, module = "cournot")]
struct Trajectory {
    traj: CoreTrajectory,
}

#[pymethods]
impl Trajectory {
    /// Every recorded state, one list per round.
    #[getter]
    fn states(&self) -> Vec<Vec<f64>> {
        self.traj
            .states()
            .iter()
            .map(|s| self.traj.params().to_user_order(s.values()))
            .collect()
    }

    /// `(first index, period)` when the run ended on an exact repeat.
    #[getter]
    fn exact_cycle(&self) -> Option<(usize, usize)> {
        self.traj.exact_cycle()
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut out = Vec::new();
        self.traj
            .write_csv(&mut out)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        String::from_utf8(out).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.traj.len()
    }
}

/// Limit behaviour: `kind` is "equilibrium", "two_cycle" or "undecided".
#[pyclass(frozen, get_all, module = "cournot")]
struct Outcome {
    kind: &'static str,
    witness: Option<Vec<f64>>,
    rows: Option<Vec<Vec<f64>>>,
    settle_round: Option<u64>,
    rounds: Option<u64>,
    period: Option<usize>,
}

impl Outcome {
    fn new(params: &GameParams, outcome: &DynamicsOutcome) -> Self {
        let mut out = Outcome {
            kind: outcome.kind().as_str(),
            witness: None,
            rows: None,
            settle_round: None,
            rounds: None,
            period: None,
        };
        match outcome {
            DynamicsOutcome::Equilibrium {
                witness,
                settle_round,
            } => {
                out.witness = Some(params.to_user_order(witness.values()));
                out.settle_round = Some(*settle_round);
            }
            DynamicsOutcome::TwoCycle {
                matrix,
                settle_round,
            } => {
                out.rows = Some(matrix.user_rows(params));
                out.settle_round = Some(*settle_round);
            }
            DynamicsOutcome::Undecided { rounds, period } => {
                out.rounds = Some(*rounds);
                out.period = *period;
            }
        }
        out
    }
}

#[pymethods]
impl Outcome {
    fn __repr__(&self) -> String {
        match self.kind {
            "equilibrium" => format!(
                "Outcome(equilibrium, witness={:?})",
                self.witness.as_deref().unwrap_or_default()
            ),
            "two_cycle" => format!(
                "Outcome(two_cycle, rows={:?})",
                self.rows.as_deref().unwrap_or_default()
            ),
            _ => format!(
                "Outcome(undecided, rounds={:?}, period={:?})",
                self.rounds, self.period
            ),
        }
    }
}

/// A two-period oscillation. `family` is `None` for an isolated cycle and
/// otherwise a dict with the parameter name, bounds and representative.
#[pyclass(frozen, get_all, module = "cournot")]
struct Oscillation {
    case: u8,
    k1: usize,
    k2: usize,
    rows: Vec<Vec<f64>>,
    family: Option<Family>,
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "cournot")]
#[derive(Clone)]
struct Family {
    parameter: &'static str,
    lower: f64,
    upper: f64,
    lower_closed: bool,
    upper_closed: bool,
    representative: f64,
}

impl Oscillation {
    fn new(params: &GameParams, o: &CoreOscillation) -> Self {
        Oscillation {
            case: o.case.number(),
            k1: o.k1,
            k2: o.k2,
            rows: o.matrix.user_rows(params),
            family: o.family.as_ref().map(|f| Family {
                parameter: f.parameter.as_str(),
                lower: f.lower().value,
                upper: f.upper().value,
                lower_closed: f.lower().closed,
                upper_closed: f.upper().closed,
                representative: f.representative,
            }),
        }
    }
}

#[pymethods]
impl Oscillation {
    fn __repr__(&self) -> String {
        format!(
            "Oscillation(case={}, k1={}, k2={}, rows={:?})",
            self.case, self.k1, self.k2, self.rows
        )
    }
}

#[pymethods]
impl Family {
    fn __repr__(&self) -> String {
        let open = if self.lower_closed { '[' } else { '(' };
        let close = if self.upper_closed { ']' } else { ')' };
        format!(
            "Family({} in {open}{}, {}{close})",
            self.parameter, self.lower, self.upper
        )
    }
}

#[pyclass(frozen, get_all, module = "cournot")]
struct VerifyReport {
    valid: bool,
    max_residual: f64,
    /// `(row, firm)` of the largest residual.
    worst: (usize, usize),
    residuals: Vec<Vec<f64>>,
}

#[pymethods]
impl VerifyReport {
    fn __repr__(&self) -> String {
        format!(
            "VerifyReport(valid={}, max_residual={}, worst={:?})",
            self.valid, self.max_residual, self.worst
        )
    }
}

/// Randomised property sweep; returns the conformance report as JSON text.
#[pyfunction]
#[pyo3(signature = (trials = 1000, n_min = 1, n_max = 10, seed = 42))]
fn sweep(py: Python<'_>, trials: u64, n_min: usize, n_max: usize, seed: u64) -> PyResult<String> {
    let config = SweepConfig {
        trials,
        n_min,
        n_max,
        seed,
        ..SweepConfig::default()
    };
    let report = py
        .detach(|| propcheck::run_sweep(&config))
        .map_err(PyValueError::new_err)?;
    report
        .to_json()
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn cournot(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Game>()?;
    m.add_class::<Equilibrium>()?;
    m.add_class::<Trajectory>()?;
    m.add_class::<Outcome>()?;
    m.add_class::<Oscillation>()?;
    m.add_class::<Family>()?;
    m.add_class::<VerifyReport>()?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    Ok(())
}
