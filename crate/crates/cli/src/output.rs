//! JSON documents written by the subcommands. Quantities are in the caller's
//! firm order.

use cournot_core::format::{sig17_rows, sig17_vec, Sig17};
use cournot_core::oscillation::VerifyReport;
use cournot_core::{
    DynamicsOutcome, EquilibriumSolution, GameParams, Oscillation, OscillationReport,
};
use serde::Serialize;

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeJson {
    Equilibrium {
        witness: Vec<Sig17>,
        settle_round: u64,
    },
    TwoCycle {
        rows: Vec<Vec<Sig17>>,
        settle_round: u64,
    },
    Undecided {
        rounds: u64,
        period: Option<usize>,
    },
}

impl OutcomeJson {
    pub fn new(params: &GameParams, outcome: &DynamicsOutcome) -> Self {
        match outcome {
            DynamicsOutcome::Equilibrium {
                witness,
                settle_round,
            } => OutcomeJson::Equilibrium {
                witness: sig17_vec(&params.to_user_order(witness.values())),
                settle_round: *settle_round,
            },
            DynamicsOutcome::TwoCycle {
                matrix,
                settle_round,
            } => OutcomeJson::TwoCycle {
                rows: sig17_rows(&matrix.user_rows(params)),
                settle_round: *settle_round,
            },
            DynamicsOutcome::Undecided { rounds, period } => OutcomeJson::Undecided {
                rounds: *rounds,
                period: *period,
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EquilibriumJson {
    pub q_star: Vec<Sig17>,
    pub support_size: usize,
    pub total: Sig17,
    pub price: Sig17,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl EquilibriumJson {
    pub fn new(params: &GameParams, eq: &EquilibriumSolution, names: Option<&[String]>) -> Self {
        EquilibriumJson {
            q_star: sig17_vec(&params.to_user_order(eq.q_star.values())),
            support_size: eq.support_size,
            total: Sig17(eq.total),
            price: Sig17(eq.price(params)),
            names: names.map(<[String]>::to_vec),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FamilyJson {
    pub parameter: &'static str,
    pub lower: Sig17,
    pub upper: Sig17,
    pub lower_closed: bool,
    pub upper_closed: bool,
    pub representative: Sig17,
}

#[derive(Debug, Serialize)]
pub struct OscillationJson {
    pub case: u8,
    pub k1: usize,
    pub k2: usize,
    pub rows: Vec<Vec<Sig17>>,
    pub family: Option<FamilyJson>,
    pub verified: bool,
}

impl OscillationJson {
    pub fn new(params: &GameParams, o: &Oscillation, verified: bool) -> Self {
        let family = o.family.as_ref().map(|f| FamilyJson {
            parameter: f.parameter.as_str(),
            lower: Sig17(f.lower().value),
            upper: Sig17(f.upper().value),
            lower_closed: f.lower().closed,
            upper_closed: f.upper().closed,
            representative: Sig17(f.representative),
        });
        OscillationJson {
            case: o.case.number(),
            k1: o.k1,
            k2: o.k2,
            rows: sig17_rows(&o.matrix.user_rows(params)),
            family,
            verified,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OscillationReportJson {
    pub oscillations: Vec<OscillationJson>,
    pub equilibrium: EquilibriumJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl OscillationReportJson {
    pub fn new(
        params: &GameParams,
        report: &OscillationReport,
        verified: impl Fn(&Oscillation) -> bool,
        names: Option<&[String]>,
    ) -> Self {
        OscillationReportJson {
            oscillations: report
                .oscillations
                .iter()
                .map(|o| OscillationJson::new(params, o, verified(o)))
                .collect(),
            equilibrium: EquilibriumJson::new(params, &report.equilibrium, None),
            names: names.map(<[String]>::to_vec),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CellJson {
    /// 1-based row of the matrix.
    pub row: usize,
    /// 1-based firm in the caller's order.
    pub firm: usize,
}

#[derive(Debug, Serialize)]
pub struct VerifyJson {
    pub valid: bool,
    pub max_residual: Sig17,
    pub worst: CellJson,
    pub residuals: Vec<Vec<Sig17>>,
}

impl VerifyJson {
    pub fn new(params: &GameParams, report: &VerifyReport) -> Self {
        VerifyJson {
            valid: report.valid,
            max_residual: Sig17(report.max_residual),
            worst: CellJson {
                row: report.worst.row + 1,
                firm: params.user_index()[report.worst.firm] + 1,
            },
            residuals: report
                .residuals
                .iter()
                .map(|r| sig17_vec(&params.to_user_order(r)))
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReduceJson {
    pub n_bar: usize,
    /// Costs of the averaged game.
    pub reduced_costs: Vec<Sig17>,
    /// Rounds `[start, end)` over which the averaged run was checked.
    pub window: [u64; 2],
    pub max_residual: Sig17,
}
