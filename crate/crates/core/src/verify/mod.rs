//! Independent checks on a routed circuit: coupling compliance, structural equivalence by
//! replay, and equivalence by simulation.

mod constraints;
mod perm;
mod sim;

use serde::Serialize;

pub use constraints::{check_constraints, ConstraintReport, Violation};
pub use perm::{check_equivalence_perm, PermOutcome};
pub use sim::{
    check_equivalence_sim, u_matrix, SimError, SimOutcome, StateVector, AMPLITUDE_TOLERANCE,
    DEFAULT_TRIALS, MAX_SIM_QUBITS,
};

use crate::circuit::Circuit;
use crate::coupling::CouplingMap;
use crate::emit::MappedCircuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
            Status::Skipped => "skipped",
        }
    }
}

/// One verification result, written as a JSON line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: &'static str,
    pub status: Status,
    pub detail: String,
}

impl CheckReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn constraint_report(mc: &MappedCircuit, map: &CouplingMap) -> CheckReport {
    let report = check_constraints(mc, map);
    CheckReport {
        check: "constraints",
        status: if report.is_clean() { Status::Pass } else { Status::Fail },
        detail: match report.violations.first() {
            None => String::new(),
            Some(v) => format!(
                "{} violations, first at gate {}: CX Q{} -> Q{}",
                report.violations.len(),
                v.gate_index,
                v.control,
                v.target
            ),
        },
    }
}

pub fn perm_report(original: &Circuit, mc: &MappedCircuit) -> CheckReport {
    let (status, detail) = match check_equivalence_perm(original, mc) {
        PermOutcome::Equivalent => (Status::Pass, String::new()),
        PermOutcome::NotEquivalent(r) => (Status::Fail, r),
        PermOutcome::Inconclusive(r) => (Status::Inconclusive, r),
    };
    CheckReport {
        check: "perm",
        status,
        detail,
    }
}

pub fn sim_report(original: &Circuit, mc: &MappedCircuit, trials: usize, seed: u64) -> CheckReport {
    let (status, detail) = match check_equivalence_sim(original, mc, trials, seed) {
        Ok(o) if o.is_equivalent() => (Status::Pass, format!("{} trials on {} qubits", o.trials, o.simulated_qubits)),
        Ok(o) => (
            Status::Fail,
            format!("{}/{} trials matched, max deviation {:e}", o.passed, o.trials, o.max_deviation),
        ),
        Err(e) => (Status::Skipped, e.to_string()),
    };
    CheckReport {
        check: "sim",
        status,
        detail,
    }
}
