use serde::Serialize;

use crate::circuit::Gate;
use crate::coupling::CouplingMap;
use crate::emit::MappedCircuit;

/// A CX whose `(control, target)` is not a coupling edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub gate_index: usize,
    pub control: u32,
    pub target: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every CX that the coupling map does not allow in the given direction, and every
/// operand outside the architecture.
pub fn check_constraints(mc: &MappedCircuit, map: &CouplingMap) -> ConstraintReport {
    let violations = mc
        .gates
        .iter()
        .enumerate()
        .filter_map(|(gate_index, gate)| match *gate {
            Gate::Cx { control, target } if !map.has_edge(control, target) => Some(Violation {
                gate_index,
                control,
                target,
            }),
            Gate::U { qubit, .. } if qubit >= map.num_qubits() => Some(Violation {
                gate_index,
                control: qubit,
                target: qubit,
            }),
            _ => None,
        })
        .collect();
    ConstraintReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(gates: Vec<Gate>) -> MappedCircuit {
        MappedCircuit {
            num_physical: 16,
            num_logical: 0,
            gates,
            initial: vec![],
            output: vec![],
            cregs: vec![],
            measurements: vec![],
        }
    }

    #[test]
    fn reversed_edge_is_reported() {
        let qx3 = CouplingMap::builtin("qx3").unwrap();
        let report = check_constraints(&mc(vec![Gate::cx(0, 1), Gate::h(0), Gate::cx(1, 0)]), &qx3);
        assert_eq!(
            report.violations,
            vec![Violation {
                gate_index: 2,
                control: 1,
                target: 0
            }]
        );
    }

    #[test]
    fn no_cx_no_violation() {
        let qx3 = CouplingMap::builtin("qx3").unwrap();
        assert!(check_constraints(&mc(vec![Gate::h(3), Gate::Barrier]), &qx3).is_clean());
    }
}
