//! Turns a [`MappedPlan`] into a physical circuit: SWAPs become three CNOTs and four Hadamards,
//! CNOTs against an edge's direction get Hadamards on both sides, and operands are renumbered
//! to physical qubits. Also writes and reads back the QASM form.

use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{depth, Circuit, ClassicalRegister, Gate, Measurement};
use crate::coupling::CouplingMap;
use crate::mapper::{MappedPlan, Mapping};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("physical qubits {0} and {1} are not coupled")]
    NotAdjacent(u32, u32),
    #[error("plan does not match circuit: {0}")]
    PlanMismatch(String),
}

/// Routed circuit over physical qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct MappedCircuit {
    pub num_physical: u32,
    pub num_logical: u32,
    /// Gates on physical qubits.
    pub gates: Vec<Gate>,
    /// `initial[q]`: physical qubit holding logical `q` before the first gate.
    pub initial: Vec<u32>,
    /// `output[q]`: physical qubit holding logical `q` after the last gate.
    pub output: Vec<u32>,
    pub cregs: Vec<ClassicalRegister>,
    /// Measurements on physical qubits, applied after every gate.
    pub measurements: Vec<Measurement>,
}

impl MappedCircuit {
    /// The gate list as an `m`-qubit circuit.
    pub fn to_circuit(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_physical,
            gates: self.gates.clone(),
            cregs: self.cregs.clone(),
            measurements: self.measurements.clone(),
        }
    }

    pub fn gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_elementary()).count()
    }

    pub fn depth(&self) -> usize {
        depth(&Circuit::with_gates(self.num_physical, self.gates.clone()))
    }
}

/// Orientation used for the CNOTs of a SWAP on `(a, b)`.
fn swap_orientation(a: u32, b: u32, map: &CouplingMap) -> Result<(u32, u32), EmitError> {
    let (lo, hi) = (a.min(b), a.max(b));
    if map.has_edge(lo, hi) {
        Ok((lo, hi))
    } else if map.has_edge(hi, lo) {
        Ok((hi, lo))
    } else {
        Err(EmitError::NotAdjacent(a, b))
    }
}

/// `CX(c,t) H(c) H(t) CX(c,t) H(c) H(t) CX(c,t)` along the available edge `c -> t`. The
/// Hadamards turn the middle CNOT around, giving three alternating CNOTs.
pub fn decompose_swap(a: u32, b: u32, map: &CouplingMap) -> Result<[Gate; 7], EmitError> {
    let (c, t) = swap_orientation(a, b, map)?;
    Ok([
        Gate::cx(c, t),
        Gate::h(c),
        Gate::h(t),
        Gate::cx(c, t),
        Gate::h(c),
        Gate::h(t),
        Gate::cx(c, t),
    ])
}

/// A CNOT between physical qubits: one gate along an edge, five against one.
pub fn emit_cnot(control: u32, target: u32, map: &CouplingMap) -> Result<Vec<Gate>, EmitError> {
    if map.has_edge(control, target) {
        Ok(vec![Gate::cx(control, target)])
    } else if map.has_edge(target, control) {
        Ok(vec![
            Gate::h(control),
            Gate::h(target),
            Gate::cx(target, control),
            Gate::h(control),
            Gate::h(target),
        ])
    } else {
        Err(EmitError::NotAdjacent(control, target))
    }
}

/// Emits the plan. SWAPs of one concurrent step are interleaved gate by gate so the layering of
/// the output runs them side by side.
pub fn assemble(plan: &MappedPlan, circuit: &Circuit, map: &CouplingMap) -> Result<MappedCircuit, EmitError> {
    if !plan.initial.is_total() || plan.initial.num_logical() != circuit.num_qubits {
        return Err(EmitError::PlanMismatch(
            "initial mapping must place every logical qubit".into(),
        ));
    }
    if plan.initial.num_physical() != map.num_qubits() {
        return Err(EmitError::PlanMismatch(format!(
            "plan is for {} physical qubits, architecture has {}",
            plan.initial.num_physical(),
            map.num_qubits()
        )));
    }
    let mut mapping: Mapping = plan.initial.clone();
    let mut gates = Vec::new();
    let mut covered = vec![false; circuit.gates.len()];

    for segment in &plan.segments {
        if segment.barrier_before {
            gates.push(Gate::Barrier);
        }
        for step in &segment.swaps.steps {
            let blocks = step
                .iter()
                .map(|&(a, b)| decompose_swap(a, b, map))
                .collect::<Result<Vec<_>, _>>()?;
            for k in 0..7 {
                gates.extend(blocks.iter().map(|block| block[k]));
            }
            for &(a, b) in step {
                mapping.swap_physical(a, b);
            }
        }
        for &gi in &segment.gates {
            let gate = circuit
                .gates
                .get(gi)
                .ok_or_else(|| EmitError::PlanMismatch(format!("gate index {gi} out of range")))?;
            if std::mem::replace(&mut covered[gi], true) {
                return Err(EmitError::PlanMismatch(format!("gate {gi} scheduled twice")));
            }
            let phys = |q: u32| mapping.physical(q).expect("total mapping");
            match *gate {
                Gate::Cx { control, target } => gates.extend(emit_cnot(phys(control), phys(target), map)?),
                Gate::U { .. } => gates.push(gate.remap(phys)),
                Gate::Barrier => gates.push(Gate::Barrier),
            }
        }
    }
    if let Some(missing) = circuit
        .gates
        .iter()
        .zip(&covered)
        .position(|(g, &c)| g.is_elementary() && !c)
    {
        return Err(EmitError::PlanMismatch(format!("gate {missing} never scheduled")));
    }

    let output = mapping.to_physical_vec();
    let measurements = circuit
        .measurements
        .iter()
        .map(|m| Measurement {
            qubit: output[m.qubit as usize],
            clbit: m.clbit,
        })
        .collect();
    Ok(MappedCircuit {
        num_physical: map.num_qubits(),
        num_logical: circuit.num_qubits,
        gates,
        initial: plan.initial.to_physical_vec(),
        output,
        cregs: circuit.cregs.clone(),
        measurements,
    })
}

fn mapping_line(label: &str, positions: &[u32]) -> String {
    let mut line = format!("// {label}:");
    for (q, p) in positions.iter().enumerate() {
        let _ = write!(line, " q{q}->Q{p}");
    }
    line
}

/// Serializes as OpenQASM 2.0 over a single register `q` of `m` qubits.
///
/// Two comment lines record the mappings, one `qK->QP` entry per logical qubit:
///
/// ```text
/// // initial: q0->Q3 q1->Q2 ...
/// // output-perm: q0->Q4 q1->Q2 ...
/// ```
///
/// Hadamards are written as `h`, every other single-qubit gate as `U(theta,phi,lambda)` with
/// angles printed in shortest round-trip form, so parsing the text gives back the same gates.
pub fn to_qasm(mc: &MappedCircuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    out.push_str(&mapping_line("initial", &mc.initial));
    out.push('\n');
    out.push_str(&mapping_line("output-perm", &mc.output));
    out.push('\n');
    let _ = writeln!(out, "qreg q[{}];", mc.num_physical);
    for creg in &mc.cregs {
        let _ = writeln!(out, "creg {}[{}];", creg.name, creg.size);
    }
    for gate in &mc.gates {
        let _ = match *gate {
            Gate::Cx { control, target } => writeln!(out, "CX q[{control}],q[{target}];"),
            Gate::U { qubit, .. } if gate.is_hadamard() => writeln!(out, "h q[{qubit}];"),
            Gate::U {
                qubit,
                theta,
                phi,
                lambda,
            } => writeln!(out, "U({theta},{phi},{lambda}) q[{qubit}];"),
            Gate::Barrier => writeln!(out, "barrier q;"),
        };
    }
    for m in &mc.measurements {
        let mut offset = 0;
        for creg in &mc.cregs {
            if m.clbit < offset + creg.size {
                let _ = writeln!(out, "measure q[{}] -> {}[{}];", m.qubit, creg.name, m.clbit - offset);
                break;
            }
            offset += creg.size;
        }
    }
    out
}

fn read_mapping_line(text: &str, label: &str) -> Option<Vec<u32>> {
    let prefix = format!("// {label}:");
    let line = text.lines().find_map(|l| l.trim().strip_prefix(prefix.as_str()))?;
    let mut entries = Vec::new();
    for (k, item) in line.split_whitespace().enumerate() {
        let (q, p) = item.split_once("->")?;
        if q.strip_prefix('q')?.parse::<usize>().ok()? != k {
            return None;
        }
        entries.push(p.strip_prefix('Q')?.parse().ok()?);
    }
    Some(entries)
}

/// Reads a `// initial: q0->Q3 q1->Q0 ...` comment line.
pub fn parse_initial_header(text: &str) -> Option<Vec<u32>> {
    read_mapping_line(text, "initial")
}

/// Reads the `// initial:` and `// output-perm:` lines written by [`to_qasm`].
pub fn parse_mapping_header(text: &str) -> Option<(Vec<u32>, Vec<u32>)> {
    Some((read_mapping_line(text, "initial")?, read_mapping_line(text, "output-perm")?))
}
