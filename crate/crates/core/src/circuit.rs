//! Elementary circuit representation and greedy layer partitioning.

use std::f64::consts::{FRAC_PI_2, PI};

/// One operation of an elementary circuit.
///
/// Qubit operands are logical indices in a source [`Circuit`] and physical indices in a mapped
/// circuit; the type does not distinguish the two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    /// The single-qubit rotation `U(theta, phi, lambda) = Rz(phi) Ry(theta) Rz(lambda)`.
    U {
        qubit: u32,
        theta: f64,
        phi: f64,
        lambda: f64,
    },
    Cx {
        control: u32,
        target: u32,
    },
    /// Scheduling fence across all qubits. Not a gate for counting purposes.
    Barrier,
}

impl Gate {
    pub fn u(qubit: u32, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate::U {
            qubit,
            theta,
            phi,
            lambda,
        }
    }

    /// Hadamard as the elementary rotation `U(pi/2, 0, pi)`.
    pub fn h(qubit: u32) -> Self {
        Gate::u(qubit, FRAC_PI_2, 0.0, PI)
    }

    pub fn cx(control: u32, target: u32) -> Self {
        Gate::Cx { control, target }
    }

    pub fn is_hadamard(&self) -> bool {
        matches!(*self, Gate::U { theta, phi, lambda, .. }
            if theta == FRAC_PI_2 && phi == 0.0 && lambda == PI)
    }

    /// Counted gates are `U` and `CX`; barriers are not.
    pub fn is_elementary(&self) -> bool {
        !matches!(self, Gate::Barrier)
    }

    pub fn qubits(&self) -> GateQubits {
        match *self {
            Gate::U { qubit, .. } => GateQubits::One(qubit),
            Gate::Cx { control, target } => GateQubits::Two(control, target),
            Gate::Barrier => GateQubits::None,
        }
    }

    /// Same gate with every operand sent through `f`.
    pub fn remap(&self, mut f: impl FnMut(u32) -> u32) -> Gate {
        match *self {
            Gate::U {
                qubit,
                theta,
                phi,
                lambda,
            } => Gate::u(f(qubit), theta, phi, lambda),
            Gate::Cx { control, target } => Gate::cx(f(control), f(target)),
            Gate::Barrier => Gate::Barrier,
        }
    }
}

/// Operand list of a gate without allocating.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateQubits {
    None,
    One(u32),
    Two(u32, u32),
}

impl GateQubits {
    pub fn iter(self) -> impl Iterator<Item = u32> {
        let (a, b) = match self {
            GateQubits::None => (None, None),
            GateQubits::One(q) => (Some(q), None),
            GateQubits::Two(p, q) => (Some(p), Some(q)),
        };
        a.into_iter().chain(b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalRegister {
    pub name: String,
    pub size: u32,
}

/// `measure q -> c`, kept apart from the gate list and applied after every gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub qubit: u32,
    /// Flat index over all classical registers in declaration order.
    pub clbit: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub num_qubits: u32,
    pub gates: Vec<Gate>,
    pub cregs: Vec<ClassicalRegister>,
    pub measurements: Vec<Measurement>,
}

impl Circuit {
    pub fn new(num_qubits: u32) -> Self {
        Circuit {
            num_qubits,
            ..Default::default()
        }
    }

    pub fn with_gates(num_qubits: u32, gates: Vec<Gate>) -> Self {
        Circuit {
            num_qubits,
            gates,
            ..Default::default()
        }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    /// Number of `U` and `CX` gates.
    pub fn gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_elementary()).count()
    }

    pub fn cx_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cx { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        depth(self)
    }

    /// Checks operand bounds, distinct CX operands and finite angles.
    pub fn validate(&self) -> Result<(), String> {
        for (i, gate) in self.gates.iter().enumerate() {
            for q in gate.qubits().iter() {
                if q >= self.num_qubits {
                    return Err(format!(
                        "gate {i} uses qubit {q} but the circuit has {} qubits",
                        self.num_qubits
                    ));
                }
            }
            match *gate {
                Gate::Cx { control, target } if control == target => {
                    return Err(format!("gate {i}: CX control equals target ({control})"));
                }
                Gate::U {
                    theta, phi, lambda, ..
                } if !(theta.is_finite() && phi.is_finite() && lambda.is_finite()) => {
                    return Err(format!("gate {i}: non-finite rotation angle"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// A set of gates on pairwise-disjoint qubits. `gates` holds indices into the source circuit,
/// in their original order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layer {
    pub index: usize,
    pub gates: Vec<usize>,
    /// A barrier separates this layer from the previous one.
    pub barrier_before: bool,
}

impl Layer {
    /// CNOT operand pairs `(control, target)` of this layer.
    pub fn cnots(&self, circuit: &Circuit) -> Vec<(u32, u32)> {
        self.gates
            .iter()
            .filter_map(|&i| match circuit.gates[i] {
                Gate::Cx { control, target } => Some((control, target)),
                _ => None,
            })
            .collect()
    }
}

/// Greedy as-soon-as-possible layering: every gate lands one layer after the latest earlier
/// gate sharing a qubit with it. A barrier pushes everything after it past every layer
/// opened so far.
pub fn partition_layers(circuit: &Circuit) -> Vec<Layer> {
    let mut next_free = vec![0usize; circuit.num_qubits as usize];
    let mut floor = 0usize;
    let mut layers: Vec<Layer> = Vec::new();
    let mut fenced_floors = Vec::new();

    for (i, gate) in circuit.gates.iter().enumerate() {
        if let Gate::Barrier = gate {
            floor = layers.len();
            if floor > 0 {
                fenced_floors.push(floor);
            }
            continue;
        }
        let qubits = gate.qubits();
        let index = qubits
            .iter()
            .map(|q| next_free[q as usize])
            .max()
            .unwrap_or(0)
            .max(floor);
        for q in qubits.iter() {
            next_free[q as usize] = index + 1;
        }
        while layers.len() <= index {
            layers.push(Layer {
                index: layers.len(),
                gates: Vec::new(),
                barrier_before: false,
            });
        }
        layers[index].gates.push(i);
    }
    for floor in fenced_floors {
        if let Some(layer) = layers.get_mut(floor) {
            layer.barrier_before = true;
        }
    }
    layers
}

/// Number of layers of [`partition_layers`].
pub fn depth(circuit: &Circuit) -> usize {
    partition_layers(circuit).len()
}
