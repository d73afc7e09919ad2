//! State-vector simulation and randomized equivalence checking.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Circuit, Gate};
use crate::emit::MappedCircuit;

/// Largest number of qubits simulated.
pub const MAX_SIM_QUBITS: u32 = 16;
/// Per-amplitude tolerance after aligning global phase.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_TRIALS: usize = 20;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("{0} qubits exceed the simulation limit of {MAX_SIM_QUBITS}")]
    TooManyQubits(u32),
}

/// Dense state over `k` qubits; qubit `i` is bit `i` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: u32,
    amps: Vec<Complex64>,
}

/// Matrix of `U(theta, phi, lambda)`.
pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
    ]
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(num_qubits: u32) -> Result<Self, SimError> {
        if num_qubits > MAX_SIM_QUBITS {
            return Err(SimError::TooManyQubits(num_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Tensor product of one-qubit states, `factors[i]` on qubit `i`.
    pub fn product(factors: &[[Complex64; 2]]) -> Result<Self, SimError> {
        let k = factors.len() as u32;
        let mut state = StateVector::zero(k)?;
        for (idx, amp) in state.amps.iter_mut().enumerate() {
            *amp = factors
                .iter()
                .enumerate()
                .map(|(q, f)| f[(idx >> q) & 1])
                .product();
        }
        Ok(state)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two());
        StateVector {
            num_qubits: amps.len().trailing_zeros(),
            amps,
        }
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&mut self, gate: &Gate) {
        match *gate {
            Gate::U {
                qubit,
                theta,
                phi,
                lambda,
            } => {
                let u = u_matrix(theta, phi, lambda);
                let bit = 1usize << qubit;
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                        self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                        self.amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
                    }
                }
            }
            Gate::Cx { control, target } => {
                let (cb, tb) = (1usize << control, 1usize << target);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            Gate::Barrier => {}
        }
    }

    pub fn run(&mut self, gates: &[Gate]) {
        for g in gates {
            self.apply(g);
        }
    }

    /// Largest per-amplitude difference after removing the global phase.
    pub fn distance_up_to_phase(&self, other: &StateVector) -> f64 {
        assert_eq!(self.amps.len(), other.amps.len());
        let pivot = (0..self.amps.len())
            .max_by(|&a, &b| self.amps[a].norm_sqr().total_cmp(&self.amps[b].norm_sqr()))
            .unwrap_or(0);
        let phase = if other.amps[pivot].norm() > 1e-12 && self.amps[pivot].norm() > 1e-12 {
            let r = self.amps[pivot] / other.amps[pivot];
            r / r.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimOutcome {
    pub trials: usize,
    /// Trials whose output matched.
    pub passed: usize,
    pub max_deviation: f64,
    pub simulated_qubits: u32,
}

impl SimOutcome {
    pub fn is_equivalent(&self) -> bool {
        self.passed == self.trials
    }
}

fn random_qubit(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Runs both circuits on `trials` random product inputs and compares outputs.
///
/// The routed circuit is simulated only on the physical qubits it uses (gates or mapping). Each
/// logical input starts at its initial position with every other simulated qubit in `|0>`;
/// the expected output is the original's output moved to the declared output positions, with
/// the other qubits back in `|0>`.
pub fn check_equivalence_sim(
    original: &Circuit,
    mc: &MappedCircuit,
    trials: usize,
    seed: u64,
) -> Result<SimOutcome, SimError> {
    let n = original.num_qubits as usize;
    let mut used = vec![false; mc.num_physical as usize];
    for g in &mc.gates {
        for p in g.qubits().iter() {
            used[p as usize] = true;
        }
    }
    for &p in mc.initial.iter().chain(&mc.output) {
        used[p as usize] = true;
    }
    let mut compact = vec![u32::MAX; used.len()];
    let mut k = 0u32;
    for (p, &u) in used.iter().enumerate() {
        if u {
            compact[p] = k;
            k += 1;
        }
    }
    if k > MAX_SIM_QUBITS {
        return Err(SimError::TooManyQubits(k));
    }
    if original.num_qubits > MAX_SIM_QUBITS {
        return Err(SimError::TooManyQubits(original.num_qubits));
    }
    let routed: Vec<Gate> = mc.gates.iter().map(|g| g.remap(|p| compact[p as usize])).collect();
    let out_bits: Vec<u32> = mc.output.iter().map(|&p| compact[p as usize]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcome = SimOutcome {
        trials,
        passed: 0,
        max_deviation: 0.0,
        simulated_qubits: k,
    };
    let zero = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    for _ in 0..trials {
        let inputs: Vec<[Complex64; 2]> = (0..n).map(|_| random_qubit(&mut rng)).collect();

        let mut reference = StateVector::product(&inputs)?;
        reference.run(&original.gates);

        let mut factors = vec![zero; k as usize];
        for (q, &p) in mc.initial.iter().enumerate() {
            factors[compact[p as usize] as usize] = inputs[q];
        }
        let mut actual = StateVector::product(&factors)?;
        actual.run(&routed);

        let mut expected = vec![Complex64::new(0.0, 0.0); 1 << k];
        for (x, &amp) in reference.amplitudes().iter().enumerate() {
            let y = (0..n).fold(0usize, |y, q| y | (((x >> q) & 1) << out_bits[q]));
            expected[y] = amp;
        }
        let deviation = actual.distance_up_to_phase(&StateVector::from_amplitudes(expected));
        outcome.max_deviation = outcome.max_deviation.max(deviation);
        if deviation <= AMPLITUDE_TOLERANCE {
            outcome.passed += 1;
        }
    }
    Ok(outcome)
}
