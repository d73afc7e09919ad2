//! Structural equivalence: replays the routed circuit, recognizing inserted SWAPs and reversed
//! CNOTs, and checks that what is left is the original circuit in a valid order.

use std::collections::HashSet;

use serde::Serialize;

use crate::circuit::{Circuit, Gate, GateQubits};
use crate::emit::MappedCircuit;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum PermOutcome {
    Equivalent,
    NotEquivalent(String),
    /// The replay hit a pattern it could not resolve; simulation should decide.
    Inconclusive(String),
}

impl PermOutcome {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, PermOutcome::Equivalent)
    }
}

/// Replays `mc` from its declared initial mapping.
///
/// Gate groups `CX H H CX H H CX` on one coupled pair are read as a SWAP and update the
/// physical-to-logical tracker; `H H CX H H` is read as the CNOT pointing the other way when the
/// original expects that CNOT next. Every remaining gate must be the next gate of the original
/// on each of its logical qubits. At the end every original gate must have been seen, the
/// tracker must agree with the declared output permutation, and measurements must match.
pub fn check_equivalence_perm(original: &Circuit, mc: &MappedCircuit) -> PermOutcome {
    match Replay::new(original, mc) {
        Ok(replay) => replay.run(),
        Err(reason) => PermOutcome::NotEquivalent(reason),
    }
}

struct Replay<'a> {
    original: &'a Circuit,
    mc: &'a MappedCircuit,
    /// Original gate indices touching each logical qubit, and the next one expected.
    expected: Vec<Vec<usize>>,
    next_expected: Vec<usize>,
    /// Routed gate indices touching each physical qubit, and the first unprocessed one.
    streams: Vec<Vec<usize>>,
    head: Vec<usize>,
    /// Position of a routed gate within the stream of each of its operands.
    stream_pos: Vec<[usize; 2]>,
    tracker: Vec<Option<u32>>,
    /// Times a SWAP-shaped group was taken literally because the original contained it.
    ambiguous: usize,
}

fn is_h_on(gate: &Gate, q: u32) -> bool {
    gate.is_hadamard() && gate.qubits() == GateQubits::One(q)
}

impl<'a> Replay<'a> {
    fn new(original: &'a Circuit, mc: &'a MappedCircuit) -> Result<Self, String> {
        let n = original.num_qubits as usize;
        let m = mc.num_physical as usize;
        if mc.initial.len() != n || mc.output.len() != n {
            return Err(format!(
                "mapping lists cover {} / {} qubits, original has {n}",
                mc.initial.len(),
                mc.output.len()
            ));
        }
        let mut tracker = vec![None; m];
        for (q, &p) in mc.initial.iter().enumerate() {
            let slot = tracker
                .get_mut(p as usize)
                .ok_or_else(|| format!("initial mapping uses Q{p} outside the device"))?;
            if slot.is_some() {
                return Err(format!("initial mapping places two qubits on Q{p}"));
            }
            *slot = Some(q as u32);
        }

        let mut expected = vec![Vec::new(); n];
        for (i, g) in original.gates.iter().enumerate() {
            for q in g.qubits().iter() {
                expected[q as usize].push(i);
            }
        }
        let mut streams = vec![Vec::new(); m];
        let mut stream_pos = vec![[0usize; 2]; mc.gates.len()];
        for (i, g) in mc.gates.iter().enumerate() {
            for (k, p) in g.qubits().iter().enumerate() {
                let stream = streams
                    .get_mut(p as usize)
                    .ok_or_else(|| format!("gate {i} uses Q{p} outside the device"))?;
                stream_pos[i][k] = stream.len();
                stream.push(i);
            }
        }
        Ok(Replay {
            original,
            mc,
            expected,
            next_expected: vec![0; n],
            streams,
            head: vec![0; m],
            stream_pos,
            tracker,
            ambiguous: 0,
        })
    }

    fn front(&self, p: u32, k: usize) -> Option<usize> {
        self.streams[p as usize].get(self.head[p as usize] + k).copied()
    }

    fn gate(&self, i: usize) -> &Gate {
        &self.mc.gates[i]
    }

    fn is_ready(&self, i: usize) -> bool {
        self.gate(i).qubits().iter().all(|p| self.front(p, 0) == Some(i))
    }

    fn mismatch(&self, reason: String) -> PermOutcome {
        if self.ambiguous > 0 {
            PermOutcome::Inconclusive(reason)
        } else {
            PermOutcome::NotEquivalent(reason)
        }
    }

    /// Original gate that logical qubit `q` is waiting for, as seen from `cursor`.
    fn expected_gate(&self, cursor: &[usize], q: u32) -> Option<usize> {
        self.expected[q as usize].get(cursor[q as usize]).copied()
    }

    /// Checks that physical `gate` is the next original gate on all of its logical operands and
    /// advances `cursor` past it.
    fn accept(&self, cursor: &mut [usize], gate: &Gate) -> Result<(), String> {
        let log = |p: u32| self.tracker[p as usize].ok_or_else(|| format!("{gate:?} acts on Q{p}, which holds no logical qubit"));
        match *gate {
            Gate::U { qubit, .. } => {
                let q = log(qubit)?;
                let idx = self
                    .expected_gate(cursor, q)
                    .ok_or_else(|| format!("extra gate on q{q}"))?;
                if self.original.gates[idx].remap(|_| qubit) != *gate {
                    return Err(format!("q{q}: expected original gate {idx}, found {gate:?}"));
                }
                cursor[q as usize] += 1;
            }
            Gate::Cx { control, target } => {
                let (c, t) = (log(control)?, log(target)?);
                let (ic, it) = (self.expected_gate(cursor, c), self.expected_gate(cursor, t));
                match (ic, it) {
                    (Some(a), Some(b)) if a == b && self.original.gates[a] == Gate::cx(c, t) => {
                        cursor[c as usize] += 1;
                        cursor[t as usize] += 1;
                    }
                    _ => return Err(format!("CX(q{c}, q{t}) is not next in the original")),
                }
            }
            Gate::Barrier => {}
        }
        Ok(())
    }

    fn consume(&mut self, gates: &[usize]) {
        for &i in gates {
            for p in self.gate(i).qubits().iter() {
                debug_assert_eq!(self.front(p, 0), Some(i));
                self.head[p as usize] += 1;
            }
        }
    }

    /// `CX H H CX H H CX` on `(a, b)` starting at ready gate `i`, in emission order.
    fn swap_block(&self, i: usize) -> Option<[usize; 7]> {
        let Gate::Cx { control: a, target: b } = *self.gate(i) else {
            return None;
        };
        let sa: Vec<usize> = (0..5).map(|k| self.front(a, k)).collect::<Option<_>>()?;
        let sb: Vec<usize> = (0..5).map(|k| self.front(b, k)).collect::<Option<_>>()?;
        let cx_ok = |k: usize| sa[k] == sb[k] && *self.gate(sa[k]) == Gate::cx(a, b);
        let h_ok = |k: usize| is_h_on(self.gate(sa[k]), a) && is_h_on(self.gate(sb[k]), b);
        (cx_ok(0) && h_ok(1) && cx_ok(2) && h_ok(3) && cx_ok(4))
            .then(|| [sa[0], sa[1], sb[1], sa[2], sa[3], sb[3], sa[4]])
    }

    /// `H H CX H H` around a CX on `a` and its partner. `Err(())` means the partner's Hadamard
    /// exists but is not at the front of its stream yet.
    fn reversed_cx_block(&self, i: usize) -> Result<Option<[usize; 5]>, ()> {
        let Gate::U { qubit: a, .. } = *self.gate(i) else {
            return Ok(None);
        };
        let (Some(x), Some(h2)) = (self.front(a, 1), self.front(a, 2)) else {
            return Ok(None);
        };
        let Gate::Cx { control, target } = *self.gate(x) else {
            return Ok(None);
        };
        if !is_h_on(self.gate(h2), a) {
            return Ok(None);
        }
        let b = if control == a { target } else { control };
        let k = if control == a { 1 } else { 0 };
        let pos = self.stream_pos[x][k];
        let stream = &self.streams[b as usize];
        let head = self.head[b as usize];
        if pos == 0 || pos < head + 1 {
            return Ok(None);
        }
        let (hb1, hb2) = (stream[pos - 1], stream.get(pos + 1).copied());
        let Some(hb2) = hb2 else { return Ok(None) };
        if !is_h_on(self.gate(hb1), b) || !is_h_on(self.gate(hb2), b) {
            return Ok(None);
        }
        if pos - 1 != head {
            return Err(());
        }
        Ok(Some([i, hb1, x, h2, hb2]))
    }

    fn step(&mut self, i: usize, force_literal: bool) -> Result<bool, String> {
        match *self.gate(i) {
            Gate::Cx { control: a, target: b } => {
                if let Some(block) = self.swap_block(i) {
                    // The original may itself hold these seven gates, or three alternating
                    // CNOTs whose middle one was emitted reversed.
                    let mut cursor = self.next_expected.clone();
                    let mut literal = block.iter().all(|&g| self.accept(&mut cursor, self.gate(g)).is_ok());
                    if !literal {
                        cursor = self.next_expected.clone();
                        literal = [Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]
                            .iter()
                            .all(|g| self.accept(&mut cursor, g).is_ok());
                    }
                    if literal {
                        self.ambiguous += 1;
                        self.next_expected = cursor;
                    } else {
                        self.tracker.swap(a as usize, b as usize);
                    }
                    self.consume(&block);
                    return Ok(true);
                }
            }
            Gate::U { .. } if self.gate(i).is_hadamard() && !force_literal => match self.reversed_cx_block(i) {
                Err(()) => return Ok(false),
                Ok(Some(block)) => {
                    let Gate::Cx { control, target } = *self.gate(block[2]) else {
                        unreachable!()
                    };
                    let mut cursor = self.next_expected.clone();
                    if self.accept(&mut cursor, &Gate::cx(target, control)).is_ok() {
                        self.next_expected = cursor;
                        self.consume(&block);
                        return Ok(true);
                    }
                }
                Ok(None) => {}
            },
            _ => {}
        }
        let mut cursor = std::mem::take(&mut self.next_expected);
        let result = self.accept(&mut cursor, self.gate(i));
        self.next_expected = cursor;
        result?;
        self.consume(&[i]);
        Ok(true)
    }

    fn run(mut self) -> PermOutcome {
        let m = self.streams.len();
        let mut deferred: HashSet<usize> = HashSet::new();
        loop {
            let ready = (0..m as u32)
                .filter_map(|p| self.front(p, 0))
                .filter(|&i| self.is_ready(i) && !deferred.contains(&i))
                .min();
            let (i, force) = match ready {
                Some(i) => (i, false),
                None => match deferred.iter().min() {
                    Some(&i) => (i, true),
                    None => break,
                },
            };
            match self.step(i, force) {
                Ok(true) => deferred.clear(),
                Ok(false) => {
                    deferred.insert(i);
                }
                Err(reason) => return self.mismatch(reason),
            }
        }

        for (q, exp) in self.expected.iter().enumerate() {
            if self.next_expected[q] < exp.len() {
                return self.mismatch(format!(
                    "original gate {} on q{q} never appears",
                    exp[self.next_expected[q]]
                ));
            }
        }
        for (q, &p) in self.mc.output.iter().enumerate() {
            if self.tracker.get(p as usize).copied().flatten() != Some(q as u32) {
                let actual = self.tracker.iter().position(|&l| l == Some(q as u32));
                return self.mismatch(format!(
                    "q{q} ends on {} but the output permutation says Q{p}",
                    actual.map_or("nothing".to_string(), |a| format!("Q{a}"))
                ));
            }
        }
        let mut want: Vec<(u32, u32)> = self
            .original
            .measurements
            .iter()
            .map(|m| (self.mc.output[m.qubit as usize], m.clbit))
            .collect();
        let mut got: Vec<(u32, u32)> = self.mc.measurements.iter().map(|m| (m.qubit, m.clbit)).collect();
        want.sort_unstable();
        got.sort_unstable();
        if want != got {
            return self.mismatch("measurements differ".into());
        }
        PermOutcome::Equivalent
    }
}
