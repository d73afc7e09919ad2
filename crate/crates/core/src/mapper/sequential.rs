//! Gate-by-gate routing without search: each CNOT whose operands are not adjacent has one
//! operand walked towards the other along a shortest path, one SWAP at a time.

use super::layout::{Mapping, PermutationLayer};
use super::{MappedPlan, Segment, SegmentStats};
use crate::circuit::{Circuit, Gate};
use crate::coupling::CouplingMap;

/// Routes `circuit` gate by gate starting from `initial`.
///
/// The operand that was touched most recently (by a gate or SWAP; the control on a tie) is the
/// one that moves. Each hop goes to a neighbour one step closer to the partner, preferring a
/// neighbour reachable along an outgoing coupling edge, then the lowest index. Qubits are not
/// moved back afterwards.
pub fn route_sequential(circuit: &Circuit, map: &CouplingMap, initial: &Mapping) -> MappedPlan {
    let mut mapping = initial.clone();
    let mut last_touch = vec![0u64; circuit.num_qubits as usize];
    let mut clock = 0u64;
    let mut segments = Vec::with_capacity(circuit.gates.len());
    let mut pending_barrier = false;

    for (i, gate) in circuit.gates.iter().enumerate() {
        let mut swaps = PermutationLayer::default();
        match *gate {
            Gate::Barrier => {
                pending_barrier = true;
                continue;
            }
            Gate::U { qubit, .. } => {
                clock += 1;
                last_touch[qubit as usize] = clock;
            }
            Gate::Cx { control, target } => {
                let mover = if last_touch[target as usize] > last_touch[control as usize] {
                    target
                } else {
                    control
                };
                let partner = if mover == control { target } else { control };
                let goal = mapping.physical(partner).expect("total mapping");
                loop {
                    let here = mapping.physical(mover).expect("total mapping");
                    let d = map.dist(here, goal);
                    if d <= 1 {
                        break;
                    }
                    let hop = map
                        .neighbors(here)
                        .iter()
                        .copied()
                        .filter(|&y| map.dist(y, goal) == d - 1)
                        .min_by_key(|&y| (!map.has_edge(here, y), y))
                        .expect("connected map has a closer neighbour");
                    clock += 1;
                    if let Some(other) = mapping.logical(hop) {
                        last_touch[other as usize] = clock;
                    }
                    last_touch[mover as usize] = clock;
                    mapping.swap_physical(here, hop);
                    swaps.steps.push(vec![(here.min(hop), here.max(hop))]);
                }
                clock += 1;
                last_touch[control as usize] = clock;
                last_touch[target as usize] = clock;
            }
        }
        segments.push(Segment {
            stats: SegmentStats {
                expanded: 0,
                swaps: swaps.swap_count(),
                elapsed: Default::default(),
            },
            swaps,
            gates: vec![i],
            barrier_before: std::mem::take(&mut pending_barrier),
        });
    }

    MappedPlan {
        initial: initial.clone(),
        final_mapping: mapping,
        segments,
    }
}
