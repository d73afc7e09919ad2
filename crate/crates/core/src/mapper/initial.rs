//! Initial placements: a seeded random placement satisfying the first layer, and on-demand
//! completion of a partial mapping.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::layout::Mapping;
use super::search::Heuristic;
use super::MapError;
use crate::coupling::CouplingMap;

/// Rejection-sampling attempts before falling back to constructive placement.
pub const MAX_REJECTIONS: u32 = 100_000;

/// Uniformly random total placement of `num_logical` qubits, resampled until every CNOT of
/// `first_layer` sits on a correctly oriented edge. After [`MAX_REJECTIONS`] failures the CNOTs
/// are placed one by one on random free edges instead.
pub fn random_initial(
    num_logical: u32,
    map: &CouplingMap,
    first_layer: &[(u32, u32)],
    rng: &mut ChaCha8Rng,
) -> Mapping {
    let m = map.num_qubits();
    let mut slots: Vec<u32> = (0..m).collect();
    for _ in 0..MAX_REJECTIONS {
        slots.shuffle(rng);
        let placement = &slots[..num_logical as usize];
        if first_layer
            .iter()
            .all(|&(c, t)| map.has_edge(placement[c as usize], placement[t as usize]))
        {
            return Mapping::from_physical(m, placement);
        }
    }
    constructive_initial(num_logical, map, first_layer, rng)
}

fn constructive_initial(
    num_logical: u32,
    map: &CouplingMap,
    first_layer: &[(u32, u32)],
    rng: &mut ChaCha8Rng,
) -> Mapping {
    let mut mapping = Mapping::empty(num_logical, map.num_qubits());
    for &(c, t) in first_layer {
        let free_edges: Vec<(u32, u32)> = map
            .edges()
            .iter()
            .copied()
            .filter(|&(a, b)| mapping.is_free(a) && mapping.is_free(b))
            .collect();
        if let Some(&(a, b)) = free_edges.choose(rng) {
            mapping.assign(c, a);
            mapping.assign(t, b);
        }
    }
    for q in 0..num_logical {
        if mapping.physical(q).is_none() {
            let free: Vec<u32> = mapping.free_physical().collect();
            let p = free[rng.gen_range(0..free.len())];
            mapping.assign(q, p);
        }
    }
    mapping
}

fn estimate(
    mapping: &Mapping,
    cnots: &[(u32, u32)],
    lookahead: &[(u32, u32)],
    map: &CouplingMap,
    heuristic: Heuristic,
) -> u32 {
    match heuristic {
        Heuristic::Max => super::search::h_baseline(mapping, cnots, map),
        Heuristic::Sum => super::search::h_lookahead(mapping, cnots, lookahead, map),
    }
}

/// Places every unmapped qubit of the layer's CNOTs, CNOT by CNOT in order, on free physical
/// qubits minimizing the heuristic (ties to the lowest index). A CNOT with both operands
/// unmapped is placed as an ordered pair. Returns the newly placed `(logical, physical)` pairs.
pub fn complete_mapping(
    mapping: &mut Mapping,
    cnots: &[(u32, u32)],
    lookahead: &[(u32, u32)],
    map: &CouplingMap,
    heuristic: Heuristic,
) -> Result<Vec<(u32, u32)>, MapError> {
    let mut placed = Vec::new();
    let m = map.num_qubits();
    for &(c, t) in cnots {
        match (mapping.physical(c), mapping.physical(t)) {
            (Some(_), Some(_)) => {}
            (None, None) => {
                let mut best: Option<(u32, u32, u32)> = None;
                for pc in 0..m {
                    if !mapping.is_free(pc) {
                        continue;
                    }
                    for pt in 0..m {
                        if pt == pc || !mapping.is_free(pt) {
                            continue;
                        }
                        let mut trial = mapping.clone();
                        trial.assign(c, pc);
                        trial.assign(t, pt);
                        let h = estimate(&trial, cnots, lookahead, map, heuristic);
                        if best.is_none_or(|(bh, _, _)| h < bh) {
                            best = Some((h, pc, pt));
                        }
                    }
                }
                let (_, pc, pt) = best.ok_or(MapError::Unmappable {
                    logical: mapping.num_logical(),
                    physical: m,
                })?;
                mapping.assign(c, pc);
                mapping.assign(t, pt);
                placed.push((c, pc));
                placed.push((t, pt));
            }
            (Some(_), None) | (None, Some(_)) => {
                let q = if mapping.physical(c).is_none() { c } else { t };
                let mut best: Option<(u32, u32)> = None;
                for p in 0..m {
                    if !mapping.is_free(p) {
                        continue;
                    }
                    let mut trial = mapping.clone();
                    trial.assign(q, p);
                    let h = estimate(&trial, cnots, lookahead, map, heuristic);
                    if best.is_none_or(|(bh, _)| h < bh) {
                        best = Some((h, p));
                    }
                }
                let (_, p) = best.ok_or(MapError::Unmappable {
                    logical: mapping.num_logical(),
                    physical: m,
                })?;
                mapping.assign(q, p);
                placed.push((q, p));
            }
        }
    }
    Ok(placed)
}
