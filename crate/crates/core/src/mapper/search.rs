//! Per-layer A* over mappings. A node is a mapping reached by applying steps of concurrent
//! SWAPs; each SWAP costs 7 and each CNOT left pointing against its coupling edge at the goal
//! costs 4 more.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use super::layout::{Mapping, PermutationLayer, Swap, UNMAPPED};
use crate::coupling::{CouplingMap, FLIP_COST, SWAP_COST};

/// How per-CNOT costs are combined into the estimate of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heuristic {
    /// Maximum over the layer's CNOTs. Never overestimates.
    Max,
    /// Sum over the layer's CNOTs and the look-ahead CNOTs. May overestimate.
    Sum,
}

/// One layer's routing problem, on logical qubits.
#[derive(Clone, Copy, Debug)]
pub struct LayerProblem<'a> {
    pub map: &'a CouplingMap,
    /// CNOTs `(control, target)` that must become executable.
    pub cnots: &'a [(u32, u32)],
    /// CNOTs of the following layers, used only by [`Heuristic::Sum`].
    pub lookahead: &'a [(u32, u32)],
    pub heuristic: Heuristic,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    /// Maximum number of expanded nodes.
    pub node_budget: u64,
    pub deadline: Option<Instant>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            node_budget: 5_000_000,
            deadline: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchError {
    BudgetExhausted { expanded: u64 },
    Timeout { expanded: u64 },
    /// The open list ran dry; cannot happen on a connected map.
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct LayerSolution {
    pub mapping: Mapping,
    pub swaps: PermutationLayer,
    /// `7 * swaps + 4 * reversed CNOTs` of the layer.
    pub cost: u32,
    pub expanded: u64,
    pub elapsed: Duration,
}

/// Cost of every CNOT whose operands are both mapped in `positions` (logical -> physical).
fn cnot_costs<'a>(
    map: &'a CouplingMap,
    positions: &'a [u8],
    cnots: &'a [(u32, u32)],
) -> impl Iterator<Item = u32> + 'a {
    cnots.iter().filter_map(move |&(c, t)| {
        let (pc, pt) = (positions[c as usize], positions[t as usize]);
        (pc != UNMAPPED && pt != UNMAPPED).then(|| map.cnot_cost(pc as u32, pt as u32))
    })
}

/// Largest single-CNOT cost of the layer. CNOTs with an unmapped operand are skipped.
pub fn h_baseline(mapping: &Mapping, cnots: &[(u32, u32)], map: &CouplingMap) -> u32 {
    cnot_costs(map, mapping.raw_log_to_phys(), cnots)
        .max()
        .unwrap_or(0)
}

/// Summed CNOT cost over the layer and the look-ahead CNOTs. CNOTs with an unmapped operand
/// are skipped.
pub fn h_lookahead(
    mapping: &Mapping,
    cnots: &[(u32, u32)],
    next: &[(u32, u32)],
    map: &CouplingMap,
) -> u32 {
    let positions = mapping.raw_log_to_phys();
    cnot_costs(map, positions, cnots).sum::<u32>() + cnot_costs(map, positions, next).sum::<u32>()
}

impl LayerProblem<'_> {
    fn estimate(&self, positions: &[u8]) -> u32 {
        match self.heuristic {
            Heuristic::Max => cnot_costs(self.map, positions, self.cnots).max().unwrap_or(0),
            Heuristic::Sum => {
                cnot_costs(self.map, positions, self.cnots).sum::<u32>()
                    + cnot_costs(self.map, positions, self.lookahead).sum::<u32>()
            }
        }
    }

    fn is_goal(&self, positions: &[u8]) -> bool {
        self.cnots.iter().all(|&(c, t)| {
            self.map
                .dist(positions[c as usize] as u32, positions[t as usize] as u32)
                == 1
        })
    }

    /// Exact remaining cost at a goal: direction fixes, plus the look-ahead estimate for `Sum`.
    fn goal_cost(&self, positions: &[u8]) -> u32 {
        let flips = self
            .cnots
            .iter()
            .filter(|&&(c, t)| {
                !self
                    .map
                    .has_edge(positions[c as usize] as u32, positions[t as usize] as u32)
            })
            .count() as u32
            * FLIP_COST;
        match self.heuristic {
            Heuristic::Max => flips,
            Heuristic::Sum => {
                flips + cnot_costs(self.map, positions, self.lookahead).sum::<u32>()
            }
        }
    }

    /// Logical qubits whose placement the goal test or the estimate can see.
    fn relevant_qubits(&self, start: &Mapping) -> Vec<u32> {
        let mut qs: Vec<u32> = self.cnots.iter().flat_map(|&(c, t)| [c, t]).collect();
        if self.heuristic == Heuristic::Sum {
            qs.extend(
                self.lookahead
                    .iter()
                    .flat_map(|&(c, t)| [c, t])
                    .filter(|&q| start.physical(q).is_some()),
            );
        }
        qs.sort_unstable();
        qs.dedup();
        qs
    }
}

/// Calls `visit` once for every non-empty set of pairwise-disjoint undirected coupling edges in
/// which each edge touches an active physical qubit. Sets are produced by include/exclude
/// recursion over the sorted edge list, so the order is deterministic.
pub fn for_each_swap_set(map: &CouplingMap, active: &[bool], mut visit: impl FnMut(&[Swap])) {
    let candidates: Vec<Swap> = map
        .swap_edges()
        .iter()
        .copied()
        .filter(|&(a, b)| active[a as usize] || active[b as usize])
        .collect();
    let mut used = vec![false; map.num_qubits() as usize];
    let mut chosen = Vec::with_capacity(candidates.len());
    recurse(&candidates, 0, &mut used, &mut chosen, &mut visit);

    fn recurse(
        candidates: &[Swap],
        i: usize,
        used: &mut [bool],
        chosen: &mut Vec<Swap>,
        visit: &mut impl FnMut(&[Swap]),
    ) {
        if i == candidates.len() {
            if !chosen.is_empty() {
                visit(chosen);
            }
            return;
        }
        let (a, b) = candidates[i];
        if !used[a as usize] && !used[b as usize] {
            used[a as usize] = true;
            used[b as usize] = true;
            chosen.push((a, b));
            recurse(candidates, i + 1, used, chosen, visit);
            chosen.pop();
            used[a as usize] = false;
            used[b as usize] = false;
        }
        recurse(candidates, i + 1, used, chosen, visit);
    }
}

/// Successor mappings of `mapping`: one per SWAP set of [`for_each_swap_set`], with the set.
pub fn expand(mapping: &Mapping, active: &[bool], map: &CouplingMap) -> Vec<(Mapping, Vec<Swap>)> {
    let mut out = Vec::new();
    for_each_swap_set(map, active, |set| {
        let mut child = mapping.clone();
        for &(a, b) in set {
            child.swap_physical(a, b);
        }
        out.push((child, set.to_vec()));
    });
    out
}

struct Node {
    parent: u32,
    swaps_start: u32,
    swaps_len: u32,
    g: u32,
    steps: u32,
}

const ROOT: u32 = u32::MAX;

/// Open-list entry, ordered by f, then h, then SWAP steps, then goal copies before ordinary
/// nodes, then insertion order. A goal copy shares the node index of the goal it was made from.
type OpenKey = Reverse<(u32, u32, u32, u8, u64, u32)>;

const TERMINAL: u8 = 0;
const ORDINARY: u8 = 1;

/// Runs A* from `start` until a mapping that makes every layer CNOT executable is proven
/// cheapest under the problem's cost model. `start` must map every qubit of `problem.cnots`.
///
/// If `trace` is given, every expanded mapping is appended to it.
pub fn astar_layer(
    start: &Mapping,
    problem: &LayerProblem<'_>,
    limits: &SearchLimits,
    mut trace: Option<&mut Vec<Mapping>>,
) -> Result<LayerSolution, SearchError> {
    let started = Instant::now();
    let map = problem.map;
    let m = map.num_qubits() as usize;
    let n = start.num_logical() as usize;
    for &(c, t) in problem.cnots {
        assert!(
            start.physical(c).is_some() && start.physical(t).is_some(),
            "layer CNOT ({c}, {t}) has an unmapped operand"
        );
    }
    let relevant = problem.relevant_qubits(start);
    let layer_qubits: Vec<u32> = {
        let mut qs: Vec<u32> = problem.cnots.iter().flat_map(|&(c, t)| [c, t]).collect();
        qs.sort_unstable();
        qs.dedup();
        qs
    };

    let mut nodes: Vec<Node> = Vec::new();
    let mut positions: Vec<u8> = Vec::new();
    let mut swap_arena: Vec<Swap> = Vec::new();
    let mut best_g: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut open: BinaryHeap<OpenKey> = BinaryHeap::new();
    let mut seq = 0u64;
    let key_of = |pos: &[u8]| -> Vec<u8> { relevant.iter().map(|&q| pos[q as usize]).collect() };

    nodes.push(Node {
        parent: ROOT,
        swaps_start: 0,
        swaps_len: 0,
        g: 0,
        steps: 0,
    });
    positions.extend_from_slice(start.raw_log_to_phys());
    let h0 = problem.estimate(start.raw_log_to_phys());
    best_g.insert(key_of(start.raw_log_to_phys()), 0);
    open.push(Reverse((h0, h0, 0, ORDINARY, seq, 0)));

    let mut expanded = 0u64;
    let mut phys_to_log = vec![UNMAPPED; m];
    let mut active = vec![false; m];
    let mut child = vec![0u8; n];

    while let Some(Reverse((_, _, _, rank, _, idx))) = open.pop() {
        if let Some(deadline) = limits.deadline {
            if Instant::now() >= deadline {
                return Err(SearchError::Timeout { expanded });
            }
        }
        let node_pos = idx as usize * n..(idx as usize + 1) * n;
        if rank == TERMINAL {
            let pos = &positions[node_pos];
            let mut steps = Vec::new();
            let mut cursor = idx;
            while cursor != ROOT {
                let node = &nodes[cursor as usize];
                if node.swaps_len > 0 {
                    let s = node.swaps_start as usize;
                    steps.push(swap_arena[s..s + node.swaps_len as usize].to_vec());
                }
                cursor = node.parent;
            }
            steps.reverse();
            let assignment: Vec<Option<u32>> = pos
                .iter()
                .map(|&p| (p != UNMAPPED).then_some(p as u32))
                .collect();
            let g = nodes[idx as usize].g;
            return Ok(LayerSolution {
                mapping: Mapping::from_assignment(m as u32, &assignment),
                swaps: PermutationLayer { steps },
                cost: g + problem.goal_cost(pos) - lookahead_part(problem, pos),
                expanded,
                elapsed: started.elapsed(),
            });
        }

        let (g, steps) = (nodes[idx as usize].g, nodes[idx as usize].steps);
        if best_g
            .get(&key_of(&positions[node_pos.clone()]))
            .is_some_and(|&best| best < g)
        {
            continue;
        }
        expanded += 1;
        if expanded > limits.node_budget {
            return Err(SearchError::BudgetExhausted { expanded });
        }
        if let Some(trace) = trace.as_deref_mut() {
            let assignment: Vec<Option<u32>> = positions[node_pos.clone()]
                .iter()
                .map(|&p| (p != UNMAPPED).then_some(p as u32))
                .collect();
            trace.push(Mapping::from_assignment(m as u32, &assignment));
        }

        if problem.is_goal(&positions[node_pos.clone()]) {
            let f = g + problem.goal_cost(&positions[node_pos.clone()]);
            seq += 1;
            open.push(Reverse((f, 0, steps, TERMINAL, seq, idx)));
        }

        phys_to_log.fill(UNMAPPED);
        active.fill(false);
        for (q, &p) in positions[node_pos.clone()].iter().enumerate() {
            if p != UNMAPPED {
                phys_to_log[p as usize] = q as u8;
            }
        }
        for &q in &layer_qubits {
            active[positions[idx as usize * n + q as usize] as usize] = true;
        }

        let mut successors: Vec<(Vec<Swap>, Vec<u8>)> = Vec::new();
        {
            let parent_pos = &positions[node_pos.clone()];
            for_each_swap_set(map, &active, |set| {
                child.copy_from_slice(parent_pos);
                for &(a, b) in set {
                    let (la, lb) = (phys_to_log[a as usize], phys_to_log[b as usize]);
                    if la != UNMAPPED {
                        child[la as usize] = b as u8;
                    }
                    if lb != UNMAPPED {
                        child[lb as usize] = a as u8;
                    }
                }
                successors.push((set.to_vec(), child.clone()));
            });
        }
        for (set, child_pos) in successors {
            let child_g = g + SWAP_COST * set.len() as u32;
            let key = key_of(&child_pos);
            match best_g.get(&key) {
                Some(&best) if best <= child_g => continue,
                _ => {
                    best_g.insert(key, child_g);
                }
            }
            let h = problem.estimate(&child_pos);
            let child_idx = nodes.len() as u32;
            nodes.push(Node {
                parent: idx,
                swaps_start: swap_arena.len() as u32,
                swaps_len: set.len() as u32,
                g: child_g,
                steps: steps + 1,
            });
            swap_arena.extend_from_slice(&set);
            positions.extend_from_slice(&child_pos);
            seq += 1;
            open.push(Reverse((child_g + h, h, steps + 1, ORDINARY, seq, child_idx)));
        }
    }
    Err(SearchError::Exhausted)
}

fn lookahead_part(problem: &LayerProblem<'_>, pos: &[u8]) -> u32 {
    match problem.heuristic {
        Heuristic::Max => 0,
        Heuristic::Sum => cnot_costs(problem.map, pos, problem.lookahead).sum(),
    }
}
