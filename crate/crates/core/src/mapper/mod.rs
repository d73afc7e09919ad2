//! Layer-by-layer routing. Each layer's CNOTs are made executable by an A* search over SWAP
//! steps, starting from the mapping the previous layer ended with.

mod initial;
mod layout;
mod search;
mod sequential;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use initial::{complete_mapping, random_initial, MAX_REJECTIONS};
pub use layout::{Mapping, PermutationLayer, Swap, MAX_PHYSICAL, UNMAPPED};
pub use search::{
    astar_layer, expand, for_each_swap_set, h_baseline, h_lookahead, Heuristic, LayerProblem,
    LayerSolution, SearchError, SearchLimits,
};
pub use sequential::route_sequential;

use crate::circuit::{partition_layers, Circuit, Layer};
use crate::coupling::CouplingMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Random compliant initial mapping, per-layer optimal SWAP sets (max heuristic).
    Baseline,
    /// Random compliant initial mapping, sum heuristic over the layer and the next ones.
    Lookahead,
    /// Empty initial mapping extended on demand, sum heuristic.
    Full,
    /// No search: walk one operand of each CNOT towards the other.
    Naive,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Baseline,
        Strategy::Lookahead,
        Strategy::Full,
        Strategy::Naive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Baseline => "baseline",
            Strategy::Lookahead => "lookahead",
            Strategy::Full => "full",
            Strategy::Naive => "naive",
        }
    }

    fn heuristic(self) -> Heuristic {
        match self {
            Strategy::Baseline | Strategy::Naive => Heuristic::Max,
            Strategy::Lookahead | Strategy::Full => Heuristic::Sum,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown strategy '{s}' (expected baseline, lookahead, full or naive)"))
    }
}

#[derive(Clone, Debug)]
pub struct MapperConfig {
    pub strategy: Strategy,
    /// Seeds the random initial mapping of `Baseline`, `Lookahead` and `Naive`.
    pub seed: u64,
    /// Expanded-node limit per layer.
    pub node_budget: u64,
    pub deadline: Option<Instant>,
    /// Number of following CNOT-carrying layers the sum heuristic looks at.
    pub lookahead_window: usize,
    /// Fixed starting positions (`initial[q]` = physical qubit of `q`), replacing the random
    /// placement. Ignored by `Full`.
    pub initial: Option<Vec<u32>>,
}

impl MapperConfig {
    pub fn new(strategy: Strategy) -> Self {
        MapperConfig {
            strategy,
            seed: 0,
            node_budget: SearchLimits::default().node_budget,
            deadline: None,
            lookahead_window: 1,
            initial: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_initial(mut self, initial: Vec<u32>) -> Self {
        self.initial = Some(initial);
        self
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("circuit needs {logical} qubits but the architecture has {physical}")]
    Unmappable { logical: u32, physical: u32 },
    #[error("architectures above {MAX_PHYSICAL} qubits are not supported")]
    TooManyPhysical,
    #[error("invalid initial mapping: {0}")]
    InvalidInitial(String),
    #[error("node budget exhausted in layer {layer} after {expanded} expansions")]
    BudgetExhausted { layer: usize, expanded: u64 },
    #[error("timed out in layer {layer}")]
    Timeout { layer: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SegmentStats {
    pub expanded: u64,
    pub swaps: usize,
    pub elapsed: Duration,
}

/// SWAPs followed by the gates they enable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub swaps: PermutationLayer,
    /// Indices into the source circuit, in source order.
    pub gates: Vec<usize>,
    /// A barrier precedes this segment's SWAPs.
    pub barrier_before: bool,
    pub stats: SegmentStats,
}

/// Routing result: a total initial mapping and the interleaved SWAP/gate segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappedPlan {
    pub initial: Mapping,
    pub final_mapping: Mapping,
    pub segments: Vec<Segment>,
}

impl MappedPlan {
    pub fn swap_count(&self) -> usize {
        self.segments.iter().map(|s| s.swaps.swap_count()).sum()
    }

    pub fn expanded_nodes(&self) -> u64 {
        self.segments.iter().map(|s| s.stats.expanded).sum()
    }
}

fn check_initial(initial: &[u32], circuit: &Circuit, map: &CouplingMap) -> Result<Mapping, MapError> {
    if initial.len() != circuit.num_qubits as usize {
        return Err(MapError::InvalidInitial(format!(
            "{} positions for {} qubits",
            initial.len(),
            circuit.num_qubits
        )));
    }
    let mut seen = vec![false; map.num_qubits() as usize];
    for &p in initial {
        if p >= map.num_qubits() {
            return Err(MapError::InvalidInitial(format!("Q{p} does not exist")));
        }
        if std::mem::replace(&mut seen[p as usize], true) {
            return Err(MapError::InvalidInitial(format!("Q{p} used twice")));
        }
    }
    Ok(Mapping::from_physical(map.num_qubits(), initial))
}

/// Routes `circuit` onto `map`.
pub fn map_circuit(circuit: &Circuit, map: &CouplingMap, config: &MapperConfig) -> Result<MappedPlan, MapError> {
    if map.num_qubits() > MAX_PHYSICAL {
        return Err(MapError::TooManyPhysical);
    }
    if circuit.num_qubits > map.num_qubits() {
        return Err(MapError::Unmappable {
            logical: circuit.num_qubits,
            physical: map.num_qubits(),
        });
    }
    circuit.validate().map_err(MapError::Internal)?;

    let layers = partition_layers(circuit);
    let layer_cnots: Vec<Vec<(u32, u32)>> = layers.iter().map(|l| l.cnots(circuit)).collect();
    let first_cnots: &[(u32, u32)] = layer_cnots
        .iter()
        .find(|c| !c.is_empty())
        .map(Vec::as_slice)
        .unwrap_or(&[]);

    let seeded_initial = || -> Result<Mapping, MapError> {
        match &config.initial {
            Some(initial) => check_initial(initial, circuit, map),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                Ok(random_initial(circuit.num_qubits, map, first_cnots, &mut rng))
            }
        }
    };

    if config.strategy == Strategy::Naive {
        return Ok(route_sequential(circuit, map, &seeded_initial()?));
    }

    let start = match config.strategy {
        Strategy::Full => Mapping::empty(circuit.num_qubits, map.num_qubits()),
        _ => seeded_initial()?,
    };
    route_layers(circuit, map, config, &layers, &layer_cnots, start)
}

fn route_layers(
    circuit: &Circuit,
    map: &CouplingMap,
    config: &MapperConfig,
    layers: &[Layer],
    layer_cnots: &[Vec<(u32, u32)>],
    start: Mapping,
) -> Result<MappedPlan, MapError> {
    let heuristic = config.strategy.heuristic();
    let limits = SearchLimits {
        node_budget: config.node_budget,
        deadline: config.deadline,
    };
    let m = map.num_qubits();
    let mut mapping = start;
    // origin[p] is where the content now at physical qubit p sat before any SWAP. A logical
    // qubit placed on a free position later is reported as having started at that origin.
    let mut origin: Vec<u32> = (0..m).collect();
    let mut initial_pos: Vec<Option<u32>> = mapping.assignment();
    let mut segments = Vec::with_capacity(layers.len());

    for (i, layer) in layers.iter().enumerate() {
        if let Some(deadline) = config.deadline {
            if Instant::now() >= deadline {
                return Err(MapError::Timeout { layer: i });
            }
        }
        let cnots = &layer_cnots[i];
        let lookahead: Vec<(u32, u32)> = layer_cnots[i + 1..]
            .iter()
            .filter(|c| !c.is_empty())
            .take(config.lookahead_window)
            .flatten()
            .copied()
            .collect();

        let mut stats = SegmentStats::default();
        let mut swaps = PermutationLayer::default();
        if !cnots.is_empty() {
            for (q, p) in complete_mapping(&mut mapping, cnots, &lookahead, map, heuristic)? {
                initial_pos[q as usize] = Some(origin[p as usize]);
            }
            let problem = LayerProblem {
                map,
                cnots,
                lookahead: &lookahead,
                heuristic,
            };
            let solution = astar_layer(&mapping, &problem, &limits, None).map_err(|e| match e {
                SearchError::BudgetExhausted { expanded } => MapError::BudgetExhausted { layer: i, expanded },
                SearchError::Timeout { .. } => MapError::Timeout { layer: i },
                SearchError::Exhausted => MapError::Internal(format!("search space exhausted in layer {i}")),
            })?;
            for (a, b) in solution.swaps.swaps() {
                origin.swap(a as usize, b as usize);
            }
            stats = SegmentStats {
                expanded: solution.expanded,
                swaps: solution.swaps.swap_count(),
                elapsed: solution.elapsed,
            };
            swaps = solution.swaps;
            mapping = solution.mapping;
        }
        segments.push(Segment {
            swaps,
            gates: layer.gates.clone(),
            barrier_before: layer.barrier_before,
            stats,
        });
    }

    // Qubits never used by a CNOT get the lowest free positions left at the end.
    for q in 0..circuit.num_qubits {
        if mapping.physical(q).is_none() {
            let p = mapping
                .free_physical()
                .next()
                .ok_or_else(|| MapError::Internal("no free physical qubit left".into()))?;
            mapping.assign(q, p);
            initial_pos[q as usize] = Some(origin[p as usize]);
        }
    }
    let initial = Mapping::from_assignment(m, &initial_pos);
    Ok(MappedPlan {
        initial,
        final_mapping: mapping,
        segments,
    })
}
