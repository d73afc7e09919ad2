//! Directed coupling maps, their all-pairs distance table and the per-CNOT routing cost.
//!
//! An edge `(a, b)` allows a CNOT with control `a` and target `b`. SWAPs ignore direction: a SWAP
//! is possible between two physical qubits whenever a CNOT is possible in either direction.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Elementary gates added per inserted SWAP (3 CNOTs and 4 Hadamards).
pub const SWAP_COST: u32 = 7;
/// Elementary gates added to reverse one CNOT (two Hadamards before and two after).
pub const FLIP_COST: u32 = 4;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("unknown architecture '{0}' (expected qx2, qx3, qx4 or qx5)")]
    UnknownArchitecture(String),
    #[error("self-edge on physical qubit {0}")]
    SelfEdge(u32),
    #[error("edge ({0}, {1}) references a qubit >= {2}")]
    IndexOutOfRange(u32, u32, u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("coupling graph is not connected (qubit {0} unreachable from qubit 0)")]
    Disconnected(u32),
    #[error("coupling map needs at least one physical qubit")]
    Empty,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("reading coupling map: {0}")]
    Io(#[from] std::io::Error),
}

/// Built-in IBM QX edge sets, `(control, target)`.
const QX2: &[(u32, u32)] = &[(0, 1), (0, 2), (1, 2), (3, 2), (3, 4), (4, 2)];
const QX4: &[(u32, u32)] = &[(1, 0), (2, 0), (2, 1), (2, 4), (3, 4), (3, 2)];
const QX3: &[(u32, u32)] = &[
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 14),
    (4, 3),
    (4, 5),
    (6, 7),
    (6, 11),
    (7, 10),
    (8, 7),
    (9, 8),
    (9, 10),
    (11, 10),
    (12, 5),
    (12, 11),
    (12, 13),
    (13, 4),
    (13, 14),
    (15, 0),
    (15, 14),
];
const QX5: &[(u32, u32)] = &[
    (1, 0),
    (1, 2),
    (2, 3),
    (3, 4),
    (3, 14),
    (5, 4),
    (6, 5),
    (6, 7),
    (6, 11),
    (7, 10),
    (8, 7),
    (9, 8),
    (9, 10),
    (11, 10),
    (12, 5),
    (12, 11),
    (12, 13),
    (13, 4),
    (13, 14),
    (15, 0),
    (15, 2),
    (15, 14),
];

/// Hop distances between all physical qubits of an undirected view of the map, plus the
/// direction penalty a CNOT would still need after being routed along a cheapest path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceTable {
    size: usize,
    dist: Vec<u32>,
    flip: Vec<bool>,
}

impl DistanceTable {
    pub fn dist(&self, a: u32, b: u32) -> u32 {
        self.dist[a as usize * self.size + b as usize]
    }

    /// True if no cheapest route from `control` to `target` ends on an edge pointing the right
    /// way, so the CNOT will need four extra Hadamards.
    pub fn needs_flip(&self, control: u32, target: u32) -> bool {
        self.flip[control as usize * self.size + target as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingMap {
    name: String,
    num_qubits: u32,
    edges: Vec<(u32, u32)>,
    directed: Vec<bool>,
    neighbors: Vec<Vec<u32>>,
    /// Undirected edges `(min, max)`, sorted.
    swap_edges: Vec<(u32, u32)>,
    table: DistanceTable,
}

impl CouplingMap {
    /// Validates the edge list and precomputes the distance table.
    pub fn new(
        name: impl Into<String>,
        num_qubits: u32,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, CouplingError> {
        if num_qubits == 0 {
            return Err(CouplingError::Empty);
        }
        let m = num_qubits as usize;
        let mut directed = vec![false; m * m];
        let mut edge_list = Vec::new();
        for (a, b) in edges {
            if a >= num_qubits || b >= num_qubits {
                return Err(CouplingError::IndexOutOfRange(a, b, num_qubits));
            }
            if a == b {
                return Err(CouplingError::SelfEdge(a));
            }
            let slot = &mut directed[a as usize * m + b as usize];
            if *slot {
                return Err(CouplingError::DuplicateEdge(a, b));
            }
            *slot = true;
            edge_list.push((a, b));
        }

        let mut neighbors = vec![Vec::new(); m];
        let mut swap_edges = Vec::new();
        for a in 0..m {
            for b in 0..m {
                if directed[a * m + b] || directed[b * m + a] {
                    neighbors[a].push(b as u32);
                    if a < b {
                        swap_edges.push((a as u32, b as u32));
                    }
                }
            }
        }

        let dist = bfs_all_pairs(&neighbors);
        if let Some(unreached) = (0..m).find(|&b| dist[b] == u32::MAX) {
            return Err(CouplingError::Disconnected(unreached as u32));
        }
        let flip = direction_penalties(m, &dist, &edge_list);

        Ok(CouplingMap {
            name: name.into(),
            num_qubits,
            edges: edge_list,
            directed,
            neighbors,
            swap_edges,
            table: DistanceTable {
                size: m,
                dist,
                flip,
            },
        })
    }

    /// One of the IBM QX architectures: `qx2`, `qx3`, `qx4` or `qx5`.
    pub fn builtin(name: &str) -> Result<Self, CouplingError> {
        let (m, edges) = match name.to_ascii_lowercase().as_str() {
            "qx2" => (5, QX2),
            "qx3" => (16, QX3),
            "qx4" => (5, QX4),
            "qx5" => (16, QX5),
            _ => return Err(CouplingError::UnknownArchitecture(name.to_string())),
        };
        CouplingMap::new(name.to_ascii_lowercase(), m, edges.iter().copied())
    }

    /// Parses the text format:
    ///
    /// ```text
    /// # comment
    /// m 5          (also accepted: m=5, m = 5)
    /// 0 1          one "control target" pair per line
    /// ```
    ///
    /// Blank lines and anything after `#` are ignored. The `m` line must come before any edge.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, CouplingError> {
        let mut num_qubits = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| CouplingError::Syntax {
                line: line_no,
                message,
            };
            if num_qubits.is_none() {
                let rest = line
                    .strip_prefix('m')
                    .ok_or_else(|| syntax(format!("expected 'm <count>', found '{line}'")))?;
                let rest = rest.trim_start();
                let rest = rest.strip_prefix('=').unwrap_or(rest).trim();
                let m: u32 = rest
                    .parse()
                    .map_err(|_| syntax(format!("invalid qubit count '{rest}'")))?;
                num_qubits = Some(m);
                continue;
            }
            let mut fields = line.split_whitespace();
            let parse_index = |field: Option<&str>| -> Result<u32, CouplingError> {
                let field = field.ok_or_else(|| syntax("expected 'control target'".into()))?;
                field
                    .parse()
                    .map_err(|_| syntax(format!("invalid qubit index '{field}'")))
            };
            let a = parse_index(fields.next())?;
            let b = parse_index(fields.next())?;
            if let Some(extra) = fields.next() {
                return Err(syntax(format!("unexpected trailing field '{extra}'")));
            }
            edges.push((a, b));
        }
        let m = num_qubits.ok_or(CouplingError::Syntax {
            line: 0,
            message: "missing 'm <count>' header".into(),
        })?;
        CouplingMap::new(name, m, edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CouplingError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        CouplingMap::parse(path.display().to_string(), &text)
    }

    /// Serializes to the format read by [`CouplingMap::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("m {}\n", self.num_qubits);
        for (a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    /// Directed edges in the order given at construction.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Undirected SWAP-capable pairs `(low, high)`, sorted ascending.
    pub fn swap_edges(&self) -> &[(u32, u32)] {
        &self.swap_edges
    }

    pub fn neighbors(&self, q: u32) -> &[u32] {
        &self.neighbors[q as usize]
    }

    pub fn has_edge(&self, control: u32, target: u32) -> bool {
        control < self.num_qubits
            && target < self.num_qubits
            && self.directed[(control * self.num_qubits + target) as usize]
    }

    pub fn are_adjacent(&self, a: u32, b: u32) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    pub fn distances(&self) -> &DistanceTable {
        &self.table
    }

    pub fn dist(&self, a: u32, b: u32) -> u32 {
        self.table.dist(a, b)
    }

    /// Minimum number of elementary gates needed before a CNOT with the given physical operands
    /// can execute: `7 * (dist - 1)` for the SWAPs bringing the operands together, plus `4` if
    /// every cheapest way of doing so ends on an edge pointing the wrong way.
    pub fn cnot_cost(&self, control: u32, target: u32) -> u32 {
        debug_assert_ne!(control, target);
        let d = self.table.dist(control, target);
        let swaps = d.saturating_sub(1) * SWAP_COST;
        if self.table.needs_flip(control, target) {
            swaps + FLIP_COST
        } else {
            swaps
        }
    }
}

impl fmt::Display for CouplingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} qubits, {} edges)",
            self.name,
            self.num_qubits,
            self.edges.len()
        )
    }
}

fn bfs_all_pairs(neighbors: &[Vec<u32>]) -> Vec<u32> {
    let m = neighbors.len();
    let mut dist = vec![u32::MAX; m * m];
    let mut queue = VecDeque::with_capacity(m);
    for source in 0..m {
        let row = &mut dist[source * m..(source + 1) * m];
        row[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in &neighbors[u] {
                let v = v as usize;
                if row[v] == u32::MAX {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

/// `flip[c][t]` is set unless some directed edge `a -> b` lies on a shortest `c .. t` route with
/// `a` on the control side, i.e. `dist(c, a) + 1 + dist(b, t) == dist(c, t)`.
fn direction_penalties(m: usize, dist: &[u32], edges: &[(u32, u32)]) -> Vec<bool> {
    let mut flip = vec![true; m * m];
    for c in 0..m {
        for t in 0..m {
            if c == t {
                flip[c * m + t] = false;
                continue;
            }
            let d = dist[c * m + t];
            flip[c * m + t] = !edges.iter().any(|&(a, b)| {
                dist[c * m + a as usize] + 1 + dist[b as usize * m + t] == d
            });
        }
    }
    flip
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Floyd-Warshall over the undirected view, independent of the BFS table.
    fn floyd(map: &CouplingMap) -> Vec<Vec<u32>> {
        let m = map.num_qubits() as usize;
        let inf = u32::MAX / 4;
        let mut d = vec![vec![inf; m]; m];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for &(a, b) in map.edges() {
            d[a as usize][b as usize] = 1;
            d[b as usize][a as usize] = 1;
        }
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    const ALL: [&str; 4] = ["qx2", "qx3", "qx4", "qx5"];

    #[test]
    fn builtin_sizes() {
        let sizes: Vec<(u32, usize)> = ALL
            .iter()
            .map(|n| {
                let map = CouplingMap::builtin(n).unwrap();
                (map.num_qubits(), map.edges().len())
            })
            .collect();
        assert_eq!(sizes, vec![(5, 6), (16, 20), (5, 6), (16, 22)]);
    }

    #[test]
    fn qx2_edges() {
        let qx2 = CouplingMap::builtin("qx2").unwrap();
        for (a, b) in [(0, 1), (0, 2), (3, 2), (4, 2)] {
            assert!(qx2.has_edge(a, b));
            assert!(!qx2.has_edge(b, a));
        }
    }

    #[test]
    fn qx4_reverses_orientation() {
        let qx4 = CouplingMap::builtin("qx4").unwrap();
        assert!(qx4.has_edge(1, 0));
        assert!(qx4.has_edge(2, 0));
        assert!(!qx4.has_edge(0, 1));
        let qx2 = CouplingMap::builtin("qx2").unwrap();
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(qx2.are_adjacent(a, b), qx4.are_adjacent(a, b));
            }
        }
    }

    #[test]
    fn qx5_edges() {
        let qx5 = CouplingMap::builtin("qx5").unwrap();
        assert!(qx5.has_edge(1, 0));
        assert!(qx5.has_edge(15, 2));
        assert!(qx5.has_edge(12, 5));
        assert!(CouplingMap::builtin("QX5").is_ok());
        assert!(matches!(
            CouplingMap::builtin("qx9"),
            Err(CouplingError::UnknownArchitecture(_))
        ));
    }

    #[test]
    fn bfs_matches_floyd_warshall() {
        for name in ALL {
            let map = CouplingMap::builtin(name).unwrap();
            let oracle = floyd(&map);
            for a in 0..map.num_qubits() {
                for b in 0..map.num_qubits() {
                    assert_eq!(map.dist(a, b), oracle[a as usize][b as usize], "{name} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn distance_table_is_a_metric() {
        for name in ALL {
            let map = CouplingMap::builtin(name).unwrap();
            let m = map.num_qubits();
            for a in 0..m {
                assert_eq!(map.dist(a, a), 0);
                for b in 0..m {
                    assert_eq!(map.dist(a, b), map.dist(b, a));
                    for c in 0..m {
                        assert!(map.dist(a, c) <= map.dist(a, b) + map.dist(b, c));
                    }
                }
            }
        }
    }

    #[test]
    fn cnot_cost_examples() {
        let qx3 = CouplingMap::builtin("qx3").unwrap();
        assert_eq!(qx3.cnot_cost(1, 14), 14);
        let qx5 = CouplingMap::builtin("qx5").unwrap();
        assert_eq!(qx5.cnot_cost(1, 0), 0);
        assert_eq!(qx5.cnot_cost(0, 1), 4);
    }

    #[test]
    fn reversing_a_cnot_changes_cost_by_zero_or_four() {
        for name in ALL {
            let map = CouplingMap::builtin(name).unwrap();
            for a in 0..map.num_qubits() {
                for b in 0..map.num_qubits() {
                    if a == b {
                        continue;
                    }
                    let diff = map.cnot_cost(a, b).abs_diff(map.cnot_cost(b, a));
                    assert!(diff == 0 || diff == FLIP_COST);
                    if map.are_adjacent(a, b) {
                        let expect = if map.has_edge(a, b) { 0 } else { FLIP_COST };
                        assert_eq!(map.cnot_cost(a, b), expect);
                    }
                }
            }
        }
    }

    #[test]
    fn parse_minimal_and_variants() {
        let map = CouplingMap::parse("t", "m=2\n0 1\n").unwrap();
        assert_eq!(map.num_qubits(), 2);
        assert!(map.has_edge(0, 1));
        let map = CouplingMap::parse("t", "# two qubits\nm 2\n\n1 0 # reversed\n").unwrap();
        assert!(map.has_edge(1, 0));
    }

    #[test]
    fn parse_reproduces_builtin() {
        let text = "m 5\n0 1\n0 2\n1 2\n3 2\n3 4\n4 2\n";
        let parsed = CouplingMap::parse("qx2", text).unwrap();
        assert_eq!(parsed, CouplingMap::builtin("qx2").unwrap());
        let qx5 = CouplingMap::builtin("qx5").unwrap();
        assert_eq!(CouplingMap::parse("qx5", &qx5.to_text()).unwrap(), qx5);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            CouplingMap::parse("t", "m 4\n3 3\n"),
            Err(CouplingError::SelfEdge(3))
        ));
        assert!(matches!(
            CouplingMap::parse("t", "m 2\n0 2\n"),
            Err(CouplingError::IndexOutOfRange(0, 2, 2))
        ));
        assert!(matches!(
            CouplingMap::parse("t", "m 4\n0 1\n2 3\n"),
            Err(CouplingError::Disconnected(2))
        ));
        assert!(matches!(
            CouplingMap::parse("t", "0 1\n"),
            Err(CouplingError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            CouplingMap::parse("t", "m 2\n0 1\n0 1\n"),
            Err(CouplingError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            CouplingMap::parse("t", "m 2\n0 x\n"),
            Err(CouplingError::Syntax { line: 2, .. })
        ));
    }
}
