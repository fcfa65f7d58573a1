//! Signed weighted graphs, the random `G(v, floor(3v/5))` family, and exact
//! classical oracles for MAX-CUT on them.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::Rng;

/// Largest active-vertex count accepted by the exhaustive oracles.
pub const MAX_BRUTE_FORCE_QUBITS: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Undirected graph with signed edge weights.
///
/// Edges are stored with `i < j`, sorted, without duplicates. Vertices with
/// no incident edge are kept in `num_vertices` but get no qubit: the qubit
/// register covers only the active vertices, in ascending vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    num_vertices: usize,
    edges: Vec<Edge>,
    active: Vec<usize>,
    qubit_of: Vec<Option<usize>>,
}

impl WeightedGraph {
    pub fn new(num_vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            check_edge(num_vertices, e).map_err(|m| invalid(format!("edge {k}: {m}")))?;
            if !seen.insert((e.i, e.j)) {
                return Err(invalid(format!("edge {k}: duplicate edge ({}, {})", e.i, e.j)));
            }
        }
        Ok(Self::from_validated(num_vertices, edges))
    }

    fn from_validated(num_vertices: usize, mut edges: Vec<Edge>) -> Self {
        edges.sort_by_key(|e| (e.i, e.j));
        let mut degree = vec![0usize; num_vertices];
        for e in &edges {
            degree[e.i] += 1;
            degree[e.j] += 1;
        }
        let active: Vec<usize> = (0..num_vertices).filter(|&u| degree[u] > 0).collect();
        let mut qubit_of = vec![None; num_vertices];
        for (q, &u) in active.iter().enumerate() {
            qubit_of[u] = Some(q);
        }
        Self {
            num_vertices,
            edges,
            active,
            qubit_of,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Vertices with degree at least one, ascending.
    pub fn active_vertices(&self) -> &[usize] {
        &self.active
    }

    /// Number of qubits `n` (active vertex count).
    pub fn num_qubits(&self) -> usize {
        self.active.len()
    }

    pub fn qubit_of_vertex(&self, vertex: usize) -> Option<usize> {
        self.qubit_of.get(vertex).copied().flatten()
    }

    /// Edges re-indexed onto qubits.
    pub fn qubit_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|e| {
            (
                self.qubit_of[e.i].expect("endpoint is active"),
                self.qubit_of[e.j].expect("endpoint is active"),
                e.weight,
            )
        })
    }

    /// Sum of all edge weights, `W`.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            num_vertices: self.num_vertices,
            edges: self.edges.iter().map(|e| (e.i, e.j, e.weight)).collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serializes")
    }

    /// Parses the canonical JSON graph format, reporting the source line of
    /// any offending edge.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            // the line is reported separately
            let message = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m).to_string();
            Error::Parse { line: e.line(), message }
        })?;
        let lines = edge_lines(text);
        let line_of = |k: usize| lines.get(k).copied().unwrap_or(0);

        let mut seen = HashSet::with_capacity(file.edges.len());
        let mut edges = Vec::with_capacity(file.edges.len());
        for (k, &(i, j, weight)) in file.edges.iter().enumerate() {
            let e = Edge { i, j, weight };
            check_edge(file.num_vertices, &e).map_err(|message| Error::Parse {
                line: line_of(k),
                message: format!("edge {k}: {message}"),
            })?;
            if !seen.insert((i, j)) {
                return Err(Error::Parse {
                    line: line_of(k),
                    message: format!("edge {k}: duplicate edge ({i}, {j})"),
                });
            }
            edges.push(e);
        }
        Ok(Self::from_validated(file.num_vertices, edges))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn check_edge(num_vertices: usize, e: &Edge) -> std::result::Result<(), String> {
    if e.i == e.j {
        return Err(format!("self-loop on vertex {}", e.i));
    }
    if e.i > e.j {
        return Err(format!("endpoints ({}, {}) must satisfy i < j", e.i, e.j));
    }
    if e.j >= num_vertices {
        return Err(format!("vertex {} out of range for {num_vertices} vertices", e.j));
    }
    if !e.weight.is_finite() {
        return Err(format!("non-finite weight {}", e.weight));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    num_vertices: usize,
    edges: Vec<(usize, usize, f64)>,
}

/// 1-based source line of each inner array of the top-level `"edges"` field.
fn edge_lines(text: &str) -> Vec<usize> {
    let Some(start) = text.find("\"edges\"") else {
        return Vec::new();
    };
    let mut line = 1 + text[..start].matches('\n').count();
    let mut depth = 0usize;
    let mut lines = Vec::new();
    for ch in text[start..].chars() {
        match ch {
            '\n' => line += 1,
            '[' => {
                depth += 1;
                if depth == 2 {
                    lines.push(line);
                }
            }
            ']' => {
                if depth <= 1 {
                    break;
                }
                depth -= 1;
            }
            _ => {}
        }
    }
    lines
}

/// Edge count of the random family: `floor(3v/5)`.
pub fn family_edge_count(num_vertices: usize) -> usize {
    3 * num_vertices / 5
}

/// Samples `G(v, floor(3v/5))` with i.i.d. uniform weights on `[-1, 1)`.
pub fn generate_graph(num_vertices: usize, rng: &mut Rng) -> Result<WeightedGraph> {
    if num_vertices < 2 {
        return Err(invalid(format!("need at least 2 vertices, got {num_vertices}")));
    }
    let pairs = num_vertices * (num_vertices - 1) / 2;
    let num_edges = family_edge_count(num_vertices);
    if num_edges > pairs {
        return Err(invalid(format!(
            "{num_edges} edges requested but only {pairs} vertex pairs exist"
        )));
    }

    // Floyd's sampling of `num_edges` distinct pair indices.
    let mut chosen = HashSet::with_capacity(num_edges);
    for j in (pairs - num_edges)..pairs {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut indices: Vec<usize> = chosen.into_iter().collect();
    indices.sort_unstable();

    let edges = indices
        .into_iter()
        .map(|k| {
            let (i, j) = decode_pair(num_vertices, k);
            let weight = 2.0 * rng.random::<f64>() - 1.0;
            Edge { i, j, weight }
        })
        .collect();
    Ok(WeightedGraph::from_validated(num_vertices, edges))
}

/// Row-major pair index to `(i, j)` with `i < j`.
fn decode_pair(num_vertices: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = num_vertices - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// A computational-basis outcome: bit `k` belongs to qubit `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    word: u64,
    len: usize,
}

impl Assignment {
    pub fn new(word: u64, len: usize) -> Result<Self> {
        if len > 64 {
            return Err(invalid(format!("assignment length {len} exceeds 64 bits")));
        }
        if len < 64 && word >> len != 0 {
            return Err(invalid(format!("word {word:#x} has bits beyond length {len}")));
        }
        Ok(Self { word, len })
    }

    pub fn zeros(len: usize) -> Self {
        Self { word: 0, len }
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let word = bits
            .iter()
            .enumerate()
            .fold(0u64, |w, (k, &b)| w | (u64::from(b) << k));
        Self::new(word, bits.len())
    }

    pub fn word(&self) -> u64 {
        self.word
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, qubit: usize) -> bool {
        (self.word >> qubit) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        let mask = if self.len == 64 { u64::MAX } else { (1u64 << self.len) - 1 };
        Self {
            word: !self.word & mask,
            len: self.len,
        }
    }
}

/// Character `k` is qubit `k`.
impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len {
            f.write_str(if self.bit(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

fn check_len(g: &WeightedGraph, a: &Assignment) -> Result<()> {
    if a.len != g.num_qubits() {
        return Err(invalid(format!(
            "assignment has {} bits, graph has {} qubits",
            a.len,
            g.num_qubits()
        )));
    }
    Ok(())
}

/// Total weight of edges whose endpoints land on different sides.
pub fn cut_value(g: &WeightedGraph, a: &Assignment) -> Result<f64> {
    check_len(g, a)?;
    Ok(g.qubit_edges()
        .filter(|&(i, j, _)| a.bit(i) != a.bit(j))
        .map(|(_, _, w)| w)
        .sum())
}

/// MAX-CUT Hamiltonian on a basis state: `sum w_ij (1 + z_i z_j) / 2`, the
/// weight of the uncut edges.
pub fn energy(g: &WeightedGraph, a: &Assignment) -> Result<f64> {
    check_len(g, a)?;
    Ok(g.qubit_edges()
        .map(|(i, j, w)| {
            let zz = if a.bit(i) == a.bit(j) { 1.0 } else { -1.0 };
            0.5 * w * (1.0 + zz)
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxCut {
    pub max_cut: f64,
    pub argmax: Assignment,
    pub min_energy: f64,
}

fn check_brute_force(g: &WeightedGraph) -> Result<()> {
    if g.num_qubits() > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::ResourceLimit {
            what: "active vertex count",
            actual: g.num_qubits(),
            limit: MAX_BRUTE_FORCE_QUBITS,
        });
    }
    Ok(())
}

/// Exact MAX-CUT by Gray-code enumeration with qubit 0 pinned to side 0.
pub fn brute_force_max_cut(g: &WeightedGraph) -> Result<MaxCut> {
    check_brute_force(g)?;
    let n = g.num_qubits();
    let total = g.total_weight();
    if n == 0 {
        return Ok(MaxCut {
            max_cut: 0.0,
            argmax: Assignment::zeros(0),
            min_energy: total,
        });
    }

    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, j, w) in g.qubit_edges() {
        adjacency[i].push((j, w));
        adjacency[j].push((i, w));
    }

    let mut word = 0u64;
    let mut cut = 0.0;
    let mut best_word = 0u64;
    let mut best_cut = 0.0;
    for step in 1u64..(1u64 << (n - 1)) {
        // Gray code: flip the qubit one above the lowest set bit of `step`.
        let q = step.trailing_zeros() as usize + 1;
        let side = (word >> q) & 1;
        for &(other, w) in &adjacency[q] {
            if (word >> other) & 1 == side {
                cut += w;
            } else {
                cut -= w;
            }
        }
        word ^= 1 << q;
        if cut > best_cut {
            best_cut = cut;
            best_word = word;
        }
    }

    let argmax = Assignment::new(best_word, n)?;
    // Recompute so the reported value carries no accumulated rounding.
    let max_cut = cut_value(g, &argmax)?;
    Ok(MaxCut {
        max_cut,
        argmax,
        min_energy: total - max_cut,
    })
}

/// Minimum vertex cover of the strictly-positive-weight edges.
pub fn positive_cover_number(g: &WeightedGraph) -> Result<usize> {
    check_brute_force(g)?;
    let positive: Vec<(usize, usize)> = g
        .qubit_edges()
        .filter(|&(_, _, w)| w > 0.0)
        .map(|(i, j, _)| (i, j))
        .collect();
    if positive.is_empty() {
        return Ok(0);
    }

    let mut touched: Vec<usize> = positive.iter().flat_map(|&(i, j)| [i, j]).collect();
    touched.sort_unstable();
    touched.dedup();
    let local = |q: usize| touched.binary_search(&q).expect("touched vertex");
    let edge_masks: Vec<u32> = positive
        .iter()
        .map(|&(i, j)| (1u32 << local(i)) | (1u32 << local(j)))
        .collect();
    let m = touched.len();

    for k in 1..=m {
        // Gosper's hack over all m-bit masks with popcount k.
        let mut subset: u64 = (1u64 << k) - 1;
        while subset < (1u64 << m) {
            let s = subset as u32;
            if edge_masks.iter().all(|&e| e & s != 0) {
                return Ok(k);
            }
            let c = subset & subset.wrapping_neg();
            let r = subset + c;
            subset = (((r ^ subset) >> 2) / c) | r;
        }
    }
    unreachable!("the full vertex set covers every edge")
}
