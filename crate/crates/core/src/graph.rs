//! Bipartite lightcone graphs and the synthetic graph architectures used in
//! the percolation experiments.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::circuit::{Circuit, InputSpec};
use crate::{Result, SimError};

/// Bipartite graph G = (A, B, E): input vertices A (left), output-mode
/// vertices B (right), adjacency stored per A-slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    a_vertices: Vec<usize>,
    b_vertices: Vec<usize>,
    m_total: usize,
    adj: Vec<Vec<usize>>,
    delta: usize,
}

impl BipartiteGraph {
    /// `adj[slot]` lists the B-ids adjacent to `a_vertices[slot]`; B-ids must
    /// lie in `[0, m_total)`. Neighbor lists are sorted and deduplicated;
    /// `delta` is the max degree over both sides.
    pub fn from_adjacency(
        a_vertices: Vec<usize>,
        mut adj: Vec<Vec<usize>>,
        m_total: usize,
    ) -> Result<Self> {
        if a_vertices.len() != adj.len() {
            return Err(SimError::Parameter(format!(
                "adjacency rows ({}) do not match A-vertex count ({})",
                adj.len(),
                a_vertices.len()
            )));
        }
        let mut b_degree = vec![0usize; m_total];
        let mut delta = 0usize;
        for nbrs in adj.iter_mut() {
            nbrs.sort_unstable();
            nbrs.dedup();
            if let Some(&b) = nbrs.iter().find(|&&b| b >= m_total) {
                return Err(SimError::ModeOutOfRange {
                    mode: b,
                    modes: m_total,
                });
            }
            delta = delta.max(nbrs.len());
            for &b in nbrs.iter() {
                b_degree[b] += 1;
            }
        }
        delta = delta.max(b_degree.iter().copied().max().unwrap_or(0));
        let b_vertices: Vec<usize> = (0..m_total).filter(|&b| b_degree[b] > 0).collect();
        Ok(BipartiteGraph {
            a_vertices,
            b_vertices,
            m_total,
            adj,
            delta,
        })
    }

    pub fn num_a(&self) -> usize {
        self.a_vertices.len()
    }

    pub fn num_b(&self) -> usize {
        self.b_vertices.len()
    }

    pub fn a_vertices(&self) -> &[usize] {
        &self.a_vertices
    }

    pub fn b_vertices(&self) -> &[usize] {
        &self.b_vertices
    }

    /// Total number of output modes (B-ids live in `[0, m_total)`).
    pub fn m_total(&self) -> usize {
        self.m_total
    }

    /// Neighbors of the A-vertex at `slot`, sorted.
    pub fn neighbors(&self, slot: usize) -> &[usize] {
        &self.adj[slot]
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Edge-list export: header "N M DELTA", then one "a_id b_id" per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.num_a(), self.m_total, self.delta);
        for (slot, &a) in self.a_vertices.iter().enumerate() {
            for &b in &self.adj[slot] {
                let _ = writeln!(out, "{a} {b}");
            }
        }
        out
    }
}

/// Per-A-slot survival mask produced by noise sampling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalMask {
    kept: Vec<bool>,
}

impl SurvivalMask {
    pub fn new(kept: Vec<bool>) -> Self {
        SurvivalMask { kept }
    }

    pub fn kept(&self) -> &[bool] {
        &self.kept
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    pub fn num_kept(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }

    pub fn kept_ids(&self, g: &BipartiteGraph) -> Vec<usize> {
        self.slots(true).map(|s| g.a_vertices()[s]).collect()
    }

    pub fn removed_ids(&self, g: &BipartiteGraph) -> Vec<usize> {
        self.slots(false).map(|s| g.a_vertices()[s]).collect()
    }

    fn slots(&self, value: bool) -> impl Iterator<Item = usize> + '_ {
        self.kept
            .iter()
            .enumerate()
            .filter(move |&(_, &k)| k == value)
            .map(|(s, _)| s)
    }
}

/// Max degree over both sides; 0 for the empty graph.
pub fn max_degree(g: &BipartiteGraph) -> usize {
    g.delta()
}

/// Lightcone graph of a circuit: A = occupied input modes, an edge (v, w)
/// iff output mode w is gate-reachable from input mode v, B = union of the
/// per-input lightcones.
///
/// Edges are structural (gate connectivity), independent of the angles.
pub fn lightcone_bipartite(circuit: &Circuit, input: &InputSpec) -> Result<BipartiteGraph> {
    circuit.validate()?;
    input.validate_for(circuit.num_modes)?;
    let m = circuit.num_modes;
    let a = input.modes();
    let mut adj = Vec::with_capacity(a.len());
    for &v in &a {
        let mut reach = vec![false; m];
        reach[v] = true;
        for layer in &circuit.layers {
            for g in layer {
                if reach[g.i] || reach[g.j] {
                    reach[g.i] = true;
                    reach[g.j] = true;
                }
            }
        }
        adj.push((0..m).filter(|&w| reach[w]).collect());
    }
    BipartiteGraph::from_adjacency(a, adj, m)
}

/// Synthetic architectures from the percolation experiments; both place
/// N inputs against M = 8N output sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    Nonlocal,
    #[serde(rename = "1d")]
    OneD,
}

impl Arch {
    pub fn name(&self) -> &'static str {
        match self {
            Arch::Nonlocal => "nonlocal",
            Arch::OneD => "1d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "nonlocal" => Ok(Arch::Nonlocal),
            "1d" => Ok(Arch::OneD),
            other => Err(SimError::Parameter(format!(
                "unknown architecture {other:?} (expected \"nonlocal\" or \"1d\")"
            ))),
        }
    }

    pub fn generate(
        &self,
        n_inputs: usize,
        delta_out: usize,
        rng: &mut impl Rng,
    ) -> Result<BipartiteGraph> {
        match self {
            Arch::Nonlocal => gen_nonlocal(n_inputs, delta_out, rng),
            Arch::OneD => gen_1d(n_inputs, delta_out, rng),
        }
    }
}

/// Random architecture: each of the N inputs draws `delta_out` distinct
/// uniform neighbors among the 8N output sites.
pub fn gen_nonlocal(
    n_inputs: usize,
    delta_out: usize,
    rng: &mut impl Rng,
) -> Result<BipartiteGraph> {
    let m_total = 8 * n_inputs;
    if delta_out > m_total {
        return Err(SimError::Parameter(format!(
            "delta_out ({delta_out}) exceeds the number of output sites ({m_total})"
        )));
    }
    let mut adj = Vec::with_capacity(n_inputs);
    for _ in 0..n_inputs {
        let mut nbrs: Vec<usize> = rand::seq::index::sample(rng, m_total, delta_out).into_vec();
        nbrs.sort_unstable();
        adj.push(nbrs);
    }
    BipartiteGraph::from_adjacency((0..n_inputs).collect(), adj, m_total)
}

/// 1D architecture: input k sits at site k of the 8N-site output line and
/// connects to the `delta_out` nearest sites (window clamped to the line,
/// ties broken toward lower index).
pub fn gen_1d(n_inputs: usize, delta_out: usize, _rng: &mut impl Rng) -> Result<BipartiteGraph> {
    let m_total = 8 * n_inputs;
    if delta_out > m_total {
        return Err(SimError::Parameter(format!(
            "delta_out ({delta_out}) exceeds the number of output sites ({m_total})"
        )));
    }
    let mut adj = Vec::with_capacity(n_inputs);
    for k in 0..n_inputs {
        let start = (k as i64 - (delta_out / 2) as i64)
            .clamp(0, (m_total - delta_out) as i64) as usize;
        adj.push((start..start + delta_out).collect());
    }
    BipartiteGraph::from_adjacency((0..n_inputs).collect(), adj, m_total)
}

/// Butterfly circuit on 2^depth modes whose lightcone meets the degree bound
/// with equality: every input reaches all 2^depth outputs.
pub fn butterfly_circuit(depth: usize) -> Circuit {
    use crate::circuit::BeamSplitter;
    let m = 1usize << depth;
    let layers = (0..depth)
        .map(|l| {
            let stride = 1usize << l;
            (0..m)
                .filter(|i| i & stride == 0)
                .map(|i| BeamSplitter {
                    i,
                    j: i + stride,
                    theta: std::f64::consts::FRAC_PI_4,
                    phi: 0.0,
                })
                .collect()
        })
        .collect();
    Circuit {
        num_modes: m,
        layers,
    }
}

/// Distinct B-ids touched by the kept A-slots.
pub fn covered_b(g: &BipartiteGraph, mask: &SurvivalMask) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (slot, &kept) in mask.kept().iter().enumerate() {
        if kept {
            out.extend(g.neighbors(slot).iter().copied());
        }
    }
    out
}
