//! Vertex percolation: removal sampling, connected components, the
//! component-size tail bound and its cap y*, and the Monte-Carlo experiment
//! harness.

use rand::Rng;
use serde::Serialize;
use std::collections::BTreeSet;

use crate::graph::{Arch, BipartiteGraph, SurvivalMask};
use crate::rng::stream_rng;
use crate::{Result, SimError};

/// Derived parameters for a percolation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub eta: f64,
    pub epsilon: f64,
    pub y_star: f64,
}

impl SimParams {
    pub fn new(n: usize, epsilon: f64, eta: f64, delta: usize) -> Result<Self> {
        Ok(SimParams {
            eta,
            epsilon,
            y_star: y_star(n, epsilon, eta, delta)?,
        })
    }
}

/// One connected component of the surviving graph; id-based, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub a_subset: Vec<usize>,
    pub b_subset: Vec<usize>,
}

impl Component {
    /// Component size convention: number of left-hand (input) vertices.
    pub fn size(&self) -> usize {
        self.a_subset.len()
    }
}

/// Disjoint components of the kept subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSet {
    pub components: Vec<Component>,
    pub removed: Vec<usize>,
    pub max_size: usize,
}

impl ComponentSet {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(Component::size).collect()
    }
}

/// Checks survival*delta^2 < 1 and returns it.
fn subcritical_param(eta: f64, delta: usize) -> Result<f64> {
    let v = eta * (delta * delta) as f64;
    if v >= 1.0 {
        return Err(SimError::Supercritical { value: v });
    }
    Ok(v)
}

/// Component-size cap y* = ln(N/eps) / (1 - eta*Delta^2 - ln(eta*Delta^2)).
///
/// Requires eta*Delta^2 < 1; tends to 0+ as eta -> 0 at fixed N, eps.
pub fn y_star(n: usize, epsilon: f64, eta: f64, delta: usize) -> Result<f64> {
    if n < 1 {
        return Err(SimError::Parameter("N must be >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SimError::Parameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let v = subcritical_param(eta, delta)?;
    Ok((n as f64 / epsilon).ln() / (1.0 - v - v.ln()))
}

/// Tail bound Pr(max component > y) <= N * exp(-y * (1 - v - ln v)) with
/// v = eta*Delta^2, clamped to [0, 1] for reporting.
pub fn tail_bound(n: usize, y: f64, eta: f64, delta: usize) -> Result<f64> {
    let v = subcritical_param(eta, delta)?;
    Ok((n as f64 * (-y * (1.0 - v - v.ln())).exp()).clamp(0.0, 1.0))
}

/// Keeps each A-vertex independently with probability eta.
pub fn remove_vertices(g: &BipartiteGraph, eta: f64, rng: &mut impl Rng) -> SurvivalMask {
    SurvivalMask::new((0..g.num_a()).map(|_| rng.gen::<f64>() < eta).collect())
}

/// Union-find with path halving and union by size.
struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// Components of the kept subgraph: two kept A-vertices are connected iff
/// they share a B-neighbor. B-vertices never enter the union-find; each
/// component's b_subset is the union of its members' neighborhoods.
pub fn connected_components(g: &BipartiteGraph, mask: &SurvivalMask) -> ComponentSet {
    assert_eq!(mask.len(), g.num_a(), "mask length must match A");
    let mut uf = UnionFind::new(g.num_a());
    let mut owner: Vec<u32> = vec![u32::MAX; g.m_total()];
    for (slot, &kept) in mask.kept().iter().enumerate() {
        if !kept {
            continue;
        }
        for &b in g.neighbors(slot) {
            if owner[b] == u32::MAX {
                owner[b] = slot as u32;
            } else {
                uf.union(owner[b], slot as u32);
            }
        }
    }
    // group kept slots by root, in slot order
    let mut root_index: Vec<u32> = vec![u32::MAX; g.num_a()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (slot, &kept) in mask.kept().iter().enumerate() {
        if !kept {
            continue;
        }
        let root = uf.find(slot as u32);
        let idx = if root_index[root as usize] == u32::MAX {
            groups.push(Vec::new());
            root_index[root as usize] = (groups.len() - 1) as u32;
            groups.len() - 1
        } else {
            root_index[root as usize] as usize
        };
        groups[idx].push(slot);
    }
    let mut components = Vec::with_capacity(groups.len());
    let mut max_size = 0;
    for slots in groups {
        let mut b: BTreeSet<usize> = BTreeSet::new();
        for &slot in &slots {
            b.extend(g.neighbors(slot).iter().copied());
        }
        let a_subset: Vec<usize> = slots.iter().map(|&s| g.a_vertices()[s]).collect();
        max_size = max_size.max(a_subset.len());
        components.push(Component {
            a_subset,
            b_subset: b.into_iter().collect(),
        });
    }
    ComponentSet {
        components,
        removed: mask.removed_ids(g),
        max_size,
    }
}

/// One row of the percolation experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercRecord {
    pub arch: &'static str,
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub eta: f64,
    pub trial: usize,
    pub seed: u64,
    pub max_component: usize,
    pub num_components: usize,
}

/// Sweeps (eta, N, trial): fresh graph, removal, components. Each trial owns
/// the stream (seed, eta index, N index, trial index), so records are
/// deterministic regardless of scheduling.
pub fn percolation_experiment(
    arch: Arch,
    delta: usize,
    etas: &[f64],
    ns: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<PercRecord>> {
    if trials < 1 {
        return Err(SimError::Parameter("trials must be >= 1".into()));
    }
    let mut records = Vec::with_capacity(etas.len() * ns.len() * trials);
    for (eta_idx, &eta) in etas.iter().enumerate() {
        if !(0.0..=1.0).contains(&eta) {
            return Err(SimError::Parameter(format!(
                "eta must lie in [0, 1], got {eta}"
            )));
        }
        for (n_idx, &n) in ns.iter().enumerate() {
            for trial in 0..trials {
                let mut rng =
                    stream_rng(seed, &[eta_idx as u64, n_idx as u64, trial as u64]);
                let g = arch.generate(n, delta, &mut rng)?;
                let mask = remove_vertices(&g, eta, &mut rng);
                let comps = connected_components(&g, &mask);
                records.push(PercRecord {
                    arch: arch.name(),
                    n,
                    m: g.m_total(),
                    delta,
                    eta,
                    trial,
                    seed,
                    max_component: comps.max_size,
                    num_components: comps.num_components(),
                });
            }
        }
    }
    Ok(records)
}

/// Mean/median/max of max_component over trials, grouped by (eta, N) in
/// sweep order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaNSummary {
    pub eta: f64,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub max: usize,
}

pub fn summarize(records: &[PercRecord]) -> Vec<EtaNSummary> {
    let mut keys: Vec<(u64, usize)> = Vec::new();
    for r in records {
        let key = (r.eta.to_bits(), r.n);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.iter()
        .map(|&(eta_bits, n)| {
            let mut sizes: Vec<usize> = records
                .iter()
                .filter(|r| r.eta.to_bits() == eta_bits && r.n == n)
                .map(|r| r.max_component)
                .collect();
            sizes.sort_unstable();
            let len = sizes.len();
            let median = if len % 2 == 1 {
                sizes[len / 2] as f64
            } else {
                (sizes[len / 2 - 1] + sizes[len / 2]) as f64 / 2.0
            };
            EtaNSummary {
                eta: f64::from_bits(eta_bits),
                n,
                mean: sizes.iter().sum::<usize>() as f64 / len as f64,
                median,
                max: *sizes.last().unwrap(),
            }
        })
        .collect()
}
