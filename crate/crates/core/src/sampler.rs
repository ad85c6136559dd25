//! Exact simulation of percolation components and the full noisy sampling
//! pipeline: noise pattern -> components -> per-component boson sampling ->
//! merged outcome, with restart-on-oversize and TVD accounting.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::circuit::{build_unitary, Circuit, InputSpec};
use crate::graph::{lightcone_bipartite, BipartiteGraph, SurvivalMask};
use crate::noise::{classical_threshold, sample_distinguishability, sample_loss_fock, NoiseKind, NoiseSpec};
use crate::percolation::{connected_components, y_star, Component};
use crate::permanent::{expand_occupations, occupation_submatrix, permanent};
use crate::util::{binomial_exact, binomial_f64, factorial};
use crate::{Result, SimError, C64};

/// Enumeration cap for exact component distributions.
pub const OUTCOME_ENUM_CAP: usize = 1_000_000;

/// P(m | s) = |Per(U_{s,m})|^2 / (prod_j m_j! prod_i s_i!) with rows of
/// `u_comp` repeated per input occupation and columns per outcome count.
///
/// Rows of `u_comp` must be orthonormal (true for full unitaries and for
/// lightcone components) for the probabilities over all outcomes to sum
/// to 1.
pub fn outcome_probability(u_comp: &DMatrix<C64>, inputs: &[usize], outcome: &[usize]) -> Result<f64> {
    if inputs.len() != u_comp.nrows() || outcome.len() != u_comp.ncols() {
        return Err(SimError::Parameter(format!(
            "occupation lengths ({}, {}) do not match matrix shape ({}, {})",
            inputs.len(),
            outcome.len(),
            u_comp.nrows(),
            u_comp.ncols()
        )));
    }
    let n_in: usize = inputs.iter().sum();
    let n_out: usize = outcome.iter().sum();
    if n_in != n_out {
        return Err(SimError::PhotonMismatch {
            inputs: n_in,
            outcome: n_out,
        });
    }
    let sub = occupation_submatrix(u_comp, inputs, outcome);
    let per = permanent(&sub)?;
    let norm: f64 = outcome.iter().chain(inputs).map(|&k| factorial(k)).product();
    Ok(per.norm_sqr() / norm)
}

/// All outcome patterns with the input photon number, with probabilities.
///
/// Fails with a resource error when the pattern count exceeds
/// `OUTCOME_ENUM_CAP`; use `sample_component` then.
pub fn exact_component_distribution(
    u_comp: &DMatrix<C64>,
    inputs: &[usize],
) -> Result<BTreeMap<Vec<usize>, f64>> {
    let n: usize = inputs.iter().sum();
    let modes = u_comp.ncols();
    if binomial_f64(n + modes - 1, n) > OUTCOME_ENUM_CAP as f64 {
        return Err(SimError::DimensionCap {
            cap: OUTCOME_ENUM_CAP,
        });
    }
    let mut dist = BTreeMap::new();
    for m in compositions(n, modes) {
        let p = outcome_probability(u_comp, inputs, &m)?;
        dist.insert(m, p);
    }
    Ok(dist)
}

/// All ways to place `total` photons into `modes` bins, lexicographic.
pub fn compositions(total: usize, modes: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, modes: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if modes == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            rec(total - first, modes - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, modes, &mut Vec::new(), &mut out);
    out
}

/// Unnormalized marginal probability that the first `m_prefix.len()` output
/// modes of the component hold exactly `m_prefix`, the rest unmeasured.
///
/// With A the row-expanded input matrix (n photons x modes), W the prefix
/// columns of A expanded per outcome count, and K the Gram matrix of the
/// unmeasured columns, the marginal is
///   sum_{S,S'} Per(W[S]) conj(Per(W[S'])) conj(Per(K[comp S', comp S]))
///     / prod_j m_j!,
/// summed over row subsets of size q = sum(m_prefix).
fn prefix_marginal(a: &DMatrix<C64>, k_rest: &DMatrix<C64>, m_prefix: &[usize]) -> Result<f64> {
    let n = a.nrows();
    let q: usize = m_prefix.iter().sum();
    if q > n {
        return Ok(0.0);
    }
    let cols = expand_occupations(m_prefix);
    // W: n x q, columns of the prefix repeated per count
    let w = DMatrix::from_fn(n, q, |r, c| a[(r, cols[c])]);
    let subsets = combinations(n, q);
    let mut pers = Vec::with_capacity(subsets.len());
    for s in &subsets {
        let ws = DMatrix::from_fn(q, q, |r, c| w[(s[r], c)]);
        pers.push(permanent(&ws)?);
    }
    let complements: Vec<Vec<usize>> = subsets
        .iter()
        .map(|s| {
            let mut in_s = vec![false; n];
            for &r in s {
                in_s[r] = true;
            }
            (0..n).filter(|&r| !in_s[r]).collect()
        })
        .collect();
    let mut total = C64::new(0.0, 0.0);
    for (si, s_comp) in complements.iter().enumerate() {
        for (sj, sp_comp) in complements.iter().enumerate() {
            let kk = DMatrix::from_fn(n - q, n - q, |r, c| k_rest[(sp_comp[r], s_comp[c])]);
            total += pers[si] * pers[sj].conj() * permanent(&kk)?.conj();
        }
    }
    let norm: f64 = m_prefix.iter().map(|&m| factorial(m)).product();
    Ok((total.re / norm).max(0.0))
}

/// All q-subsets of 0..n in lexicographic order.
fn combinations(n: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..q).collect();
    if q > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance
        let mut i = q;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - q {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..q {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Chain-rule sampler: modes are processed left to right, each count drawn
/// from its exact conditional marginal; the sampled distribution equals
/// `exact_component_distribution`.
pub fn sample_component(
    u_comp: &DMatrix<C64>,
    inputs: &[usize],
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    if inputs.len() != u_comp.nrows() {
        return Err(SimError::Parameter(format!(
            "input occupations ({}) do not match matrix rows ({})",
            inputs.len(),
            u_comp.nrows()
        )));
    }
    let n: usize = inputs.iter().sum();
    let modes = u_comp.ncols();
    // A: rows expanded per occupation
    let rows = expand_occupations(inputs);
    let a = DMatrix::from_fn(rows.len(), modes, |r, c| u_comp[(rows[r], c)]);
    // suffix Gram matrices: K_s = sum_{w >= s} col_w col_w^dag
    let mut suffix_grams: Vec<DMatrix<C64>> = vec![DMatrix::zeros(n, n); modes + 1];
    for s in (0..modes).rev() {
        let col = a.column(s);
        let mut g = suffix_grams[s + 1].clone();
        for r in 0..n {
            for c in 0..n {
                g[(r, c)] += col[r] * col[c].conj();
            }
        }
        suffix_grams[s] = g;
    }
    let mut outcome: Vec<usize> = Vec::with_capacity(modes);
    let mut placed = 0usize;
    for t in 0..modes {
        let remaining = n - placed;
        if t == modes - 1 {
            outcome.push(remaining);
            break;
        }
        let mut weights = Vec::with_capacity(remaining + 1);
        let mut total = 0.0;
        for c in 0..=remaining {
            outcome.push(c);
            let w = prefix_marginal(&a, &suffix_grams[t + 1], &outcome)?;
            outcome.pop();
            weights.push(w);
            total += w;
        }
        if total <= 0.0 {
            return Err(SimError::Parameter(
                "conditional marginals vanish; component matrix is not a valid sub-unitary"
                    .into(),
            ));
        }
        let mut u = rng.gen::<f64>() * total;
        let mut chosen = remaining;
        for (c, &w) in weights.iter().enumerate() {
            if u < w {
                chosen = c;
                break;
            }
            u -= w;
        }
        outcome.push(chosen);
        placed += chosen;
    }
    Ok(outcome)
}

/// Classical propagation of a distinguishable photon from `source_mode`:
/// output mode w with probability |U_{vw}|^2.
pub fn sample_distinguishable(u: &DMatrix<C64>, source_mode: usize, rng: &mut impl Rng) -> Result<usize> {
    if source_mode >= u.nrows() {
        return Err(SimError::ModeOutOfRange {
            mode: source_mode,
            modes: u.nrows(),
        });
    }
    let row = u.row(source_mode);
    let total: f64 = row.iter().map(|z| z.norm_sqr()).sum();
    let mut t = rng.gen::<f64>() * total;
    for (w, z) in row.iter().enumerate() {
        let p = z.norm_sqr();
        if t < p {
            return Ok(w);
        }
        t -= p;
    }
    Ok(u.ncols() - 1)
}

/// One emitted sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleRecord {
    pub outcome: Vec<usize>,
    #[serde(rename = "lost")]
    pub lost_photons: usize,
    pub restarts: u64,
    pub component_sizes: Vec<usize>,
}

/// Options for the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub epsilon: f64,
    /// Run even when the simulability margin is <= 0.
    pub force: bool,
    /// Replaces the derived component-size cap (mainly for tests and for
    /// forced supercritical runs, where no cap is derivable).
    pub y_star_override: Option<f64>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            epsilon: 0.01,
            force: false,
            y_star_override: None,
        }
    }
}

/// Prepared sampling pipeline; construction performs the one-off work
/// (unitary, lightcone graph, threshold check, cap derivation).
pub struct NoisySampler {
    unitary: DMatrix<C64>,
    graph: BipartiteGraph,
    input_counts: Vec<usize>,
    noise: NoiseSpec,
    eff_eta: f64,
    y_cap: f64,
    restart_limit: u64,
    margin: f64,
    num_modes: usize,
}

impl NoisySampler {
    pub fn new(
        circuit: &Circuit,
        input: &InputSpec,
        noise: &NoiseSpec,
        opts: &SampleOptions,
    ) -> Result<Self> {
        circuit.validate()?;
        input.validate_for(circuit.num_modes)?;
        noise.validate()?;
        if input.num_sources() == 0 {
            return Err(SimError::Parameter("input carries no photons".into()));
        }
        if !(opts.epsilon > 0.0 && opts.epsilon < 1.0) {
            return Err(SimError::Parameter(format!(
                "epsilon must lie in (0, 1), got {}",
                opts.epsilon
            )));
        }
        if noise.kind == NoiseKind::Both {
            return Err(SimError::UnsupportedCombination);
        }
        if noise.kind == NoiseKind::Distinguishability && !input.all_single() {
            return Err(SimError::Parameter(
                "distinguishability noise is defined for single-photon inputs".into(),
            ));
        }
        let unitary = build_unitary(circuit)?;
        let graph = lightcone_bipartite(circuit, input)?;
        let delta = graph.delta();
        let eff_eta = noise.effective_eta(circuit.depth());
        let eff_noise = NoiseSpec {
            eta: eff_eta,
            eta_per_layer: None,
            ..*noise
        };
        let fock_n = if input.max_photon() > 1 {
            Some(input.max_photon())
        } else {
            None
        };
        let (simulable, margin) = classical_threshold(delta, &eff_noise, fock_n)?;
        if !simulable && !opts.force {
            return Err(SimError::NotSimulable { margin });
        }
        let survival = match noise.kind {
            NoiseKind::Loss => match fock_n {
                Some(n) => 1.0 - (1.0 - eff_eta).powi(n as i32),
                None => eff_eta,
            },
            NoiseKind::Distinguishability => noise.x,
            NoiseKind::Both => unreachable!(),
        };
        let y_cap = match opts.y_star_override {
            Some(y) => y,
            None if simulable => y_star(input.num_sources(), opts.epsilon, survival, delta)?,
            None => f64::INFINITY,
        };
        Ok(NoisySampler {
            unitary,
            graph,
            input_counts: input.counts(),
            noise: eff_noise,
            eff_eta,
            y_cap,
            restart_limit: (1e3 / (1.0 - opts.epsilon)).ceil() as u64,
            margin,
            num_modes: circuit.num_modes,
        })
    }

    /// Component-size cap in force for this run.
    pub fn y_cap(&self) -> f64 {
        self.y_cap
    }

    /// Simulability margin of the (effective) noise parameters.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn effective_eta(&self) -> f64 {
        self.eff_eta
    }

    /// Draws one sample: sample the noise pattern, percolate, restart while
    /// any component exceeds the cap (resampling only the noise pattern),
    /// then simulate each component exactly and merge counts per mode.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<SampleRecord> {
        let mut restarts: u64 = 0;
        loop {
            let pattern = self.sample_noise_pattern(rng);
            let comps = connected_components(&self.graph, &pattern.mask);
            if comps.max_size as f64 > self.y_cap {
                restarts += 1;
                if restarts > self.restart_limit {
                    return Err(SimError::RestartLimit {
                        limit: self.restart_limit,
                    });
                }
                continue;
            }
            let mut counts = vec![0usize; self.num_modes];
            for comp in &comps.components {
                let m = self.simulate_component(comp, &pattern, rng)?;
                for (&mode, &c) in comp.b_subset.iter().zip(&m) {
                    counts[mode] += c;
                }
            }
            let mut component_sizes = comps.sizes();
            let mut lost_photons = 0;
            if self.noise.kind == NoiseKind::Loss {
                lost_photons = self.input_counts.iter().sum::<usize>()
                    - pattern.survivors.iter().sum::<usize>();
            } else {
                // distinguishable photons propagate classically, one each
                for (slot, &kept) in pattern.mask.kept().iter().enumerate() {
                    if !kept {
                        let v = self.graph.a_vertices()[slot];
                        let w = sample_distinguishable(&self.unitary, v, rng)?;
                        counts[w] += 1;
                        component_sizes.push(1);
                    }
                }
            }
            return Ok(SampleRecord {
                outcome: counts,
                lost_photons,
                restarts,
                component_sizes,
            });
        }
    }

    fn sample_noise_pattern(&self, rng: &mut impl Rng) -> NoisePattern {
        match self.noise.kind {
            NoiseKind::Loss => {
                let survivors: Vec<usize> = self
                    .input_counts
                    .iter()
                    .map(|&n| sample_loss_fock(n, self.eff_eta, rng))
                    .collect();
                let mask = SurvivalMask::new(survivors.iter().map(|&k| k > 0).collect());
                NoisePattern { mask, survivors }
            }
            NoiseKind::Distinguishability => {
                let indist = sample_distinguishability(self.input_counts.len(), self.noise.x, rng);
                NoisePattern {
                    mask: SurvivalMask::new(indist),
                    survivors: self.input_counts.clone(),
                }
            }
            NoiseKind::Both => unreachable!("rejected at construction"),
        }
    }

    fn simulate_component(
        &self,
        comp: &Component,
        pattern: &NoisePattern,
        rng: &mut impl Rng,
    ) -> Result<Vec<usize>> {
        // slot lookup: a_vertices is sorted
        let occupations: Vec<usize> = comp
            .a_subset
            .iter()
            .map(|&v| {
                let slot = self
                    .graph
                    .a_vertices()
                    .binary_search(&v)
                    .expect("component vertex missing from graph");
                pattern.survivors[slot]
            })
            .collect();
        let u_comp = component_unitary(&self.unitary, comp);
        sample_component(&u_comp, &occupations, rng)
    }
}

struct NoisePattern {
    mask: SurvivalMask,
    /// Surviving photon count per input slot (full counts for
    /// distinguishability noise).
    survivors: Vec<usize>,
}

/// Sub-unitary of a component: rows = component input modes, columns =
/// component output modes.
pub fn component_unitary(u: &DMatrix<C64>, comp: &Component) -> DMatrix<C64> {
    DMatrix::from_fn(comp.a_subset.len(), comp.b_subset.len(), |r, c| {
        u[(comp.a_subset[r], comp.b_subset[c])]
    })
}

/// Convenience wrapper: prepare the pipeline and draw a single sample.
pub fn full_noisy_sample(
    circuit: &Circuit,
    input: &InputSpec,
    noise: &NoiseSpec,
    opts: &SampleOptions,
    rng: &mut impl Rng,
) -> Result<SampleRecord> {
    NoisySampler::new(circuit, input, noise, opts)?.sample(rng)
}

/// Total variation distance (1/2) sum |p - q| over the union of supports.
pub fn tvd(p: &BTreeMap<Vec<usize>, f64>, q: &BTreeMap<Vec<usize>, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, &pv) in p {
        sum += (pv - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &qv) in q {
        if !p.contains_key(k) {
            sum += qv;
        }
    }
    sum / 2.0
}

/// Normalized histogram of outcomes.
pub fn empirical_distribution<I>(outcomes: I) -> BTreeMap<Vec<usize>, f64>
where
    I: IntoIterator<Item = Vec<usize>>,
{
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut total = 0usize;
    for o in outcomes {
        *counts.entry(o).or_insert(0) += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total as f64))
        .collect()
}

/// Component Hilbert-space size bound: binom(Delta*y + n_max*y - 1, n_max*y)
/// with y = ceil(y_star), plus the relaxation [e(Delta+1)]^y for single
/// photons.
#[derive(Debug, Clone, PartialEq)]
pub struct DimBound {
    pub exact: BigUint,
    pub relaxation: Option<f64>,
}

pub fn hilbert_dim_bound(y_star: f64, delta: usize, n_max: usize) -> Result<DimBound> {
    if !y_star.is_finite() || y_star <= 0.0 || delta < 1 || n_max < 1 {
        return Err(SimError::Parameter(
            "hilbert_dim_bound requires y_star > 0, delta >= 1, n_max >= 1".into(),
        ));
    }
    let y = y_star.ceil() as u64;
    let exact = binomial_exact(delta as u64 * y + n_max as u64 * y - 1, n_max as u64 * y);
    let relaxation = (n_max == 1)
        .then(|| (std::f64::consts::E * (delta as f64 + 1.0)).powf(y as f64));
    Ok(DimBound { exact, relaxation })
}
