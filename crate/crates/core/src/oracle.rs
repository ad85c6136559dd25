//! Brute-force oracles: exact output distributions computed by enumerating
//! noise patterns and evaluating permanents on the full circuit unitary,
//! independent of the percolation/component pipeline.

use nalgebra::DMatrix;
use std::collections::BTreeMap;

use crate::circuit::{build_unitary, Circuit, InputSpec};
use crate::graph::{lightcone_bipartite, SurvivalMask};
use crate::noise::{NoiseKind, NoiseSpec};
use crate::percolation::connected_components;
use crate::permanent::{occupation_submatrix, permanent};
use crate::sampler::compositions;
use crate::util::{binomial_f64, factorial};
use crate::{Result, SimError, C64};

/// Size caps: the oracle is exponential in both N and M.
pub const ORACLE_MAX_SOURCES: usize = 5;
pub const ORACLE_MAX_MODES: usize = 10;

/// Naive permanent: sum over all permutations. Test oracle for Ryser.
pub fn naive_permanent(matrix: &DMatrix<C64>) -> Result<C64> {
    let k = matrix.nrows();
    if k != matrix.ncols() {
        return Err(SimError::NotSquare {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
        });
    }
    if k > 9 {
        return Err(SimError::Parameter(format!(
            "naive permanent capped at 9x9, got {k}x{k}"
        )));
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut total = C64::new(0.0, 0.0);
    permute(&mut perm, 0, &mut |p| {
        let mut prod = C64::new(1.0, 0.0);
        for (r, &c) in p.iter().enumerate() {
            prod *= matrix[(r, c)];
        }
        total += prod;
    });
    Ok(total)
}

fn permute(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, f);
        perm.swap(k, i);
    }
}

fn check_caps(circuit: &Circuit, input: &InputSpec) -> Result<()> {
    if input.num_sources() > ORACLE_MAX_SOURCES || circuit.num_modes > ORACLE_MAX_MODES {
        return Err(SimError::OracleCap {
            n: input.num_sources(),
            m: circuit.num_modes,
        });
    }
    Ok(())
}

/// Exact output distribution of `occupations` photons (per input mode,
/// aligned with `modes`) through the full unitary, over all M output modes.
fn interfering_distribution(
    u: &DMatrix<C64>,
    modes: &[usize],
    occupations: &[usize],
) -> Result<BTreeMap<Vec<usize>, f64>> {
    let m = u.ncols();
    let total: usize = occupations.iter().sum();
    let mut row_occ = vec![0usize; m];
    for (&mode, &n) in modes.iter().zip(occupations) {
        row_occ[mode] = n;
    }
    let in_norm: f64 = occupations.iter().map(|&n| factorial(n)).product();
    let mut dist = BTreeMap::new();
    for outcome in compositions(total, m) {
        let sub = occupation_submatrix(u, &row_occ, &outcome);
        let out_norm: f64 = outcome.iter().map(|&n| factorial(n)).product();
        let p = permanent(&sub)?.norm_sqr() / (out_norm * in_norm);
        if p > 0.0 {
            dist.insert(outcome, p);
        }
    }
    Ok(dist)
}

/// Folds one classically propagating photon from `source` into `dist`.
fn convolve_classical(
    dist: BTreeMap<Vec<usize>, f64>,
    u: &DMatrix<C64>,
    source: usize,
) -> BTreeMap<Vec<usize>, f64> {
    let mut out: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (pattern, p) in dist {
        for w in 0..u.ncols() {
            let pw = u[(source, w)].norm_sqr();
            if pw == 0.0 {
                continue;
            }
            let mut shifted = pattern.clone();
            shifted[w] += 1;
            *out.entry(shifted).or_insert(0.0) += p * pw;
        }
    }
    out
}

/// Enumerates every loss pattern (surviving count per source) with its
/// binomial weight.
fn loss_patterns(counts: &[usize], eta: f64) -> Vec<(Vec<usize>, f64)> {
    let mut patterns: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
    for &n in counts {
        let mut next = Vec::with_capacity(patterns.len() * (n + 1));
        for (prefix, w) in &patterns {
            for k in 0..=n {
                let wk = binomial_f64(n, k)
                    * eta.powi(k as i32)
                    * (1.0 - eta).powi((n - k) as i32);
                let mut p = prefix.clone();
                p.push(k);
                next.push((p, w * wk));
            }
        }
        patterns = next;
    }
    patterns
}

/// Exact noisy output distribution as a mixture over all noise patterns.
///
/// Loss: surviving counts are enumerated per source with binomial weights
/// and each pattern's distribution is computed with permanents on the full
/// unitary. Distinguishability: all 2^N interfering subsets are enumerated
/// with weights x^k (1-x)^(N-k); distinguishable photons are folded in as a
/// classical convolution of single-photon row distributions.
pub fn brute_force_oracle(
    circuit: &Circuit,
    input: &InputSpec,
    noise: &NoiseSpec,
) -> Result<BTreeMap<Vec<usize>, f64>> {
    check_caps(circuit, input)?;
    input.validate_for(circuit.num_modes)?;
    noise.validate()?;
    let u = build_unitary(circuit)?;
    let modes = input.modes();
    let counts = input.counts();
    let mut mixture: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    match noise.kind {
        NoiseKind::Both => return Err(SimError::UnsupportedCombination),
        NoiseKind::Loss => {
            let eta = noise.effective_eta(circuit.depth());
            for (pattern, w) in loss_patterns(&counts, eta) {
                if w == 0.0 {
                    continue;
                }
                let dist = interfering_distribution(&u, &modes, &pattern)?;
                for (outcome, p) in dist {
                    *mixture.entry(outcome).or_insert(0.0) += w * p;
                }
            }
        }
        NoiseKind::Distinguishability => {
            if !input.all_single() {
                return Err(SimError::Parameter(
                    "distinguishability noise is defined for single-photon inputs".into(),
                ));
            }
            let x = noise.x;
            let n = modes.len();
            for subset in 0..(1usize << n) {
                let k = subset.count_ones() as usize;
                let w = x.powi(k as i32) * (1.0 - x).powi((n - k) as i32);
                if w == 0.0 {
                    continue;
                }
                let occupations: Vec<usize> = (0..n)
                    .map(|i| usize::from(subset >> i & 1 == 1))
                    .collect();
                let mut dist = interfering_distribution(&u, &modes, &occupations)?;
                for (i, &mode) in modes.iter().enumerate() {
                    if subset >> i & 1 == 0 {
                        dist = convolve_classical(dist, &u, mode);
                    }
                }
                for (outcome, p) in dist {
                    *mixture.entry(outcome).or_insert(0.0) += w * p;
                }
            }
        }
    }
    Ok(mixture)
}

/// Oracle distribution conditioned on the percolation event E (every
/// component of the surviving lightcone graph has size <= y_cap), plus the
/// exact probabilities of E and its complement.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalOracle {
    pub conditional: BTreeMap<Vec<usize>, f64>,
    pub p_event: f64,
    pub p_violation: f64,
}

/// Loss noise only: enumerates the same loss patterns as the full oracle,
/// classifies each against the component-size cap, and mixes only the
/// patterns inside E.
pub fn brute_force_conditional(
    circuit: &Circuit,
    input: &InputSpec,
    noise: &NoiseSpec,
    y_cap: f64,
) -> Result<ConditionalOracle> {
    check_caps(circuit, input)?;
    input.validate_for(circuit.num_modes)?;
    noise.validate()?;
    if noise.kind != NoiseKind::Loss {
        return Err(SimError::Parameter(
            "conditional oracle supports loss noise only".into(),
        ));
    }
    let u = build_unitary(circuit)?;
    let graph = lightcone_bipartite(circuit, input)?;
    let modes = input.modes();
    let counts = input.counts();
    let eta = noise.effective_eta(circuit.depth());
    let mut conditional: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut p_event = 0.0;
    let mut p_violation = 0.0;
    for (pattern, w) in loss_patterns(&counts, eta) {
        if w == 0.0 {
            continue;
        }
        let mask = SurvivalMask::new(pattern.iter().map(|&k| k > 0).collect());
        let comps = connected_components(&graph, &mask);
        if comps.max_size as f64 > y_cap {
            p_violation += w;
            continue;
        }
        p_event += w;
        for (outcome, p) in interfering_distribution(&u, &modes, &pattern)? {
            *conditional.entry(outcome).or_insert(0.0) += w * p;
        }
    }
    if p_event <= 0.0 {
        return Err(SimError::Parameter(
            "conditioning event has probability zero at this cap".into(),
        ));
    }
    for p in conditional.values_mut() {
        *p /= p_event;
    }
    Ok(ConditionalOracle {
        conditional,
        p_event,
        p_violation,
    })
}
