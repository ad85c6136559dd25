//! Matrix-product-state evolution of linear-optical circuits on a truncated
//! Fock space, plus Schmidt-rank checks against the lightcone bounds.
//!
//! Site tensors are stored per mode as one matrix per physical Fock level
//! (left bond x right bond). Gates act TEBD-style: the chain is gauged into
//! mixed-canonical form around the pair (QR sweep from the left, LQ sweep
//! from the right), the two site tensors are contracted, the pair unitary is
//! applied block-diagonally in total photon number, and an SVD splits the
//! pair again, discarding singular values below the threshold. The gauge
//! makes each discarded weight the exact global weight lost, so the
//! accumulated total bounds the infidelity of the truncated state.
//! Non-adjacent pairs are routed with a swap network that is unwound after
//! the gate, so the mode ordering stays fixed.

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;

use crate::circuit::{bs_unitary, Circuit};
use crate::fock::{two_mode_transfer, FockState, MAX_DENSE_LEN};
use crate::svd::jacobi_svd;
use crate::{Result, SimError, C64};

/// Relative weight (squared norm fraction) on pair occupations at or above
/// the cutoff below which that weight is treated as float noise and dropped.
const OVERFLOW_NOISE: f64 = 1e-20;

/// Singular values at or below `s_max * ZERO_REL` are always discarded.
const ZERO_REL: f64 = 1e-14;

/// One input mode prepared in a superposition sum_n c_n |n>.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralInputState {
    amplitudes: Vec<C64>,
}

impl GeneralInputState {
    /// Amplitudes c_0..c_{n_max}; must be normalized to 1 +- 1e-12.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(SimError::Parameter(
                "input state needs at least the vacuum amplitude".into(),
            ));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(SimError::Parameter(format!(
                "input state norm^2 is {norm}, expected 1"
            )));
        }
        Ok(GeneralInputState { amplitudes })
    }

    /// Fock state |n>.
    pub fn fock(n: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); n + 1];
        amplitudes[n] = C64::new(1.0, 0.0);
        GeneralInputState { amplitudes }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct MPSState {
    /// site_tensors[k][n] is the (left bond x right bond) matrix for
    /// physical level n on mode k.
    site_tensors: Vec<Vec<DMatrix<C64>>>,
    local_dim: usize,
    pub trunc_threshold: f64,
    /// Optional hard cap on the bond dimension; exceeding it is an error.
    pub bond_cap: Option<usize>,
    /// Certified upper bound on the fidelity lost to truncation so far:
    /// with per-split relative drops w_g, the overlap with the untruncated
    /// state obeys F >= (sqrt(prod(1-w_g)) - sum(sqrt(w_g)))^2, and this
    /// field reports 1 minus that right-hand side. It dominates 1 - F even
    /// when truncation errors from different gates add coherently.
    pub discarded_weight: f64,
    /// Largest bond dimension produced by any split so far.
    pub max_bond_seen: usize,
    /// prod(1 - w_g) over all splits.
    kept_fraction: f64,
    /// sum(sqrt(w_g)) over all splits.
    amp_error: f64,
}

impl MPSState {
    /// Product state over per-mode superpositions. Bond dims all 1.
    pub fn from_inputs(
        inputs: &[GeneralInputState],
        local_dim: usize,
        trunc_threshold: f64,
    ) -> Result<Self> {
        if inputs.is_empty() || local_dim == 0 {
            return Err(SimError::Parameter(
                "need at least one mode and a positive cutoff".into(),
            ));
        }
        if let Some(s) = inputs.iter().find(|s| s.amplitudes.len() > local_dim) {
            return Err(SimError::CutoffTooSmall {
                local_dim,
                photons: s.n_max(),
            });
        }
        let site_tensors = inputs
            .iter()
            .map(|s| {
                (0..local_dim)
                    .map(|n| {
                        let c = s.amplitudes.get(n).copied().unwrap_or(C64::new(0.0, 0.0));
                        DMatrix::from_element(1, 1, c)
                    })
                    .collect()
            })
            .collect();
        Ok(MPSState {
            site_tensors,
            local_dim,
            trunc_threshold,
            bond_cap: None,
            discarded_weight: 0.0,
            max_bond_seen: 1,
            kept_fraction: 1.0,
            amp_error: 0.0,
        })
    }

    /// Product Fock state |occ_0, occ_1, ...>.
    pub fn from_occupations(occ: &[usize], local_dim: usize, trunc_threshold: f64) -> Result<Self> {
        let inputs: Vec<GeneralInputState> =
            occ.iter().map(|&n| GeneralInputState::fock(n)).collect();
        Self::from_inputs(&inputs, local_dim, trunc_threshold)
    }

    pub fn num_modes(&self) -> usize {
        self.site_tensors.len()
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// Right bond dimension of every site (the last entry is always 1).
    pub fn bond_dims(&self) -> Vec<usize> {
        self.site_tensors.iter().map(|s| s[0].ncols()).collect()
    }

    /// Applies a beam splitter on modes (i, j). Non-adjacent pairs are made
    /// adjacent with swaps, which are themselves SVD steps, then unwound.
    pub fn apply_beamsplitter(&mut self, gate: &Matrix2<C64>, i: usize, j: usize) -> Result<()> {
        let m = self.num_modes();
        if i >= m || j >= m {
            return Err(SimError::ModeOutOfRange {
                mode: i.max(j),
                modes: m,
            });
        }
        if i == j {
            return Err(SimError::Parameter(format!(
                "beam splitter needs two distinct modes, got ({i}, {j})"
            )));
        }
        // Orient so the pair is (lo, hi) with the gate's first slot at lo.
        let (lo, hi, gate) = if i < j {
            (i, j, *gate)
        } else {
            let flipped = Matrix2::new(gate[(1, 1)], gate[(1, 0)], gate[(0, 1)], gate[(0, 0)]);
            (j, i, flipped)
        };
        for k in (lo + 1..hi).rev() {
            self.swap_adjacent(k)?;
        }
        let op = two_site_op(&gate, self.local_dim);
        let result = self.apply_two_site(lo, &op);
        for k in lo + 1..hi {
            self.swap_adjacent(k)?;
        }
        result
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        for layer in &circuit.layers {
            for gate in layer {
                self.apply_beamsplitter(&bs_unitary(gate.theta, gate.phi), gate.i, gate.j)?;
            }
        }
        Ok(())
    }

    fn swap_adjacent(&mut self, k: usize) -> Result<()> {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let op = two_site_op(&Matrix2::new(zero, one, one, zero), self.local_dim);
        self.apply_two_site(k, &op)
    }

    /// Left-canonicalizes site s (thin QR), absorbing the R factor into the
    /// site to its right.
    fn canonicalize_left(&mut self, s: usize) {
        let d = self.local_dim;
        let chi_l = self.site_tensors[s][0].nrows();
        let chi_r = self.site_tensors[s][0].ncols();
        let mut stacked = DMatrix::<C64>::zeros(chi_l * d, chi_r);
        for (n, a) in self.site_tensors[s].iter().enumerate() {
            stacked.view_mut((n * chi_l, 0), (chi_l, chi_r)).copy_from(a);
        }
        let qr = stacked.qr();
        let q = qr.q();
        let r = qr.r();
        let rank = q.ncols();
        self.site_tensors[s] = (0..d)
            .map(|n| DMatrix::from_fn(chi_l, rank, |a, c| q[(n * chi_l + a, c)]))
            .collect();
        for m in 0..d {
            self.site_tensors[s + 1][m] = &r * &self.site_tensors[s + 1][m];
        }
    }

    /// Right-canonicalizes site s (LQ via QR of the adjoint), absorbing the
    /// L factor into the site to its left.
    fn canonicalize_right(&mut self, s: usize) {
        let d = self.local_dim;
        let chi_l = self.site_tensors[s][0].nrows();
        let chi_r = self.site_tensors[s][0].ncols();
        let mut flat = DMatrix::<C64>::zeros(chi_l, d * chi_r);
        for (n, a) in self.site_tensors[s].iter().enumerate() {
            flat.view_mut((0, n * chi_r), (chi_l, chi_r)).copy_from(a);
        }
        let qr = flat.adjoint().qr();
        let q = qr.q();
        let rank = q.ncols();
        self.site_tensors[s] = (0..d)
            .map(|n| DMatrix::from_fn(rank, chi_r, |c, b| q[(n * chi_r + b, c)].conj()))
            .collect();
        let l = qr.r().adjoint();
        for m in 0..d {
            self.site_tensors[s - 1][m] = &self.site_tensors[s - 1][m] * &l;
        }
    }

    /// Contracts sites (k, k+1), applies the pair operator, splits by SVD.
    /// The chain is gauged mixed-canonical around the pair first so the
    /// theta tensor holds the state's actual Schmidt coefficients.
    fn apply_two_site(&mut self, k: usize, op: &DMatrix<C64>) -> Result<()> {
        let d = self.local_dim;
        for s in 0..k {
            self.canonicalize_left(s);
        }
        for s in (k + 2..self.num_modes()).rev() {
            self.canonicalize_right(s);
        }
        let chi_l = self.site_tensors[k][0].nrows();
        let chi_r = self.site_tensors[k + 1][0].ncols();
        let theta: Vec<DMatrix<C64>> = (0..d * d)
            .map(|q| &self.site_tensors[k][q / d] * &self.site_tensors[k + 1][q % d])
            .collect();
        // The pair operator only covers totals below the cutoff; weight on
        // higher totals is either float noise (dropped) or a real overflow.
        let total_w: f64 = theta.iter().map(frob_sqr).sum();
        for (q, block) in theta.iter().enumerate() {
            let t = q / d + q % d;
            if t >= d && frob_sqr(block) > total_w * OVERFLOW_NOISE {
                return Err(SimError::CutoffTooSmall {
                    local_dim: d,
                    photons: t,
                });
            }
        }
        let mut big = DMatrix::<C64>::zeros(chi_l * d, d * chi_r);
        for p in 0..d * d {
            let mut block = DMatrix::<C64>::zeros(chi_l, chi_r);
            for q in 0..d * d {
                let w = op[(p, q)];
                if w != C64::new(0.0, 0.0) {
                    block += &theta[q] * w;
                }
            }
            big.view_mut(((p / d) * chi_l, (p % d) * chi_r), (chi_l, chi_r))
                .copy_from(&block);
        }
        let svd = jacobi_svd(&big);
        let (u, s, vt) = (svd.u, svd.s, svd.v_t);
        let s_max = s[0];
        let mut keep = 1;
        for (idx, &sv) in s.iter().enumerate().skip(1) {
            if sv <= s_max * ZERO_REL || sv < self.trunc_threshold {
                break;
            }
            keep = idx + 1;
        }
        if let Some(cap) = self.bond_cap {
            if keep > cap {
                return Err(SimError::RankBound {
                    rank: keep,
                    bound: cap,
                });
            }
        }
        let sum_w: f64 = s.iter().map(|x| x * x).sum();
        let dropped: f64 = s.iter().skip(keep).map(|x| x * x).sum();
        if sum_w > 0.0 && dropped > 0.0 {
            let w = dropped / sum_w;
            self.kept_fraction *= 1.0 - w;
            self.amp_error += w.sqrt();
            let overlap = (self.kept_fraction.sqrt() - self.amp_error).max(0.0);
            self.discarded_weight = (1.0 - overlap * overlap).min(1.0);
        }
        self.site_tensors[k] = (0..d)
            .map(|n| DMatrix::from_fn(chi_l, keep, |a, c| u[(n * chi_l + a, c)]))
            .collect();
        self.site_tensors[k + 1] = (0..d)
            .map(|m| DMatrix::from_fn(keep, chi_r, |c, b| vt[(c, m * chi_r + b)] * s[c]))
            .collect();
        self.max_bond_seen = self.max_bond_seen.max(keep);
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        let mut env = DMatrix::<C64>::from_element(1, 1, C64::new(1.0, 0.0));
        for site in &self.site_tensors {
            let chi_next = site[0].ncols();
            let mut next = DMatrix::<C64>::zeros(chi_next, chi_next);
            for a in site {
                next += a.adjoint() * &env * a;
            }
            env = next;
        }
        env[(0, 0)].re.max(0.0).sqrt()
    }

    /// Contracts the full network into a dense Fock-space state vector.
    pub fn contract_dense(&self) -> Result<FockState> {
        let d = self.local_dim;
        let m = self.num_modes();
        let len = d
            .checked_pow(m as u32)
            .filter(|&l| l <= MAX_DENSE_LEN)
            .ok_or_else(|| {
                SimError::Parameter(format!("dense contraction too large: {d}^{m} amplitudes"))
            })?;
        let mut acc = DMatrix::<C64>::from_element(1, 1, C64::new(1.0, 0.0));
        for site in &self.site_tensors {
            let rows = acc.nrows();
            let chi_next = site[0].ncols();
            let mut next = DMatrix::<C64>::zeros(rows * d, chi_next);
            for (n, tensor) in site.iter().enumerate() {
                // index convention: mode k contributes n * d^k, so level n
                // lands at row offset n * rows with rows = d^k
                next.view_mut((n * rows, 0), (rows, chi_next))
                    .copy_from(&(&acc * tensor));
            }
            acc = next;
        }
        debug_assert_eq!(acc.nrows(), len);
        debug_assert_eq!(acc.ncols(), 1);
        let amps: Vec<C64> = acc.column(0).iter().copied().collect();
        Ok(FockState::from_raw(m, d, amps))
    }

    /// Draws one occupation pattern from |<m|psi>|^2 by sampling modes left
    /// to right from exact conditional marginals.
    pub fn mps_sample(&self, rng: &mut impl Rng) -> Result<Vec<usize>> {
        let m = self.num_modes();
        let d = self.local_dim;
        // right environments: envs[k] contracts sites k..M
        let mut envs: Vec<DMatrix<C64>> = Vec::with_capacity(m + 1);
        envs.push(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
        for site in self.site_tensors.iter().rev() {
            let prev = envs.last().unwrap();
            let chi = site[0].nrows();
            let mut env = DMatrix::<C64>::zeros(chi, chi);
            for a in site {
                env += a * prev * a.adjoint();
            }
            envs.push(env);
        }
        envs.reverse();
        let mut left = DMatrix::<C64>::from_element(1, 1, C64::new(1.0, 0.0));
        let mut outcome = Vec::with_capacity(m);
        for k in 0..m {
            let mut weights = Vec::with_capacity(d);
            let mut total = 0.0;
            for n in 0..d {
                let v = &left * &self.site_tensors[k][n];
                let w = (&v * &envs[k + 1] * v.adjoint())[(0, 0)].re.max(0.0);
                weights.push(w);
                total += w;
            }
            if total <= 0.0 {
                return Err(SimError::Parameter(
                    "sampling from a zero-norm state".into(),
                ));
            }
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = d - 1;
            for (n, &w) in weights.iter().enumerate() {
                if u < w {
                    chosen = n;
                    break;
                }
                u -= w;
            }
            outcome.push(chosen);
            left = (&left * &self.site_tensors[k][chosen]).unscale(weights[chosen].sqrt());
        }
        Ok(outcome)
    }
}

fn frob_sqr(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum()
}

/// Two-site gate in the occupation basis (n_first * d + n_second), block
/// diagonal in total photon number. Totals >= d are outside the cutoff and
/// are rejected at application time.
fn two_site_op(gate: &Matrix2<C64>, d: usize) -> DMatrix<C64> {
    let mut op = DMatrix::<C64>::zeros(d * d, d * d);
    for t in 0..d {
        let tr = two_mode_transfer(gate, t);
        for r in 0..=t {
            for k in 0..=t {
                op[(r * d + (t - r), k * d + (t - k))] = tr[(r, k)];
            }
        }
    }
    op
}

/// Number of singular values > 1e-10 across the bipartition
/// [0..cut) | [cut..M) of a dense state.
pub fn schmidt_rank(state: &FockState, cut: usize) -> Result<usize> {
    let m = state.num_modes();
    let d = state.local_dim();
    if cut == 0 || cut >= m {
        return Err(SimError::Parameter(format!(
            "cut {cut} does not bipartition {m} modes"
        )));
    }
    let rows = d.pow(cut as u32);
    let cols = d.pow((m - cut) as u32);
    let amps = state.amps();
    let mat = DMatrix::from_fn(rows, cols, |r, c| amps[r + c * rows]);
    let sv = jacobi_svd(&mat).s;
    Ok(sv.iter().filter(|&&s| s > 1e-10).count())
}

/// Checks the single-photon lightcone bound: rank across the cut <= 2^y for
/// y input photons.
pub fn schmidt_rank_check(state: &FockState, cut: usize, n_photons: usize) -> Result<usize> {
    let rank = schmidt_rank(state, cut)?;
    let bound = 1usize << n_photons;
    if rank > bound {
        return Err(SimError::RankBound { rank, bound });
    }
    Ok(rank)
}

/// Checks the general-input bound: rank <= [(n_max+1)(n_max+2)/2]^N for N
/// occupied input modes with at most n_max photons each.
pub fn schmidt_rank_check_general(
    state: &FockState,
    cut: usize,
    n_max: usize,
    num_sources: usize,
) -> Result<usize> {
    let rank = schmidt_rank(state, cut)?;
    let base = (n_max + 1) * (n_max + 2) / 2;
    let bound = base.saturating_pow(num_sources as u32);
    if rank > bound {
        return Err(SimError::RankBound { rank, bound });
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::BeamSplitter;
    use crate::sampler::{empirical_distribution, tvd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn hom_gate() -> Matrix2<C64> {
        bs_unitary(FRAC_PI_4, 0.0)
    }

    #[test]
    fn product_state_contracts_exactly() {
        let mps = MPSState::from_occupations(&[1, 0, 1], 2, 0.0).unwrap();
        let dense = mps.contract_dense().unwrap();
        assert!((dense.amplitude(&[1, 0, 1]).re - 1.0).abs() < 1e-15);
        assert!((mps.norm() - 1.0).abs() < 1e-12);
        assert_eq!(mps.bond_dims(), vec![1, 1, 1]);
    }

    #[test]
    fn superposition_input_normalized() {
        let c = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = GeneralInputState::new(vec![c, c]).unwrap();
        let mps = MPSState::from_inputs(&[s.clone(), s], 2, 0.0).unwrap();
        assert!((mps.norm() - 1.0).abs() < 1e-12);
        let dense = mps.contract_dense().unwrap();
        for occ in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert!((dense.amplitude(&occ).re - 0.5).abs() < 1e-12);
        }
        assert!(GeneralInputState::new(vec![c]).is_err());
    }

    #[test]
    fn hom_amplitudes_exact() {
        let mut mps = MPSState::from_occupations(&[1, 1], 3, 0.0).unwrap();
        mps.apply_beamsplitter(&hom_gate(), 0, 1).unwrap();
        let dense = mps.contract_dense().unwrap();
        let a20 = dense.amplitude(&[2, 0]);
        let a02 = dense.amplitude(&[0, 2]);
        let a11 = dense.amplitude(&[1, 1]);
        assert!(a11.norm() < 1e-12);
        assert!((a20.norm_sqr() - 0.5).abs() < 1e-12);
        assert!((a02.norm_sqr() - 0.5).abs() < 1e-12);
        // opposite signs: (|20> - |02>)/sqrt(2) up to global phase
        assert!((a20 + a02).norm() < 1e-12);
        assert_eq!(mps.max_bond_seen, 2);
    }

    #[test]
    fn identity_gate_is_a_no_op() {
        let mut mps = MPSState::from_occupations(&[1, 1, 0], 3, 0.0).unwrap();
        let before = mps.contract_dense().unwrap();
        mps.apply_beamsplitter(&bs_unitary(0.0, 0.0), 0, 1).unwrap();
        let after = mps.contract_dense().unwrap();
        assert!(before.fidelity(&after).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn non_adjacent_gate_matches_dense_evolution() {
        let gate = bs_unitary(0.7, 1.3);
        let mut mps = MPSState::from_occupations(&[1, 0, 1, 0], 3, 0.0).unwrap();
        mps.apply_beamsplitter(&gate, 0, 2).unwrap();
        let mut dense = FockState::from_occupations(&[1, 0, 1, 0], 3).unwrap();
        dense.apply_bs(&gate, 0, 2).unwrap();
        let contracted = mps.contract_dense().unwrap();
        assert!(contracted.fidelity(&dense).unwrap() > 1.0 - 1e-10);
        assert!((mps.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_mode_order_matches_dense_evolution() {
        let gate = bs_unitary(0.4, -0.9);
        let mut mps = MPSState::from_occupations(&[1, 1, 0], 3, 0.0).unwrap();
        mps.apply_beamsplitter(&gate, 2, 0).unwrap();
        let mut dense = FockState::from_occupations(&[1, 1, 0], 3).unwrap();
        dense.apply_bs(&gate, 2, 0).unwrap();
        assert!(mps.contract_dense().unwrap().fidelity(&dense).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn random_circuit_matches_dense_and_respects_rank_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let circuit = Circuit::random(6, 3, &mut rng);
            let occ = [1, 0, 1, 0, 1, 0];
            let mut mps = MPSState::from_occupations(&occ, 4, 0.0).unwrap();
            mps.apply_circuit(&circuit).unwrap();
            let mut dense = FockState::from_occupations(&occ, 4).unwrap();
            dense.apply_circuit(&circuit).unwrap();
            let contracted = mps.contract_dense().unwrap();
            assert!(contracted.fidelity(&dense).unwrap() > 1.0 - 1e-8);
            assert!((mps.norm() - 1.0).abs() < 1e-8);
            // 3 single photons: every bond and every cut rank stays <= 2^3
            assert!(mps.max_bond_seen <= 8, "bond {}", mps.max_bond_seen);
            for cut in 1..6 {
                schmidt_rank_check(&dense, cut, 3).unwrap();
            }
        }
    }

    #[test]
    fn truncation_weight_covers_infidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let circuit = Circuit::random(4, 3, &mut rng);
        let occ = [1, 1, 0, 0];
        let mut exact = MPSState::from_occupations(&occ, 3, 0.0).unwrap();
        exact.apply_circuit(&circuit).unwrap();
        let mut lossy = MPSState::from_occupations(&occ, 3, 0.25).unwrap();
        lossy.apply_circuit(&circuit).unwrap();
        assert!(lossy.discarded_weight > 0.0, "threshold should truncate");
        let f = lossy
            .contract_dense()
            .unwrap()
            .fidelity(&exact.contract_dense().unwrap())
            .unwrap();
        assert!(
            lossy.discarded_weight >= 1.0 - f - 1e-12,
            "discarded {} < 1 - fidelity {}",
            lossy.discarded_weight,
            1.0 - f
        );
    }

    #[test]
    fn bond_cap_violation_reports_profile() {
        let mut mps = MPSState::from_occupations(&[1, 1], 3, 0.0).unwrap();
        mps.bond_cap = Some(1);
        let err = mps.apply_beamsplitter(&hom_gate(), 0, 1).unwrap_err();
        assert!(matches!(err, SimError::RankBound { rank: 2, bound: 1 }));
    }

    #[test]
    fn cutoff_overflow_detected() {
        let mut mps = MPSState::from_occupations(&[1, 1], 2, 0.0).unwrap();
        let err = mps.apply_beamsplitter(&hom_gate(), 0, 1).unwrap_err();
        assert!(matches!(err, SimError::CutoffTooSmall { .. }));
    }

    #[test]
    fn sampling_product_state_is_deterministic() {
        let mps = MPSState::from_occupations(&[2, 0, 1], 3, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            assert_eq!(mps.mps_sample(&mut rng).unwrap(), vec![2, 0, 1]);
        }
    }

    #[test]
    fn sampling_reproduces_hom_statistics() {
        let mut mps = MPSState::from_occupations(&[1, 1], 3, 0.0).unwrap();
        mps.apply_beamsplitter(&hom_gate(), 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let mut n20 = 0usize;
        for _ in 0..4000 {
            let s = mps.mps_sample(&mut rng).unwrap();
            assert_ne!(s, vec![1, 1]);
            if s == vec![2, 0] {
                n20 += 1;
            }
        }
        let frac = n20 as f64 / 4000.0;
        assert!((frac - 0.5).abs() < 0.05, "frac {frac}");
    }

    #[test]
    fn sampling_matches_dense_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let circuit = Circuit::random(4, 2, &mut rng);
        let occ = [1, 0, 1, 0];
        let mut mps = MPSState::from_occupations(&occ, 3, 0.0).unwrap();
        mps.apply_circuit(&circuit).unwrap();
        let mut dense = FockState::from_occupations(&occ, 3).unwrap();
        dense.apply_circuit(&circuit).unwrap();
        let target = dense.distribution();
        let draws: Vec<Vec<usize>> = (0..20000)
            .map(|_| mps.mps_sample(&mut rng).unwrap())
            .collect();
        let empirical = empirical_distribution(draws);
        assert!(tvd(&empirical, &target) < 0.02);
    }

    #[test]
    fn schmidt_rank_values() {
        let product = FockState::from_occupations(&[1, 0, 1], 2).unwrap();
        assert_eq!(schmidt_rank(&product, 1).unwrap(), 1);
        assert_eq!(schmidt_rank(&product, 2).unwrap(), 1);
        let mut hom = FockState::from_occupations(&[1, 1], 3).unwrap();
        hom.apply_bs(&hom_gate(), 0, 1).unwrap();
        assert_eq!(schmidt_rank(&hom, 1).unwrap(), 2);
        // rank 2 violates the vacuum bound 2^0 = 1
        assert!(matches!(
            schmidt_rank_check(&hom, 1, 0),
            Err(SimError::RankBound { rank: 2, bound: 1 })
        ));
        assert_eq!(schmidt_rank_check(&hom, 1, 2).unwrap(), 2);
        assert!(schmidt_rank(&product, 0).is_err());
        assert!(schmidt_rank(&product, 3).is_err());
    }

    #[test]
    fn general_rank_bound_on_superposition_inputs() {
        // two modes with n_max = 1 superpositions: bound (2*3/2)^2 = 9
        let c = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = GeneralInputState::new(vec![c, c]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..5 {
            let circuit = Circuit::random(4, 2, &mut rng);
            let mut mps =
                MPSState::from_inputs(&[s.clone(), s.clone(), GeneralInputState::fock(0), GeneralInputState::fock(0)], 3, 0.0)
                    .unwrap();
            mps.apply_circuit(&circuit).unwrap();
            let dense = mps.contract_dense().unwrap();
            for cut in 1..4 {
                let rank = schmidt_rank_check_general(&dense, cut, 1, 2).unwrap();
                assert!(rank <= 9);
            }
        }
    }

    #[test]
    fn swap_network_layers_compose() {
        // two gates on crossing non-adjacent pairs, then inverses: identity
        let g1 = bs_unitary(0.9, 0.2);
        let g1_inv = bs_unitary(-0.9, 0.2);
        let mut mps = MPSState::from_occupations(&[1, 0, 0, 1], 3, 0.0).unwrap();
        let before = mps.contract_dense().unwrap();
        mps.apply_beamsplitter(&g1, 0, 3).unwrap();
        mps.apply_beamsplitter(&g1_inv, 0, 3).unwrap();
        let after = mps.contract_dense().unwrap();
        assert!(after.fidelity(&before).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn gate_struct_roundtrip_through_circuit() {
        let circuit = Circuit::new(
            3,
            vec![vec![BeamSplitter {
                i: 0,
                j: 2,
                theta: 0.3,
                phi: 0.1,
            }]],
        )
        .unwrap();
        let mut mps = MPSState::from_occupations(&[1, 0, 0], 2, 0.0).unwrap();
        mps.apply_circuit(&circuit).unwrap();
        let mut dense = FockState::from_occupations(&[1, 0, 0], 2).unwrap();
        dense.apply_circuit(&circuit).unwrap();
        assert!(mps.contract_dense().unwrap().fidelity(&dense).unwrap() > 1.0 - 1e-10);
    }
}
