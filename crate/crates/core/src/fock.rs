//! Dense Fock-space evolution over the product basis, used as an exact
//! oracle for the MPS engine and as a second route to output distributions.

use nalgebra::{DMatrix, Matrix2};
use std::collections::BTreeMap;

use crate::circuit::{bs_unitary, Circuit};
use crate::util::factorial;
use crate::{Result, SimError, C64};

/// Largest dense state vector we are willing to allocate.
pub(crate) const MAX_DENSE_LEN: usize = 100_000_000;

/// State vector over the product Fock basis; index = sum_k n_k * d^k
/// (mode 0 is the least-significant digit), d = local_dim.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    local_dim: usize,
    num_modes: usize,
    amps: Vec<C64>,
}

impl FockState {
    pub fn vacuum(num_modes: usize, local_dim: usize) -> Result<Self> {
        if local_dim < 1 {
            return Err(SimError::Parameter("local_dim must be >= 1".into()));
        }
        let len = local_dim
            .checked_pow(num_modes as u32)
            .filter(|&l| l <= MAX_DENSE_LEN)
            .ok_or_else(|| {
                SimError::Parameter(format!(
                    "dense state {local_dim}^{num_modes} exceeds the allocation cap"
                ))
            })?;
        let mut amps = vec![C64::new(0.0, 0.0); len];
        amps[0] = C64::new(1.0, 0.0);
        Ok(FockState {
            local_dim,
            num_modes,
            amps,
        })
    }

    pub fn from_occupations(occ: &[usize], local_dim: usize) -> Result<Self> {
        if let Some(&n) = occ.iter().find(|&&n| n >= local_dim) {
            return Err(SimError::CutoffTooSmall {
                local_dim,
                photons: n,
            });
        }
        let mut state = FockState::vacuum(occ.len(), local_dim)?;
        state.amps[0] = C64::new(0.0, 0.0);
        state.amps[Self::index_for(occ, local_dim)] = C64::new(1.0, 0.0);
        Ok(state)
    }

    /// Product state with per-mode amplitude lists c_0..c_{n_max}.
    pub fn from_amplitude_lists(lists: &[Vec<C64>], local_dim: usize) -> Result<Self> {
        if let Some(l) = lists.iter().find(|l| l.len() > local_dim) {
            return Err(SimError::CutoffTooSmall {
                local_dim,
                photons: l.len() - 1,
            });
        }
        let mut state = FockState::vacuum(lists.len(), local_dim)?;
        for idx in 0..state.amps.len() {
            let mut amp = C64::new(1.0, 0.0);
            let mut rest = idx;
            for list in lists {
                let n = rest % local_dim;
                rest /= local_dim;
                amp *= list.get(n).copied().unwrap_or(C64::new(0.0, 0.0));
            }
            state.amps[idx] = amp;
        }
        Ok(state)
    }

    /// Wraps a precomputed amplitude vector (length local_dim^num_modes).
    pub(crate) fn from_raw(num_modes: usize, local_dim: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), local_dim.pow(num_modes as u32));
        FockState {
            local_dim,
            num_modes,
            amps,
        }
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn index_for(occ: &[usize], local_dim: usize) -> usize {
        occ.iter()
            .rev()
            .fold(0, |acc, &n| acc * local_dim + n)
    }

    pub fn occupations_of(&self, mut idx: usize) -> Vec<usize> {
        let mut occ = Vec::with_capacity(self.num_modes);
        for _ in 0..self.num_modes {
            occ.push(idx % self.local_dim);
            idx /= self.local_dim;
        }
        occ
    }

    pub fn amplitude(&self, occ: &[usize]) -> C64 {
        self.amps[Self::index_for(occ, self.local_dim)]
    }

    /// Applies a two-mode gate to modes (i, j).
    ///
    /// Errors if an occupied pair holds more photons than the cutoff can
    /// represent after mixing.
    pub fn apply_bs(&mut self, gate: &Matrix2<C64>, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.num_modes || j >= self.num_modes {
            return Err(SimError::Parameter(format!(
                "invalid mode pair ({i}, {j}) for {} modes",
                self.num_modes
            )));
        }
        let d = self.local_dim;
        let stride_i = d.pow(i as u32);
        let stride_j = d.pow(j as u32);
        let transfers: Vec<DMatrix<C64>> =
            (0..d).map(|t| two_mode_transfer(gate, t)).collect();
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (idx, &amp) in self.amps.iter().enumerate() {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            let ni = (idx / stride_i) % d;
            let nj = (idx / stride_j) % d;
            let t = ni + nj;
            if t >= d {
                return Err(SimError::CutoffTooSmall {
                    local_dim: d,
                    photons: t,
                });
            }
            let base = idx - ni * stride_i - nj * stride_j;
            let tr = &transfers[t];
            for r in 0..=t {
                out[base + r * stride_i + (t - r) * stride_j] += tr[(r, ni)] * amp;
            }
        }
        self.amps = out;
        Ok(())
    }

    /// Applies all layers in order.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_modes != self.num_modes {
            return Err(SimError::Parameter(format!(
                "circuit has {} modes, state has {}",
                circuit.num_modes, self.num_modes
            )));
        }
        circuit.validate()?;
        for layer in &circuit.layers {
            for g in layer {
                self.apply_bs(&bs_unitary(g.theta, g.phi), g.i, g.j)?;
            }
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &FockState) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(SimError::Parameter(
                "states live in different spaces".into(),
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |<a|b>|^2 / (|a|^2 |b|^2); phase-blind.
    pub fn fidelity(&self, other: &FockState) -> Result<f64> {
        let ip = self.inner(other)?.norm_sqr();
        Ok(ip / (self.norm().powi(2) * other.norm().powi(2)))
    }

    /// Occupation pattern -> |amplitude|^2, nonzero entries only.
    pub fn distribution(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut out = BTreeMap::new();
        for (idx, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 0.0 {
                out.insert(self.occupations_of(idx), p);
            }
        }
        out
    }
}

/// Two-mode Fock-space transfer matrix at fixed total photon number `t` for
/// a gate [[a, b], [c, d]] acting as a_i^dag -> a*a_i^dag + b*a_j^dag.
///
/// Entry (r, k) maps input |k, t-k> to output |r, t-r>:
/// sum_{p+q=r} C(k,p) C(t-k,q) a^p b^{k-p} c^q d^{t-k-q}
/// * sqrt(r! (t-r)!) / sqrt(k! (t-k)!).
pub(crate) fn two_mode_transfer(gate: &Matrix2<C64>, t: usize) -> DMatrix<C64> {
    let (a, b) = (gate[(0, 0)], gate[(0, 1)]);
    let (c, d) = (gate[(1, 0)], gate[(1, 1)]);
    DMatrix::from_fn(t + 1, t + 1, |r, k| {
        let mut sum = C64::new(0.0, 0.0);
        for p in 0..=k.min(r) {
            let q = r - p;
            if q > t - k {
                continue;
            }
            let coeff = crate::util::binomial_f64(k, p) * crate::util::binomial_f64(t - k, q);
            sum += a.powu(p as u32)
                * b.powu((k - p) as u32)
                * c.powu(q as u32)
                * d.powu((t - k - q) as u32)
                * coeff;
        }
        sum * (factorial(r) * factorial(t - r)).sqrt() / (factorial(k) * factorial(t - k)).sqrt()
    })
}
