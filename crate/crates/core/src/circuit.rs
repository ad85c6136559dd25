//! Layered beam-splitter circuits, their mode unitaries, and input states.

use nalgebra::{DMatrix, Matrix2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::{Result, SimError, C64};

/// One two-mode gate inside a layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitter {
    pub i: usize,
    pub j: usize,
    pub theta: f64,
    pub phi: f64,
}

/// Layered circuit on `num_modes` modes; depth = number of layers, every
/// layer parallel-implementable (no mode appears in two gates of one layer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    #[serde(rename = "modes")]
    pub num_modes: usize,
    pub layers: Vec<Vec<BeamSplitter>>,
}

impl Circuit {
    pub fn new(num_modes: usize, layers: Vec<Vec<BeamSplitter>>) -> Result<Self> {
        let c = Circuit { num_modes, layers };
        c.validate()?;
        Ok(c)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Checks mode ranges, i != j, and per-layer mode disjointness.
    pub fn validate(&self) -> Result<()> {
        for (l, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.num_modes];
            for g in layer {
                for mode in [g.i, g.j] {
                    if mode >= self.num_modes {
                        return Err(SimError::ModeOutOfRange {
                            mode,
                            modes: self.num_modes,
                        });
                    }
                }
                if g.i == g.j {
                    return Err(SimError::Parameter(format!(
                        "gate in layer {l} has equal mode indices ({})",
                        g.i
                    )));
                }
                for mode in [g.i, g.j] {
                    if used[mode] {
                        return Err(SimError::ModeReuse { mode, layer: l });
                    }
                    used[mode] = true;
                }
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }

    /// Random circuit: each layer pairs up a shuffled subset of the modes
    /// (floor(M/2) gates) with uniform angles.
    pub fn random(num_modes: usize, depth: usize, rng: &mut impl Rng) -> Self {
        let mut layers = Vec::with_capacity(depth);
        for _ in 0..depth {
            let mut modes: Vec<usize> = (0..num_modes).collect();
            modes.shuffle(rng);
            let layer = modes
                .chunks_exact(2)
                .map(|pair| BeamSplitter {
                    i: pair[0],
                    j: pair[1],
                    theta: rng.gen::<f64>() * std::f64::consts::TAU,
                    phi: rng.gen::<f64>() * std::f64::consts::TAU,
                })
                .collect();
            layers.push(layer);
        }
        Circuit { num_modes, layers }
    }
}

/// Input occupations: mode -> photon count (absent modes are vacuum).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputSpec {
    occupations: BTreeMap<usize, usize>,
}

impl InputSpec {
    /// Occupations must all be >= 1.
    pub fn new(occupations: BTreeMap<usize, usize>) -> Result<Self> {
        if occupations.values().any(|&n| n == 0) {
            return Err(SimError::Parameter(
                "input occupations must be >= 1 (omit vacuum modes)".into(),
            ));
        }
        Ok(InputSpec { occupations })
    }

    pub fn single_photons(modes: &[usize]) -> Self {
        InputSpec {
            occupations: modes.iter().map(|&m| (m, 1)).collect(),
        }
    }

    pub fn occupations(&self) -> &BTreeMap<usize, usize> {
        &self.occupations
    }

    /// Occupied modes in increasing order.
    pub fn modes(&self) -> Vec<usize> {
        self.occupations.keys().copied().collect()
    }

    /// Counts aligned with `modes()`.
    pub fn counts(&self) -> Vec<usize> {
        self.occupations.values().copied().collect()
    }

    pub fn num_sources(&self) -> usize {
        self.occupations.len()
    }

    pub fn total_photons(&self) -> usize {
        self.occupations.values().sum()
    }

    pub fn max_photon(&self) -> usize {
        self.occupations.values().copied().max().unwrap_or(0)
    }

    pub fn all_single(&self) -> bool {
        self.occupations.values().all(|&n| n == 1)
    }

    pub fn validate_for(&self, num_modes: usize) -> Result<()> {
        match self.occupations.keys().find(|&&m| m >= num_modes) {
            Some(&mode) => Err(SimError::ModeOutOfRange {
                mode,
                modes: num_modes,
            }),
            None => Ok(()),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: InputSpec = serde_json::from_str(s)?;
        InputSpec::new(spec.occupations)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("input serialization cannot fail")
    }
}

/// Two-mode unitary [[cos t, -e^{i p} sin t], [e^{-i p} sin t, cos t]].
pub fn bs_unitary(theta: f64, phi: f64) -> Matrix2<C64> {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, phi);
    Matrix2::new(
        C64::new(c, 0.0),
        -e * s,
        e.conj() * s,
        C64::new(c, 0.0),
    )
}

/// M x M circuit unitary: product of layer unitaries in layer order, acting
/// on creation operators as a_v^dag -> sum_w U_{vw} a_w^dag (rows = inputs,
/// columns = outputs).
///
/// Matrix elements with no gate path between input and output are exact
/// floating-point zeros.
pub fn build_unitary(circuit: &Circuit) -> Result<DMatrix<C64>> {
    circuit.validate()?;
    let m = circuit.num_modes;
    let mut u = DMatrix::<C64>::identity(m, m);
    for layer in &circuit.layers {
        let mut l = DMatrix::<C64>::identity(m, m);
        for g in layer {
            let b = bs_unitary(g.theta, g.phi);
            l[(g.i, g.i)] = b[(0, 0)];
            l[(g.i, g.j)] = b[(0, 1)];
            l[(g.j, g.i)] = b[(1, 0)];
            l[(g.j, g.j)] = b[(1, 1)];
        }
        u *= l;
    }
    Ok(u)
}

/// Max-norm of U^dag U - I.
pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    let m = u.ncols();
    let g = u.adjoint() * u - DMatrix::<C64>::identity(m, m);
    g.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
