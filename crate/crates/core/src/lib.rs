//! Classical simulation of constant-depth linear-optical circuits under
//! photon loss and partial distinguishability.
//!
//! Circuits are mapped to bipartite lightcone graphs (inputs on the left,
//! reachable output modes on the right). Noise removes or decouples input
//! vertices; in the subcritical regime the surviving graph shatters into
//! small components that are simulated exactly with permanents. The crate
//! also provides the tail-bound calculators, the percolation experiment
//! harness, a brute-force oracle, and a small MPS evolution engine used to
//! verify Schmidt-rank bounds.

pub mod circuit;
pub mod fock;
pub mod graph;
pub mod mps;
pub mod noise;
pub mod oracle;
pub mod percolation;
pub mod permanent;
pub mod rng;
pub mod sampler;
pub(crate) mod svd;

pub(crate) mod util;

use thiserror::Error;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Errors shared by the simulation modules.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("mode {mode} appears in more than one gate of layer {layer}")]
    ModeReuse { mode: usize, layer: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("photon number mismatch: inputs carry {inputs}, outcome carries {outcome}")]
    PhotonMismatch { inputs: usize, outcome: usize },
    #[error("supercritical parameters: survival*delta^2 = {value} >= 1")]
    Supercritical { value: f64 },
    #[error("configuration refused: simulability margin {margin} <= 0 (pass force to override)")]
    NotSimulable { margin: f64 },
    #[error("outcome enumeration would exceed {cap} patterns; use chain-rule sampling")]
    DimensionCap { cap: usize },
    #[error("restart limit {limit} exceeded; component-size cap is likely mis-set")]
    RestartLimit { limit: u64 },
    #[error("oracle size cap exceeded (N={n}, M={m})")]
    OracleCap { n: usize, m: usize },
    #[error("loss and distinguishability noise cannot be combined")]
    UnsupportedCombination,
    #[error("Fock cutoff {local_dim} too small for {photons} photons")]
    CutoffTooSmall { local_dim: usize, photons: usize },
    #[error("Schmidt rank {rank} exceeds bound {bound}")]
    RankBound { rank: usize, bound: usize },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Parameter(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SimError>;
