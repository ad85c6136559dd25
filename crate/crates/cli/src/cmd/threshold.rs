//! `percolo threshold` — simulability verdict plus the derived quantities:
//! margin, component-size cap y*, tail bound at y*, and the Hilbert-space
//! dimension bound for components at the cap.

use clap::Args as ClapArgs;
use percolo::noise::{classical_threshold, NoiseSpec};
use percolo::percolation::{tail_bound, y_star};
use percolo::sampler::hilbert_dim_bound;
use percolo::SimError;
use serde_json::{json, Value};

use crate::config::{Common, FileConfig};
use crate::out::{meta_value, write_body};
use crate::CliError;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Max lightcone degree.
    #[arg(long)]
    delta: Option<usize>,
    /// Total transmission eta (loss noise).
    #[arg(long)]
    eta: Option<f64>,
    /// Indistinguishability overlap x.
    #[arg(long, conflicts_with = "eta")]
    x: Option<f64>,
    /// Photons per occupied input (Fock-state loss threshold).
    #[arg(long)]
    fock_n: Option<usize>,
    /// Number of sources N entering y* and the tail bound.
    #[arg(long)]
    n: Option<usize>,
    /// Failure budget entering y*.
    #[arg(long)]
    epsilon: Option<f64>,
}

pub fn run(args: Args, common: &Common, file: &FileConfig) -> Result<(), CliError> {
    let delta = args.delta.or(file.delta).unwrap_or(9);
    let eta = args.eta.or(file.threshold_eta);
    let x = args.x.or(file.threshold_x);
    let fock_n = args.fock_n.or(file.fock_n);
    let n = args.n.or(file.threshold_n).unwrap_or(1000);
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(0.01);

    let noise = match (eta, x) {
        (Some(eta), None) => NoiseSpec::loss(eta),
        (None, Some(x)) => NoiseSpec::distinguishability(x),
        (None, None) => {
            return Err(CliError::Sim(SimError::Parameter(
                "give one of --eta or --x".into(),
            )))
        }
        (Some(_), Some(_)) => return Err(CliError::Sim(SimError::UnsupportedCombination)),
    };
    let (simulable, margin) = classical_threshold(delta, &noise, fock_n)?;
    // effective per-vertex survival probability entering the Delta^2 product
    let survival = (1.0 - margin) / (delta * delta) as f64;

    let (y_value, y_error): (Option<f64>, Option<String>) =
        match y_star(n, epsilon, survival, delta) {
            Ok(y) => (Some(y), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let tail: Option<f64> = y_value.map(|y| {
        tail_bound(n, y, survival, delta).expect("subcritical whenever y* exists")
    });
    let dim: Option<Value> = y_value.and_then(|y| {
        hilbert_dim_bound(y, delta, fock_n.unwrap_or(1)).ok().map(|b| {
            json!({
                "exact": b.exact.to_string(),
                "relaxation": b.relaxation,
            })
        })
    });

    let meta = meta_value(
        "threshold",
        common.seed,
        json!({
            "delta": delta, "noise": noise, "fock_n": fock_n,
            "n": n, "epsilon": epsilon,
        }),
        json!("none"),
    );
    let report = json!({
        "meta": meta,
        "simulable": simulable,
        "margin": margin,
        "survival": survival,
        "y_star": y_value,
        "y_star_error": y_error,
        "tail_bound_at_y_star": tail,
        "hilbert_dim_bound": dim,
    });
    write_body(common.out.as_deref(), &format!("{report:#}\n"))
}
