//! `percolo mps-check` — evolve random circuits both as an MPS and as a
//! dense Fock state, and validate fidelity, bond-dimension, and
//! Schmidt-rank bounds per circuit.

use clap::Args as ClapArgs;
use percolo::circuit::Circuit;
use percolo::fock::FockState;
use percolo::mps::{schmidt_rank_check, MPSState};
use percolo::rng::stream_rng;
use percolo::SimError;
use serde_json::json;

use crate::config::{Common, FileConfig};
use crate::out::{meta_value, write_body};
use crate::CliError;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Modes per circuit.
    #[arg(long)]
    modes: Option<usize>,
    /// Beam-splitter layers per circuit.
    #[arg(long)]
    depth: Option<usize>,
    /// Single photons, placed on modes 0, 2, 4, ...
    #[arg(long)]
    photons: Option<usize>,
    /// Number of random circuits.
    #[arg(long)]
    circuits: Option<usize>,
    /// Singular values below this are discarded (0 keeps everything).
    #[arg(long)]
    trunc_threshold: Option<f64>,
}

pub fn run(args: Args, common: &Common, file: &FileConfig) -> Result<(), CliError> {
    let modes = args.modes.or(file.modes).unwrap_or(6);
    let depth = args.depth.or(file.depth).unwrap_or(3);
    let photons = args.photons.or(file.photons).unwrap_or(3);
    let circuits = args.circuits.or(file.circuits).unwrap_or(50);
    let thresh = args.trunc_threshold.or(file.trunc_threshold).unwrap_or(0.0);
    if photons == 0 || 2 * (photons - 1) >= modes {
        return Err(CliError::Sim(SimError::Parameter(format!(
            "need 1 <= photons <= ceil(modes/2) to place photons on even modes \
             (got photons={photons}, modes={modes})"
        ))));
    }
    let mut occ = vec![0usize; modes];
    for k in 0..photons {
        occ[2 * k] = 1;
    }
    let local_dim = photons + 1;
    let bond_bound = 1usize << photons;

    let meta = meta_value(
        "mps-check",
        common.seed,
        json!({
            "modes": modes, "depth": depth, "photons": photons,
            "circuits": circuits, "trunc_threshold": thresh,
            "local_dim": local_dim, "bond_bound": bond_bound,
        }),
        json!({"per_circuit": "max_bond / discarded_weight / fidelity / max_rank"}),
    );
    let mut body = format!("{meta}\n");

    let mut violations = 0usize;
    let mut worst_fidelity = 1.0f64;
    let mut global_max_bond = 0usize;
    for i in 0..circuits {
        let mut rng = stream_rng(common.seed, &[i as u64]);
        let circuit = Circuit::random(modes, depth, &mut rng);

        let mut mps = MPSState::from_occupations(&occ, local_dim, thresh)?;
        mps.apply_circuit(&circuit)?;
        let mut dense = FockState::from_occupations(&occ, local_dim)?;
        dense.apply_circuit(&circuit)?;
        let fidelity = mps.contract_dense()?.fidelity(&dense)?;

        let mut max_rank = 0usize;
        let mut rank_err: Option<String> = None;
        for cut in 1..modes {
            match schmidt_rank_check(&dense, cut, photons) {
                Ok(r) => max_rank = max_rank.max(r),
                Err(e) => {
                    rank_err = Some(e.to_string());
                    break;
                }
            }
        }

        // at threshold 0 the MPS must be numerically exact; with real
        // truncation the certified discarded weight must cover 1 - F^2
        let fidelity_ok = if thresh == 0.0 {
            fidelity >= 1.0 - 1e-8
        } else {
            mps.discarded_weight >= 1.0 - fidelity * fidelity - 1e-12
        };
        let ok = fidelity_ok && mps.max_bond_seen <= bond_bound && rank_err.is_none();
        if !ok {
            violations += 1;
        }
        worst_fidelity = worst_fidelity.min(fidelity);
        global_max_bond = global_max_bond.max(mps.max_bond_seen);

        body.push_str(&format!(
            "{}\n",
            json!({
                "circuit": i,
                "max_bond": mps.max_bond_seen,
                "discarded_weight": mps.discarded_weight,
                "fidelity": fidelity,
                "max_rank": max_rank,
                "rank_error": rank_err,
                "ok": ok,
            })
        ));
    }
    body.push_str(&format!(
        "{}\n",
        json!({"summary": {
            "circuits": circuits,
            "max_bond": global_max_bond,
            "worst_fidelity": worst_fidelity,
            "violations": violations,
        }})
    ));
    write_body(common.out.as_deref(), &body)?;
    if violations > 0 {
        return Err(CliError::Verification(format!(
            "{violations} of {circuits} circuits violated an MPS bound"
        )));
    }
    Ok(())
}
