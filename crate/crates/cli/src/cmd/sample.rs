//! `percolo sample` — draw noisy samples from a circuit file. Refuses
//! supercritical noise without --force; reports the restart rate and the
//! measured per-sample overhead 1/p(E).

use std::path::PathBuf;

use clap::Args as ClapArgs;
use percolo::circuit::{Circuit, InputSpec};
use percolo::noise::NoiseSpec;
use percolo::rng::stream_rng;
use percolo::sampler::{NoisySampler, SampleOptions, SampleRecord};
use percolo::SimError;
use serde_json::json;

use crate::config::{Common, FileConfig};
use crate::out::{csv_meta_header, meta_value, write_body, write_sidecar};
use crate::{CliError, Format};

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Circuit description (JSON; see README for the schema).
    #[arg(long, value_name = "PATH")]
    circuit: Option<PathBuf>,
    /// Input occupations (JSON {"occupations": {"0": 1, ...}}).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Total transmission eta (loss noise).
    #[arg(long)]
    eta: Option<f64>,
    /// Per-layer transmission; the total folds to eta_per_layer^depth.
    #[arg(long, conflicts_with = "eta")]
    eta_per_layer: Option<f64>,
    /// Indistinguishability overlap x (partial-distinguishability noise).
    #[arg(long, conflicts_with_all = ["eta", "eta_per_layer"])]
    x: Option<f64>,
    /// Failure budget; the emitted distribution is within TVD 2*epsilon of
    /// the ideal noisy one.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    num_samples: Option<usize>,
    /// Sample even when the simulability margin is <= 0 (no size cap).
    #[arg(long)]
    force: bool,
    /// Override the derived component-size cap y*.
    #[arg(long)]
    y_cap: Option<f64>,
}

fn resolve_noise(args: &Args, file: &FileConfig) -> Result<NoiseSpec, CliError> {
    let spec = match (args.eta, args.eta_per_layer, args.x) {
        (None, None, None) => file.noise.unwrap_or_else(|| NoiseSpec::loss(1.0)),
        (Some(eta), None, None) => NoiseSpec::loss(eta),
        (None, Some(e1), None) => NoiseSpec::loss_per_layer(e1),
        (None, None, Some(x)) => NoiseSpec::distinguishability(x),
        _ => return Err(CliError::Sim(SimError::UnsupportedCombination)),
    };
    spec.validate()?;
    Ok(spec)
}

fn read_json_file(path: &std::path::Path) -> Result<String, CliError> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn run(args: Args, common: &Common, file: &FileConfig) -> Result<(), CliError> {
    let circuit_path = args
        .circuit
        .clone()
        .or_else(|| file.circuit.clone().map(PathBuf::from))
        .ok_or_else(|| CliError::Sim(SimError::Parameter("missing --circuit".into())))?;
    let input_path = args
        .input
        .clone()
        .or_else(|| file.input.clone().map(PathBuf::from))
        .ok_or_else(|| CliError::Sim(SimError::Parameter("missing --input".into())))?;
    let noise = resolve_noise(&args, file)?;
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(0.01);
    let num_samples = args.num_samples.or(file.num_samples).unwrap_or(100);
    if num_samples == 0 {
        return Err(CliError::Sim(SimError::Parameter(
            "num_samples must be >= 1".into(),
        )));
    }
    let force = args.force || file.force.unwrap_or(false);
    let y_cap = args.y_cap.or(file.y_cap);

    let circuit = Circuit::from_json(&read_json_file(&circuit_path)?)?;
    let input = InputSpec::from_json(&read_json_file(&input_path)?)?;
    let opts = SampleOptions {
        epsilon,
        force,
        y_star_override: y_cap,
    };
    let sampler = NoisySampler::new(&circuit, &input, &noise, &opts)?;

    let mut records: Vec<SampleRecord> = Vec::with_capacity(num_samples);
    for i in 0..num_samples {
        let mut rng = stream_rng(common.seed, &[i as u64]);
        records.push(sampler.sample(&mut rng)?);
    }

    let total_restarts: u64 = records.iter().map(|r| r.restarts).sum();
    let attempts = total_restarts + num_samples as u64;
    let summary = json!({
        "num_samples": num_samples,
        "total_restarts": total_restarts,
        "restart_rate": total_restarts as f64 / attempts as f64,
        "p_event": num_samples as f64 / attempts as f64,
        "overhead_per_sample": attempts as f64 / num_samples as f64,
        "epsilon": epsilon,
        "tvd_guarantee": 2.0 * epsilon,
        "y_cap": sampler.y_cap(),
        "margin": sampler.margin(),
        "effective_eta": sampler.effective_eta(),
    });
    let meta = meta_value(
        "sample",
        common.seed,
        json!({
            "circuit": circuit_path.display().to_string(),
            "input": input_path.display().to_string(),
            "noise": noise,
            "epsilon": epsilon,
            "num_samples": num_samples,
            "force": force,
            "y_cap_override": y_cap,
        }),
        json!({"ordering": "by sample index", "summary_fields": "restart accounting"}),
    );

    let format = common.format.unwrap_or(Format::Jsonl);
    let body = match format {
        Format::Jsonl => {
            let mut s = format!("{meta}\n");
            for r in &records {
                s.push_str(&serde_json::to_string(r).expect("serializable record"));
                s.push('\n');
            }
            s.push_str(&format!("{}\n", json!({ "summary": summary })));
            s
        }
        Format::Csv => {
            let mut s = csv_meta_header(&meta);
            s.push_str("sample,lost,restarts,component_sizes,outcome\n");
            for (i, r) in records.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    i,
                    r.lost_photons,
                    r.restarts,
                    join(&r.component_sizes),
                    join(&r.outcome),
                ));
            }
            s.push_str(&format!("# summary: {summary}\n"));
            s
        }
    };
    write_body(common.out.as_deref(), &body)?;
    if format == Format::Csv {
        write_sidecar(common.out.as_deref(), &meta)?;
    }
    Ok(())
}

fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}
