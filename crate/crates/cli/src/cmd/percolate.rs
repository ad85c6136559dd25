//! `percolo percolate` — max-component statistics of percolated lightcone
//! graphs over an (eta, N) grid.

use clap::Args as ClapArgs;
use percolo::graph::Arch;
use percolo::percolation::{percolation_experiment, summarize, PercRecord};
use serde::Serialize;
use serde_json::json;

use crate::config::{Common, FileConfig};
use crate::out::{csv_meta_header, meta_value, write_body, write_sidecar};
use crate::{CliError, Format};

/// Component size beyond which exact simulation is out of reach even for
/// supercomputer-scale permanents; flagged per row.
pub const MARKER: usize = 56;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Graph family: "nonlocal" or "1d".
    #[arg(long)]
    arch: Option<String>,
    /// Out-degree of every input vertex.
    #[arg(long)]
    delta: Option<usize>,
    /// Transmission values to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Input counts N to sweep, comma separated (each graph has M = 8N outputs).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Trials per (eta, N) cell.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Serialize)]
struct Row<'a> {
    #[serde(flatten)]
    rec: &'a PercRecord,
    exceeds_56: bool,
}

pub fn run(args: Args, common: &Common, file: &FileConfig) -> Result<(), CliError> {
    let arch_name = args
        .arch
        .or_else(|| file.arch.clone())
        .unwrap_or_else(|| "nonlocal".into());
    let arch = Arch::parse(&arch_name)?;
    let delta = args.delta.or(file.delta).unwrap_or(9);
    let etas = args
        .eta
        .or_else(|| file.eta.clone())
        .unwrap_or_else(|| vec![0.02, 0.14]);
    let ns = args
        .n
        .or_else(|| file.n.clone())
        .unwrap_or_else(|| vec![100, 1000]);
    let trials = args.trials.or(file.trials).unwrap_or(20);
    let format = common.format.unwrap_or(Format::Csv);

    let records = percolation_experiment(arch, delta, &etas, &ns, trials, common.seed)?;
    let summaries = summarize(&records);

    let meta = meta_value(
        "percolate",
        common.seed,
        json!({"arch": arch.name(), "delta": delta, "eta": etas, "n": ns, "trials": trials}),
        json!({
            "grouping": "per (eta, n) over trials",
            "stats": ["mean", "median", "max"],
            "marker": MARKER,
            "summaries": summaries,
        }),
    );

    let body = match format {
        Format::Csv => {
            let mut s = csv_meta_header(&meta);
            s.push_str("arch,n,m,delta,eta,trial,seed,max_component,num_components,exceeds_56\n");
            for r in &records {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.arch,
                    r.n,
                    r.m,
                    r.delta,
                    r.eta,
                    r.trial,
                    r.seed,
                    r.max_component,
                    r.num_components,
                    u8::from(r.max_component > MARKER),
                ));
            }
            s
        }
        Format::Jsonl => {
            let mut s = format!("{meta}\n");
            for r in &records {
                let row = Row {
                    rec: r,
                    exceeds_56: r.max_component > MARKER,
                };
                s.push_str(&serde_json::to_string(&row).expect("serializable row"));
                s.push('\n');
            }
            s.push_str(&format!("{}\n", json!({ "summaries": summaries })));
            s
        }
    };
    write_body(common.out.as_deref(), &body)?;
    if format == Format::Csv {
        write_sidecar(common.out.as_deref(), &meta)?;
    }
    Ok(())
}
