//! `percolo verify` — built-in correctness checks with a per-check JSON
//! report. All checks are seeded; verdicts do not depend on the seed.
//!
//! --inject-fault swaps a signed (determinant-style) permutation sum into
//! the HOM check, which must then fail — exercising the failure path.

use clap::Args as ClapArgs;
use nalgebra::DMatrix;
use percolo::circuit::{bs_unitary, build_unitary, Circuit, InputSpec};
use percolo::noise::NoiseSpec;
use percolo::oracle::{brute_force_oracle, naive_permanent};
use percolo::percolation::y_star;
use percolo::permanent::permanent;
use percolo::rng::stream_rng;
use percolo::sampler::{
    empirical_distribution, exact_component_distribution, outcome_probability, tvd,
    NoisySampler, SampleOptions,
};
use percolo::C64;
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::Common;
use crate::out::{meta_value, write_body};
use crate::CliError;

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Corrupt the permanent used by the HOM check; the check must fail.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

/// Signed permutation sum (a determinant) — deliberately the wrong
/// statistics for bosons; stands in for the permanent under --inject-fault.
fn faulty_amplitude_sum(m: &DMatrix<C64>) -> C64 {
    m.determinant()
}

/// P(outcome) on the 50:50 splitter with input (1,1), via the given
/// amplitude rule applied to the occupation-expanded submatrix.
fn hom_probability(outcome: [usize; 2], faulty: bool) -> f64 {
    let g = bs_unitary(std::f64::consts::FRAC_PI_4, 0.0);
    let u = DMatrix::from_fn(2, 2, |i, j| g[(i, j)]);
    if !faulty {
        return outcome_probability(&u, &[1, 1], &outcome).expect("valid two-mode outcome");
    }
    let mut cols = Vec::new();
    for (j, &m) in outcome.iter().enumerate() {
        for _ in 0..m {
            cols.push(j);
        }
    }
    let expanded = DMatrix::from_fn(2, 2, |i, k| u[(i, cols[k])]);
    let amp = faulty_amplitude_sum(&expanded);
    let norm: usize = outcome.iter().map(|&m| (1..=m).product::<usize>()).product();
    amp.norm_sqr() / norm as f64
}

fn check_hom(faulty: bool) -> Check {
    let p11 = hom_probability([1, 1], faulty);
    let p20 = hom_probability([2, 0], faulty);
    let p02 = hom_probability([0, 2], faulty);
    let pass = p11 <= 1e-12 && (p20 - 0.5).abs() <= 1e-12 && (p02 - 0.5).abs() <= 1e-12;
    check(
        "hom_dip",
        pass,
        format!("P(1,1)={p11:.3e} P(2,0)={p20} P(0,2)={p02}"),
    )
}

fn check_permanent_pair(seed: u64) -> Check {
    let mut rng = stream_rng(seed, &[1]);
    let mut worst = 0.0f64;
    for trial in 0..50u64 {
        let k = 2 + (trial as usize % 6);
        let m = DMatrix::from_fn(k, k, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let fast = permanent(&m).expect("within dimension cap");
        let slow = naive_permanent(&m).expect("within oracle cap");
        worst = worst.max((fast - slow).norm());
    }
    check(
        "permanent_ryser_vs_naive",
        worst <= 1e-9,
        format!("max |difference| over 50 matrices (sizes 2-7): {worst:.3e}"),
    )
}

fn check_ones_factorial() -> Check {
    let mut pass = true;
    let mut detail = String::new();
    let mut factorial: i64 = 1;
    for k in 1..=7usize {
        factorial *= k as i64;
        let per = permanent(&DMatrix::<i64>::from_element(k, k, 1)).expect("small matrix");
        if per != factorial {
            pass = false;
        }
        detail.push_str(&format!("Per(1^{k})={per} "));
    }
    check("permanent_ones_factorial", pass, detail.trim_end().into())
}

fn check_y_star() -> Check {
    match y_star(1000, 0.01, 0.005, 9) {
        Ok(y) => check(
            "y_star_reference_value",
            (y - 7.681).abs() <= 1e-3,
            format!("y*(1000, 0.01, 0.005, 9) = {y}"),
        ),
        Err(e) => check("y_star_reference_value", false, e.to_string()),
    }
}

fn check_normalization(seed: u64) -> Check {
    let mut rng = stream_rng(seed, &[2]);
    let circuit = Circuit::random(4, 2, &mut rng);
    let u = build_unitary(&circuit).expect("valid circuit");
    let dist = exact_component_distribution(&u, &[1, 0, 1, 0]).expect("small pattern count");
    let total: f64 = dist.values().sum();
    check(
        "distribution_normalization",
        (total - 1.0).abs() <= 1e-9,
        format!("sum of exact distribution = {total}"),
    )
}

fn check_mps_vs_dense(seed: u64) -> Check {
    let mut rng = stream_rng(seed, &[3]);
    let circuit = Circuit::random(4, 2, &mut rng);
    let occ = [1usize, 0, 1, 0];
    let mut mps = match percolo::mps::MPSState::from_occupations(&occ, 3, 0.0) {
        Ok(m) => m,
        Err(e) => return check("mps_matches_dense", false, e.to_string()),
    };
    if let Err(e) = mps.apply_circuit(&circuit) {
        return check("mps_matches_dense", false, e.to_string());
    }
    let mut dense = percolo::fock::FockState::from_occupations(&occ, 3).expect("cutoff fits");
    dense.apply_circuit(&circuit).expect("valid circuit");
    let contracted = match mps.contract_dense() {
        Ok(c) => c,
        Err(e) => return check("mps_matches_dense", false, e.to_string()),
    };
    let f = contracted.fidelity(&dense).expect("matching shapes");
    check(
        "mps_matches_dense",
        f >= 1.0 - 1e-8,
        format!("fidelity = {f}"),
    )
}

fn check_sampler_vs_oracle(seed: u64) -> Check {
    let mut rng = stream_rng(seed, &[4]);
    let circuit = Circuit::random(4, 2, &mut rng);
    let input = InputSpec::single_photons(&[0, 2]);
    let noise = NoiseSpec::loss(0.6);
    // supercritical on purpose; the cap sits above the graph size, so the
    // sampler runs every noise pattern exactly and must match the oracle
    let opts = SampleOptions {
        epsilon: 0.01,
        force: true,
        y_star_override: Some(100.0),
    };
    let sampler = match NoisySampler::new(&circuit, &input, &noise, &opts) {
        Ok(s) => s,
        Err(e) => return check("sampler_matches_oracle", false, e.to_string()),
    };
    let draws = 20_000usize;
    let mut outcomes = Vec::with_capacity(draws);
    for i in 0..draws {
        let mut srng = stream_rng(seed, &[5, i as u64]);
        match sampler.sample(&mut srng) {
            Ok(r) => outcomes.push(r.outcome),
            Err(e) => return check("sampler_matches_oracle", false, e.to_string()),
        }
    }
    let emp = empirical_distribution(outcomes);
    let oracle = match brute_force_oracle(&circuit, &input, &noise) {
        Ok(o) => o,
        Err(e) => return check("sampler_matches_oracle", false, e.to_string()),
    };
    let d = tvd(&emp, &oracle);
    check(
        "sampler_matches_oracle",
        d <= 0.05,
        format!("TVD over {draws} draws = {d:.4}"),
    )
}

pub fn run(args: Args, common: &Common) -> Result<(), CliError> {
    let checks = vec![
        check_hom(args.inject_fault),
        check_permanent_pair(common.seed),
        check_ones_factorial(),
        check_y_star(),
        check_normalization(common.seed),
        check_mps_vs_dense(common.seed),
        check_sampler_vs_oracle(common.seed),
    ];
    let passed = checks.iter().all(|c| c.pass);
    let meta = meta_value(
        "verify",
        common.seed,
        json!({"inject_fault": args.inject_fault}),
        json!("none"),
    );
    let report = json!({"meta": meta, "checks": checks, "passed": passed});
    write_body(common.out.as_deref(), &format!("{report:#}\n"))?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report["checks"]
            .as_array()
            .expect("array")
            .iter()
            .filter(|c| !c["pass"].as_bool().unwrap_or(false))
            .filter_map(|c| c["name"].as_str())
            .collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}
