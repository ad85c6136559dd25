//! Acceptance gate for the shipped guarantees. Each test covers one
//! criterion and prints exactly one PASS/FAIL line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use nalgebra::DMatrix;
use percolo::circuit::{bs_unitary, Circuit, InputSpec};
use percolo::graph::Arch;
use percolo::mps::{schmidt_rank_check, MPSState};
use percolo::noise::{classical_threshold, NoiseSpec};
use percolo::oracle::{brute_force_conditional, brute_force_oracle, naive_permanent};
use percolo::percolation::{
    connected_components, percolation_experiment, remove_vertices, summarize, tail_bound,
    y_star, EtaNSummary,
};
use percolo::permanent::permanent;
use percolo::rng::stream_rng;
use percolo::sampler::{
    empirical_distribution, outcome_probability, tvd, NoisySampler, SampleOptions,
};
use percolo::C64;
use rand::Rng;

const SEED: u64 = 42;

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "[{}] criterion {criterion} ({name}): {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    // Write to the process stdout fd directly so the verdict lines survive
    // the harness's per-test output capture and show up in plain `cargo test`.
    use std::io::Write;
    match std::fs::OpenOptions::new().write(true).open("/dev/stdout") {
        Ok(mut f) => {
            let _ = writeln!(f, "{line}");
        }
        Err(_) => println!("{line}"),
    }
    assert!(pass, "criterion {criterion} ({name}): {detail}");
}

/// Sum of squared residuals of an ordinary least-squares line with intercept.
fn ssr(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xb = xs.iter().sum::<f64>() / n;
    let yb = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xb) * (x - xb)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xb) * (y - yb)).sum();
    let b = sxy / sxx;
    let a = yb - b * xb;
    xs.iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (a + b * x);
            r * r
        })
        .sum()
}

/// SSR(linear in N) / SSR(linear in log N) of mean max-component.
fn fit_ratio(summaries: &[EtaNSummary], eta: f64) -> f64 {
    let pts: Vec<(f64, f64)> = summaries
        .iter()
        .filter(|s| s.eta == eta)
        .map(|s| (s.n as f64, s.mean))
        .collect();
    assert_eq!(pts.len(), 4, "expected one summary per N");
    let ys: Vec<f64> = pts.iter().map(|&(_, y)| y).collect();
    let lin: Vec<f64> = pts.iter().map(|&(x, _)| x).collect();
    let log: Vec<f64> = pts.iter().map(|&(x, _)| x.ln()).collect();
    ssr(&lin, &ys) / ssr(&log, &ys)
}

fn mean_at(summaries: &[EtaNSummary], eta: f64, n: usize) -> f64 {
    summaries
        .iter()
        .find(|s| s.eta == eta && s.n == n)
        .expect("summary present")
        .mean
}

#[test]
fn percolation_transition_matches_brackets() {
    let trials = 100;
    let ns = [100, 1_000, 10_000, 100_000];
    let start = Instant::now();
    let nonlocal = summarize(
        &percolation_experiment(Arch::Nonlocal, 9, &[0.02, 0.14], &ns, trials, SEED).unwrap(),
    );
    let oned = summarize(
        &percolation_experiment(Arch::OneD, 9, &[0.4, 0.7], &ns, trials, SEED).unwrap(),
    );
    let secs = start.elapsed().as_secs_f64();

    let r_nl = fit_ratio(&nonlocal, 0.02);
    let r_1d = fit_ratio(&oned, 0.4);
    let sub_nl = mean_at(&nonlocal, 0.02, 100_000);
    let sup_nl = mean_at(&nonlocal, 0.14, 100_000);
    let sup_1d = mean_at(&oned, 0.7, 100_000);
    let pass = r_nl >= 10.0
        && r_1d >= 10.0
        && sub_nl < 56.0
        && sup_nl > 0.01 * 100_000.0
        && sup_1d > 0.01 * 100_000.0
        && secs < 300.0;
    report(
        1,
        "percolation transition",
        pass,
        &format!(
            "nonlocal log/lin ratio {r_nl:.1} (>=10), subcritical mean {sub_nl:.1} < 56, \
             supercritical mean {sup_nl:.0} > 1000; 1d ratio {r_1d:.1} (>=10), \
             supercritical mean {sup_1d:.0} > 1000; runtime {secs:.1}s < 300s"
        ),
    );
}

#[test]
fn component_tail_bound_holds() {
    let (n, eta, delta, trials) = (1000usize, 0.005f64, 9usize, 10_000usize);
    let mut maxima = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = stream_rng(SEED, &[2, t as u64]);
        let g = Arch::Nonlocal.generate(n, delta, &mut rng).unwrap();
        let mask = remove_vertices(&g, eta, &mut rng);
        maxima.push(connected_components(&g, &mask).max_size);
    }
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_y = 0;
    for y in 1..=24usize {
        let hits = maxima.iter().filter(|&&m| m > y).count();
        let p_hat = hits as f64 / trials as f64;
        let se = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
        let bound = tail_bound(n, y as f64, eta, delta).unwrap();
        let excess = p_hat - (bound + 3.0 * se);
        if excess > worst_excess {
            worst_excess = excess;
            worst_y = y;
        }
    }
    let ys = y_star(n, 0.01, eta, delta).unwrap();
    let pass = worst_excess <= 0.0 && (ys - 7.681).abs() <= 1e-3;
    report(
        2,
        "component tail bound",
        pass,
        &format!(
            "max over y in [1,24] of empirical - (bound + 3 SE) = {worst_excess:.2e} \
             at y={worst_y} over {trials} trials; y*(1000,0.01,0.005,9) = {ys:.4}"
        ),
    );
}

#[test]
fn hom_dip_exact() {
    let g = bs_unitary(std::f64::consts::FRAC_PI_4, 0.0);
    let u = DMatrix::from_fn(2, 2, |i, j| g[(i, j)]);
    let p11 = outcome_probability(&u, &[1, 1], &[1, 1]).unwrap();
    let p20 = outcome_probability(&u, &[1, 1], &[2, 0]).unwrap();
    let p02 = outcome_probability(&u, &[1, 1], &[0, 2]).unwrap();
    let pass = p11 <= 1e-12 && (p20 - 0.5).abs() <= 1e-12 && (p02 - 0.5).abs() <= 1e-12;
    report(
        3,
        "HOM dip",
        pass,
        &format!("P(1,1)={p11:.2e}, P(2,0)={p20}, P(0,2)={p02}"),
    );
}

#[test]
fn permanent_routes_agree() {
    let mut rng = stream_rng(SEED, &[4]);
    let mut worst = 0.0f64;
    for trial in 0..200usize {
        let k = 2 + trial % 6;
        let m = DMatrix::from_fn(k, k, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let diff = (permanent(&m).unwrap() - naive_permanent(&m).unwrap()).norm();
        worst = worst.max(diff);
    }
    let mut ones_exact = true;
    let mut factorial: i64 = 1;
    for k in 1..=7usize {
        factorial *= k as i64;
        ones_exact &= permanent(&DMatrix::<i64>::from_element(k, k, 1)).unwrap() == factorial;
    }
    let pass = worst <= 1e-9 && ones_exact;
    report(
        4,
        "permanent oracle",
        pass,
        &format!(
            "max |Ryser - naive| over 200 matrices (sizes 2-7): {worst:.2e}; \
             Per(all-ones kxk) = k! exactly for k <= 7: {ones_exact}"
        ),
    );
}

fn sampler_tvd(circuit: &Circuit, input: &InputSpec, noise: &NoiseSpec, path: u64) -> f64 {
    let opts = SampleOptions {
        epsilon: 0.01,
        force: true,
        y_star_override: Some(1e9),
    };
    let sampler = NoisySampler::new(circuit, input, noise, &opts).unwrap();
    let draws = 100_000usize;
    let mut rng = stream_rng(SEED, &[path]);
    let outcomes = (0..draws).map(|_| sampler.sample(&mut rng).unwrap().outcome);
    let emp = empirical_distribution(outcomes);
    let oracle = brute_force_oracle(circuit, input, noise).unwrap();
    tvd(&emp, &oracle)
}

#[test]
fn noisy_sampler_matches_oracle() {
    let circuit = Circuit::random(6, 2, &mut stream_rng(SEED, &[50]));
    let input = InputSpec::single_photons(&[0, 2, 4]);
    let t_loss = sampler_tvd(&circuit, &input, &NoiseSpec::loss(0.5), 51);
    let t_dist = sampler_tvd(&circuit, &input, &NoiseSpec::distinguishability(0.5), 52);
    let pass = t_loss <= 0.015 && t_dist <= 0.015;
    report(
        5,
        "noisy sampler vs oracle",
        pass,
        &format!(
            "TVD over 1e5 draws (3 photons, 6 modes, depth 2): \
             loss eta=0.5: {t_loss:.4} <= 0.015; distinguishability x=0.5: {t_dist:.4} <= 0.015"
        ),
    );
}

#[test]
fn conditional_tvd_within_budget() {
    let input = InputSpec::single_photons(&[0, 2, 4, 6]);
    let mut detail = String::new();
    let mut pass = true;
    for (idx, eta) in [0.3f64, 0.45, 0.6].iter().enumerate() {
        let circuit = Circuit::random(8, 2, &mut stream_rng(SEED, &[60 + idx as u64]));
        let noise = NoiseSpec::loss(*eta);
        let cond = brute_force_conditional(&circuit, &input, &noise, 2.0).unwrap();
        let full = brute_force_oracle(&circuit, &input, &noise).unwrap();
        let d = tvd(&full, &cond.conditional);
        let budget = 2.0 * cond.p_violation;
        pass &= d <= budget + 1e-12;
        pass &= (cond.p_event + cond.p_violation - 1.0).abs() <= 1e-12;
        detail.push_str(&format!(
            "eta={eta}: TVD={d:.4} <= 2 p(violation)={budget:.4}; "
        ));
    }
    report(
        6,
        "conditional TVD budget",
        pass,
        &format!("4 photons, 8 modes, cap y=2: {}", detail.trim_end()),
    );
}

#[test]
fn mps_matches_dense_within_rank_bounds() {
    let occ = [1usize, 0, 1, 0, 1, 0];
    let mut worst_f = 1.0f64;
    let mut max_bond = 0usize;
    let mut max_rank = 0usize;
    for i in 0..50u64 {
        let circuit = Circuit::random(6, 3, &mut stream_rng(SEED, &[70, i]));
        let mut mps = MPSState::from_occupations(&occ, 4, 0.0).unwrap();
        mps.apply_circuit(&circuit).unwrap();
        let mut dense = percolo::fock::FockState::from_occupations(&occ, 4).unwrap();
        dense.apply_circuit(&circuit).unwrap();
        worst_f = worst_f.min(mps.contract_dense().unwrap().fidelity(&dense).unwrap());
        max_bond = max_bond.max(mps.max_bond_seen);
        for cut in 1..6 {
            max_rank = max_rank.max(schmidt_rank_check(&dense, cut, 3).unwrap());
        }
    }
    let pass = worst_f >= 1.0 - 1e-8 && max_bond <= 8 && max_rank <= 8;
    report(
        7,
        "MPS equivalence and rank bound",
        pass,
        &format!(
            "50 circuits (depth 3, 6 modes, 3 photons): worst fidelity {worst_f:.12}, \
             max bond {max_bond} <= 8, max Schmidt rank {max_rank} <= 8"
        ),
    );
}

#[test]
fn fock_loss_threshold_sign_grid() {
    let mut cases = 0usize;
    let mut agree = true;
    let mut n1_reduces = true;
    for n in 1..=3usize {
        for k in 1..=50usize {
            let eta = k as f64 / 100.0;
            for delta in 2..=4usize {
                // independent arithmetic: repeated multiplication, no powi
                let mut kept = 1.0f64;
                for _ in 0..n {
                    kept *= 1.0 - eta;
                }
                let direct = 1.0 - (1.0 - kept) * (delta * delta) as f64;
                let (simulable, margin) =
                    classical_threshold(delta, &NoiseSpec::loss(eta), Some(n)).unwrap();
                agree &= simulable == (direct > 0.0) && (margin - direct).abs() <= 1e-12;
                if n == 1 {
                    let v = eta * (delta * delta) as f64;
                    n1_reduces &= simulable == (v < 1.0);
                }
                cases += 1;
            }
        }
    }
    let pass = agree && n1_reduces;
    report(
        8,
        "Fock loss threshold grid",
        pass,
        &format!(
            "{cases} grid points (n in 1..3, eta in 0.01..0.50, delta in 2..4): \
             sign agreement {agree}, n=1 reduces to eta*delta^2 < 1: {n1_reduces}"
        ),
    );
}

#[test]
fn cli_reruns_are_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_percolo");
    let dir = std::env::temp_dir().join(format!("percolo_accept_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    let circuit = Circuit::random(6, 2, &mut stream_rng(SEED, &[90]));
    let circuit_path = dir.join("circuit.json");
    let input_path = dir.join("input.json");
    std::fs::write(&circuit_path, circuit.to_json()).unwrap();
    std::fs::write(&input_path, InputSpec::single_photons(&[0, 2, 4]).to_json()).unwrap();

    let mut identical = true;
    let mut detail = String::new();
    let runs: [(&str, Vec<String>); 2] = [
        (
            "percolate",
            vec![
                "percolate".into(),
                "--arch".into(),
                "nonlocal".into(),
                "--n".into(),
                "200,400".into(),
                "--trials".into(),
                "5".into(),
                "--seed".into(),
                "123".into(),
            ],
        ),
        (
            "sample",
            vec![
                "sample".into(),
                "--circuit".into(),
                circuit_path.display().to_string(),
                "--input".into(),
                input_path.display().to_string(),
                "--eta".into(),
                "0.05".into(),
                "--num-samples".into(),
                "50".into(),
                "--seed".into(),
                "123".into(),
            ],
        ),
    ];
    for (name, args) in &runs {
        let mut bodies = Vec::new();
        for run in 0..2 {
            let out = dir.join(format!("{name}_{run}.out"));
            let status = Command::new(bin)
                .args(args)
                .arg("--out")
                .arg(&out)
                .status()
                .unwrap();
            assert!(status.success(), "{name} run {run} failed");
            bodies.push(std::fs::read(&out).unwrap());
        }
        let same = bodies[0] == bodies[1];
        identical &= same;
        detail.push_str(&format!("{name}: {} bytes, identical={same}; ", bodies[0].len()));
    }
    std::fs::remove_dir_all(&dir).ok();
    report(
        9,
        "deterministic reruns",
        identical,
        &format!("same seed, two runs each: {}", detail.trim_end()),
    );
}

/// Exercised here so the gate also covers the outcome maps used above:
/// empirical and exact distributions must agree on a noiseless component.
#[test]
fn noiseless_distribution_cross_check() {
    let circuit = Circuit::random(4, 2, &mut stream_rng(SEED, &[99]));
    let u = percolo::circuit::build_unitary(&circuit).unwrap();
    let exact = percolo::sampler::exact_component_distribution(&u, &[1, 0, 1, 0]).unwrap();
    let total: f64 = exact.values().sum();
    let mut emp: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut rng = stream_rng(SEED, &[100]);
    let draws = 50_000;
    for _ in 0..draws {
        let o = percolo::sampler::sample_component(&u, &[1, 0, 1, 0], &mut rng).unwrap();
        *emp.entry(o).or_insert(0.0) += 1.0 / draws as f64;
    }
    let d = tvd(&exact, &emp);
    assert!((total - 1.0).abs() <= 1e-9, "normalization: {total}");
    assert!(d <= 0.02, "chain-rule sampler TVD {d}");
}
