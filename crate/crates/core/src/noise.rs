//! Stochastic classical descriptions of photon loss (single-photon and
//! Fock) and partial distinguishability, plus the simulability threshold.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::InputSpec;
use crate::graph::SurvivalMask;
use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Loss,
    Distinguishability,
    Both,
}

/// Noise parameters: total transmission `eta`, optional per-layer
/// transmission `eta_per_layer` (folds to eta_per_layer^depth), and
/// indistinguishability overlap `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default)]
    pub eta_per_layer: Option<f64>,
    #[serde(default = "one")]
    pub x: f64,
    pub kind: NoiseKind,
}

fn one() -> f64 {
    1.0
}

impl NoiseSpec {
    pub fn loss(eta: f64) -> Self {
        NoiseSpec {
            eta,
            eta_per_layer: None,
            x: 1.0,
            kind: NoiseKind::Loss,
        }
    }

    pub fn loss_per_layer(eta_per_layer: f64) -> Self {
        NoiseSpec {
            eta: 1.0,
            eta_per_layer: Some(eta_per_layer),
            x: 1.0,
            kind: NoiseKind::Loss,
        }
    }

    pub fn distinguishability(x: f64) -> Self {
        NoiseSpec {
            eta: 1.0,
            eta_per_layer: None,
            x,
            kind: NoiseKind::Distinguishability,
        }
    }

    /// Total transmission seen by a depth-`d` circuit.
    pub fn effective_eta(&self, depth: usize) -> f64 {
        match self.eta_per_layer {
            Some(e1) => fold_per_layer_loss(e1, depth),
            None => self.eta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta", self.eta),
            ("x", self.x),
            ("eta_per_layer", self.eta_per_layer.unwrap_or(1.0)),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::Parameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Survival mask for single-photon inputs: each photon kept independently
/// with probability eta.
pub fn sample_loss_single(
    input: &InputSpec,
    eta: f64,
    rng: &mut impl Rng,
) -> Result<SurvivalMask> {
    if !input.all_single() {
        return Err(SimError::Parameter(
            "sample_loss_single requires all occupations equal to 1".into(),
        ));
    }
    Ok(SurvivalMask::new(
        (0..input.num_sources())
            .map(|_| rng.gen::<f64>() < eta)
            .collect(),
    ))
}

/// Surviving photon count out of `n` under transmission eta: Binomial(n, eta).
/// The vertex is removed from the graph iff the count is 0.
pub fn sample_loss_fock(n: usize, eta: f64, rng: &mut impl Rng) -> usize {
    Binomial::new(n as u64, eta)
        .expect("eta validated in [0, 1]")
        .sample(rng) as usize
}

/// Uniform per-layer transmission folded through `depth` layers.
pub fn fold_per_layer_loss(eta1: f64, depth: usize) -> f64 {
    eta1.powi(depth as i32)
}

/// Indistinguishability mask: photon marked indistinguishable (interfering)
/// with probability x; the complement behaves classically.
pub fn sample_distinguishability(n_photons: usize, x: f64, rng: &mut impl Rng) -> Vec<bool> {
    (0..n_photons).map(|_| rng.gen::<f64>() < x).collect()
}

/// Simulability verdict: margin = 1 - s*Delta^2 where s is the applicable
/// survival parameter (eta, x, or 1-(1-eta)^n for Fock inputs); simulable
/// iff margin > 0 (boundary excluded).
///
/// The margin is reported raw so callers can see how supercritical a
/// configuration is.
pub fn classical_threshold(
    delta: usize,
    noise: &NoiseSpec,
    fock_n: Option<usize>,
) -> Result<(bool, f64)> {
    if delta < 1 {
        return Err(SimError::Parameter("delta must be >= 1".into()));
    }
    noise.validate()?;
    let survival = match noise.kind {
        NoiseKind::Both => return Err(SimError::UnsupportedCombination),
        NoiseKind::Loss => {
            let eta = noise.eta;
            match fock_n {
                Some(n) if n >= 1 => 1.0 - (1.0 - eta).powi(n as i32),
                Some(_) => return Err(SimError::Parameter("fock_n must be >= 1".into())),
                None => eta,
            }
        }
        NoiseKind::Distinguishability => {
            if fock_n.is_some() {
                return Err(SimError::Parameter(
                    "Fock photon numbers apply to loss noise only".into(),
                ));
            }
            noise.x
        }
    };
    let margin = 1.0 - survival * (delta * delta) as f64;
    Ok((margin > 0.0, margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn loss_single_extremes_and_concentration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let modes: Vec<usize> = (0..10_000).collect();
        let input = InputSpec::single_photons(&modes);
        assert_eq!(
            sample_loss_single(&input, 1.0, &mut rng).unwrap().num_kept(),
            10_000
        );
        assert_eq!(
            sample_loss_single(&input, 0.0, &mut rng).unwrap().num_kept(),
            0
        );
        let mask = sample_loss_single(&input, 0.3, &mut rng).unwrap();
        let frac = mask.num_kept() as f64 / 10_000.0;
        assert!((0.28..=0.32).contains(&frac));
    }

    #[test]
    fn loss_single_rejects_fock_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let input = InputSpec::new([(0, 2)].into()).unwrap();
        assert!(sample_loss_single(&input, 0.5, &mut rng).is_err());
    }

    #[test]
    fn fock_loss_matches_single_photon_channel() {
        // n = 1 must reduce to Bernoulli(eta)
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let survived = (0..trials)
            .filter(|_| sample_loss_fock(1, 0.3, &mut rng) == 1)
            .count();
        let p = survived as f64 / trials as f64;
        let sigma = (0.3 * 0.7 / trials as f64).sqrt();
        assert!((p - 0.3).abs() < 3.0 * sigma + 1e-9);
    }

    #[test]
    fn fock_loss_vacuum_probability_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 60_000;
        for n in [1usize, 2, 3] {
            for eta in [0.1f64, 0.5, 0.9] {
                let p0 = (1.0 - eta).powi(n as i32);
                let zeros = (0..trials)
                    .filter(|_| sample_loss_fock(n, eta, &mut rng) == 0)
                    .count();
                let phat = zeros as f64 / trials as f64;
                let sigma = (p0 * (1.0 - p0) / trials as f64).sqrt();
                assert!(
                    (phat - p0).abs() <= 3.0 * sigma + 1e-9,
                    "n={n} eta={eta}: phat={phat} p0={p0}"
                );
            }
        }
    }

    #[test]
    fn fold_is_multiplicative() {
        assert_eq!(fold_per_layer_loss(0.5, 3), 0.125);
        assert_eq!(fold_per_layer_loss(1.0, 17), 1.0);
        assert_eq!(fold_per_layer_loss(0.25, 1), 0.25);
        assert_eq!(fold_per_layer_loss(0.7, 0), 1.0);
        let a = fold_per_layer_loss(0.9, 5) * fold_per_layer_loss(0.9, 7);
        let b = fold_per_layer_loss(0.9, 12);
        assert!((a - b).abs() <= 1e-15 * b);
    }

    #[test]
    fn distinguishability_extremes_and_concentration() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(sample_distinguishability(100, 1.0, &mut rng)
            .iter()
            .all(|&b| b));
        assert!(sample_distinguishability(100, 0.0, &mut rng)
            .iter()
            .all(|&b| !b));
        let mask = sample_distinguishability(10_000, 0.1, &mut rng);
        let frac = mask.iter().filter(|&&b| b).count() as f64 / 10_000.0;
        assert!((0.09..=0.11).contains(&frac));
    }

    #[test]
    fn threshold_examples() {
        let (ok, margin) = classical_threshold(3, &NoiseSpec::loss(0.1), None).unwrap();
        assert!(ok);
        assert!((margin - 0.1).abs() < 1e-12);

        let (ok, margin) =
            classical_threshold(2, &NoiseSpec::distinguishability(0.25), None).unwrap();
        assert!(!ok, "boundary excluded");
        assert!(margin.abs() < 1e-12);

        let (ok, margin) = classical_threshold(2, &NoiseSpec::loss(0.2), Some(2)).unwrap();
        assert!(!ok);
        assert!((margin - (1.0 - 1.44)).abs() < 1e-12);
    }

    #[test]
    fn threshold_monotone_in_noise() {
        // once not simulable, never simulable again as eta grows
        let mut seen_not_simulable = false;
        for i in 0..=100 {
            let eta = i as f64 / 100.0;
            let (ok, _) = classical_threshold(3, &NoiseSpec::loss(eta), None).unwrap();
            if !ok {
                seen_not_simulable = true;
            }
            assert!(
                !(ok && seen_not_simulable),
                "flipped back to simulable at eta={eta}"
            );
        }
    }

    #[test]
    fn threshold_rejects_combined_noise() {
        let spec = NoiseSpec {
            eta: 0.5,
            eta_per_layer: None,
            x: 0.5,
            kind: NoiseKind::Both,
        };
        assert!(matches!(
            classical_threshold(2, &spec, None),
            Err(SimError::UnsupportedCombination)
        ));
    }

    #[test]
    fn noise_spec_json_keys() {
        let spec = NoiseSpec {
            eta: 0.25,
            eta_per_layer: Some(0.9),
            x: 1.0,
            kind: NoiseKind::Loss,
        };
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"eta\":0.25"));
        assert!(s.contains("\"eta_per_layer\":0.9"));
        assert!(s.contains("\"kind\":\"loss\""));
        let back: NoiseSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
        let partial: NoiseSpec =
            serde_json::from_str(r#"{"kind": "distinguishability", "x": 0.4}"#).unwrap();
        assert_eq!(partial.eta, 1.0);
        assert_eq!(partial.x, 0.4);
    }
}
