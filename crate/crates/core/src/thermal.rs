//! Boltzmann occupation model for the spin chain and related figures.
//!
//! Each spin `n` costs `x_n = hbar * omega_n / (k_B T)` (dimensionless) to
//! excite, so a basis state `B` carries weight proportional to
//! `exp(-sum_n x_n b_n)`. The product structure keeps everything analytic:
//! the ground-state fraction is `prod_n (1 + exp(-x_n))^{-1}`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{BasisIndex, ChainLayout};

/// Per-spin excitation costs. `x = 0` is infinite temperature,
/// `x = infinity` pins every spin to the ground state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpec {
    x: Vec<f64>,
}

impl ThermalSpec {
    pub fn per_spin(x: Vec<f64>) -> ThermalSpec {
        assert!(x.iter().all(|&v| v >= 0.0), "excitation costs must be >= 0");
        ThermalSpec { x }
    }

    /// Uniform cost on every spin.
    pub fn uniform(x: f64, total_spins: usize) -> ThermalSpec {
        ThermalSpec::per_spin(vec![x; total_spins])
    }

    /// One scalar knob scaled by the layout frequencies:
    /// `x_n = x0 * omega_n / omega_1`.
    pub fn scaled(x0: f64, layout: &ChainLayout) -> ThermalSpec {
        let reference = layout.base_freq(1);
        ThermalSpec::per_spin(
            (1..=layout.total_spins())
                .map(|n| x0 * layout.base_freq(n) / reference)
                .collect(),
        )
    }

    pub fn total_spins(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self, spin: usize) -> f64 {
        self.x[spin - 1]
    }

    /// Probability that one spin is excited: `e^{-x} / (1 + e^{-x})`.
    pub fn excitation_probability(&self, spin: usize) -> f64 {
        let b = (-self.x(spin)).exp();
        b / (1.0 + b)
    }
}

/// Normalized Boltzmann weights over every basis state, ground state first in
/// magnitude. Index order is basis order.
pub fn boltzmann_weights(layout: &ChainLayout, thermal: &ThermalSpec) -> Vec<f64> {
    let spins = layout.total_spins();
    assert_eq!(thermal.total_spins(), spins, "thermal spec size mismatch");
    let dim = layout.dim();
    let mut weights = Vec::with_capacity(dim);
    for basis in 0..dim as BasisIndex {
        let mut w = 1.0;
        for spin in 1..=spins {
            let p1 = thermal.excitation_probability(spin);
            w *= if (basis >> (spin - 1)) & 1 == 1 { p1 } else { 1.0 - p1 };
        }
        weights.push(w);
    }
    // per-spin factors are already normalized; renormalize defensively against
    // rounding so the sum is exactly 1
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights
}

/// Analytic probability that `n_spins` uniform-cost spins are all in the
/// ground state: `(1 + e^{-x})^{-n}`.
pub fn ground_fraction_uniform(x: f64, n_spins: usize) -> f64 {
    (1.0 + (-x).exp()).powi(-(n_spins as i32))
}

/// Analytic ground-state probability for a per-spin spec.
pub fn ground_fraction(thermal: &ThermalSpec) -> f64 {
    (1..=thermal.total_spins())
        .map(|s| 1.0 - thermal.excitation_probability(s))
        .product()
}

/// Monte-Carlo estimate of the uniform ground fraction with a seeded
/// generator. Returns `(estimate, standard_error)`.
pub fn sample_ground_fraction(x: f64, n_spins: usize, draws: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p1 = (-x).exp() / (1.0 + (-x).exp());
    let mut ground = 0usize;
    for _ in 0..draws {
        let mut all_zero = true;
        for _ in 0..n_spins {
            if rng.gen::<f64>() < p1 {
                all_zero = false;
                // the register is already excited; skip the rest
                break;
            }
        }
        if all_zero {
            ground += 1;
        }
    }
    let p = ground as f64 / draws as f64;
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    (p, se)
}

/// Named anchor points for the figure of merit `Q = omega0 * tau`.
const Q_ANCHORS: &[(f64, &str)] = &[
    (1e9, "solid-state ESR"),
    (1e7, "NMR"),
    (1e13, "ion trap"),
];

/// Figure of merit `Q = omega0 * tau` with an optional technology label when
/// the product sits on a known anchor.
pub fn q_factor(omega0: f64, tau: f64) -> (f64, Option<&'static str>) {
    assert!(omega0 >= 0.0 && tau >= 0.0, "q_factor takes nonnegative inputs");
    let q = omega0 * tau;
    let label = Q_ANCHORS
        .iter()
        .find(|(anchor, _)| (q - anchor).abs() <= 1e-6 * anchor)
        .map(|&(_, name)| name);
    (q, label)
}
