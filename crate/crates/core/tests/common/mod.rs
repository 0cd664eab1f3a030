#![allow(dead_code)]

use nalgebra::DMatrix;
use qkd_limits::link_model::{ChannelParams, DetectorParams, ErrorModel};
use qkd_limits::photon_statistics::SourceModel;
use qkd_limits::pns_simulator::{EveStrategy, SimConfig};

pub fn reference_detector() -> DetectorParams {
    DetectorParams::new(0.11, 1e-5).unwrap()
}

pub fn reference_fiber(length_km: f64) -> ChannelParams {
    ChannelParams::new(0.38, 5.0, length_km).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Amplitudes `<n,n| exp{chi (a+ b+ - a b)} |0,0>` for `n < n_out`, computed by
/// exponentiating the generator on a two-mode Fock space truncated at
/// `cutoff` photons per mode.
pub fn fock_squeezed_amplitudes(chi: f64, cutoff: usize, n_out: usize) -> Vec<f64> {
    assert!(n_out < cutoff);
    let a = DMatrix::<f64>::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            (j as f64).sqrt()
        } else {
            0.0
        }
    });
    let id = DMatrix::<f64>::identity(cutoff, cutoff);
    let a1 = a.kronecker(&id);
    let b1 = id.kronecker(&a);
    let pair_creation = a1.transpose() * b1.transpose();
    let pair_annihilation = &a1 * &b1;
    let generator = (pair_creation - pair_annihilation) * chi;
    let u = generator.exp();
    // |n, m> sits at index n * cutoff + m; the vacuum is index 0.
    (0..n_out).map(|n| u[(n * cutoff + n, 0)]).collect()
}

/// Outcome table of one intercept-resend round on a single photon with matched
/// Alice/Bob bases. Returns `(error probability, probability Eve knows the bit)`
/// over sifted events.
pub fn intercept_resend_table() -> (f64, f64) {
    let mut sifted = 0.0;
    let mut errors = 0.0;
    let mut known = 0.0;
    for alice_basis in 0..2 {
        for bit in 0..2u8 {
            for eve_basis in 0..2 {
                for bob_basis in 0..2 {
                    if bob_basis != alice_basis {
                        continue;
                    }
                    let weight = 1.0 / 16.0;
                    // Eve's result is the bit if her basis matches, else a coin.
                    let eve_outcomes: Vec<(u8, f64)> = if eve_basis == alice_basis {
                        vec![(bit, 1.0)]
                    } else {
                        vec![(0, 0.5), (1, 0.5)]
                    };
                    for (eve_bit, pe) in eve_outcomes {
                        // Bob measures Eve's state in his basis.
                        let bob_outcomes: Vec<(u8, f64)> = if bob_basis == eve_basis {
                            vec![(eve_bit, 1.0)]
                        } else {
                            vec![(0, 0.5), (1, 0.5)]
                        };
                        for (bob_bit, pb) in bob_outcomes {
                            let w = weight * pe * pb;
                            sifted += w;
                            if bob_bit != bit {
                                errors += w;
                            }
                            if eve_basis == alice_basis {
                                known += w;
                            }
                        }
                    }
                }
            }
        }
    }
    (errors / sifted, known / sifted)
}

pub fn honest_config(source: SourceModel, length_km: f64, n_pulses: u64, seed: u64) -> SimConfig {
    SimConfig {
        n_pulses,
        seed,
        source,
        channel: reference_fiber(length_km),
        bob: reference_detector(),
        error_model: ErrorModel::default(),
        eve: EveStrategy::absent(),
        eve_controls_bob_efficiency: false,
    }
}

pub fn within_sigma(observed: f64, expected: f64, sigma: f64, k: f64) -> bool {
    (observed - expected).abs() <= k * sigma
}

/// Binomial standard error of a rate `p` estimated from `n` trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
