//! Fiber transmission and per-slot click/error probabilities at Bob.

use crate::error::{Error, Result};
use crate::photon_statistics::{threshold_click_probability, PhotonNumberDistribution, SourceModel};

/// Fiber between Alice and Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Absorption coefficient in dB/km.
    pub beta_db_per_km: f64,
    /// Length-independent loss in dB (connectors, Bob's optics).
    pub c_db: f64,
    pub length_km: f64,
}

impl ChannelParams {
    pub fn new(beta_db_per_km: f64, c_db: f64, length_km: f64) -> Result<Self> {
        let ch = Self {
            beta_db_per_km,
            c_db,
            length_km,
        };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("beta", self.beta_db_per_km)?;
        non_negative("c", self.c_db)?;
        non_negative("length", self.length_km)
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

/// Bob's threshold detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Detection efficiency `eta_B` in `(0, 1]`.
    pub eta: f64,
    /// Dark-count probability per time slot `d_B` in `[0, 0.5)`.
    pub dark: f64,
}

impl DetectorParams {
    pub fn new(eta: f64, dark: f64) -> Result<Self> {
        let det = Self { eta, dark };
        det.validate()?;
        Ok(det)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid("eta_b", format!("must lie in (0, 1], got {}", self.eta)));
        }
        if !(self.dark >= 0.0 && self.dark < 0.5) {
            return Err(Error::invalid("dark_b", format!("must lie in [0, 0.5), got {}", self.dark)));
        }
        Ok(())
    }
}

/// Error probability of a detected signal. Dark counts always err with 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorModel {
    /// Misalignment / polarization-diffusion error per arriving signal.
    pub p_e_signal: f64,
}

impl ErrorModel {
    pub const P_E_DARK: f64 = 0.5;

    pub fn new(p_e_signal: f64) -> Result<Self> {
        let err = Self { p_e_signal };
        err.validate()?;
        Ok(err)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.p_e_signal) {
            return Err(Error::invalid(
                "pe_signal",
                format!("must lie in [0, 0.5], got {}", self.p_e_signal),
            ));
        }
        Ok(())
    }
}

/// How signal and dark-count probabilities combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Composition {
    /// Coincidence terms dropped: `p_exp = p_sig + d`.
    #[default]
    FirstOrder,
    /// Inclusion-exclusion: `p_exp = 1 - (1 - p_sig)(1 - d)`.
    Exact,
}

/// Per-time-slot probabilities at Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Channel transmission `F`.
    pub f: f64,
    pub p_sig: f64,
    pub p_dark: f64,
    /// Total click probability.
    pub p_exp: f64,
    /// Error probability per slot.
    pub e: f64,
    /// Error fraction of the sifted key, `e / p_exp`.
    pub p_e_sifted: f64,
}

/// `F = 10^{-(beta l + c)/10}`.
pub fn transmission(channel: &ChannelParams) -> f64 {
    db_to_transmission(channel.beta_db_per_km * channel.length_km + channel.c_db)
}

pub fn db_to_transmission(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Fiber length at which the transmission drops to `f`.
///
/// Returns [`Error::Unattainable`] when `f` exceeds the zero-length
/// transmission `10^{-c/10}`.
pub fn distance_for_transmission(f: f64, beta_db_per_km: f64, c_db: f64) -> Result<f64> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::invalid("f", format!("must lie in (0, 1], got {f}")));
    }
    if !(beta_db_per_km > 0.0 && beta_db_per_km.is_finite()) {
        return Err(Error::invalid("beta", format!("must be > 0, got {beta_db_per_km}")));
    }
    non_negative("c", c_db)?;
    let f_max = db_to_transmission(c_db);
    if f > f_max {
        return Err(Error::Unattainable { f_min: f, f_max });
    }
    Ok(((-10.0 * f.log10() - c_db) / beta_db_per_km).max(0.0))
}

/// Probability that at least one photon of a pulse is detected when each
/// photon independently survives with `f * eta`.
pub fn detection_prob_signal(dist: &PhotonNumberDistribution, f: f64, eta: f64) -> f64 {
    let t = (f * eta).clamp(0.0, 1.0);
    if t == 0.0 {
        return 0.0;
    }
    dist.probs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, p)| p * threshold_click_probability(n, t, 0.0))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

pub fn expected_click_rate(p_sig: f64, dark: f64, mode: Composition) -> f64 {
    match mode {
        Composition::FirstOrder => p_sig + dark,
        Composition::Exact => p_sig + dark - p_sig * dark,
    }
}

/// Erroneous clicks per slot. In exact mode a dark count only errs when no
/// signal click occurred in the same slot.
pub fn error_rate(p_sig: f64, err: &ErrorModel, dark: f64, mode: Composition) -> f64 {
    let dark_part = match mode {
        Composition::FirstOrder => dark,
        Composition::Exact => (1.0 - p_sig) * dark,
    };
    p_sig * err.p_e_signal + ErrorModel::P_E_DARK * dark_part
}

pub fn link_budget(
    source: &SourceModel,
    channel: &ChannelParams,
    det: &DetectorParams,
    err: &ErrorModel,
    mode: Composition,
) -> Result<LinkBudget> {
    source.validate()?;
    channel.validate()?;
    det.validate()?;
    err.validate()?;
    let dist = source.distribution()?;
    Ok(link_budget_for(&dist, transmission(channel), det, err, mode))
}

/// Link budget for an explicit distribution and transmission.
pub fn link_budget_for(
    dist: &PhotonNumberDistribution,
    f: f64,
    det: &DetectorParams,
    err: &ErrorModel,
    mode: Composition,
) -> LinkBudget {
    let p_sig = detection_prob_signal(dist, f, det.eta);
    let p_exp = expected_click_rate(p_sig, det.dark, mode);
    let e = error_rate(p_sig, err, det.dark, mode);
    LinkBudget {
        f,
        p_sig,
        p_dark: det.dark,
        p_exp,
        e,
        p_e_sifted: if p_exp > 0.0 { e / p_exp } else { 0.0 },
    }
}
