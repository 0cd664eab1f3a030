//! Per-pulse photon-number statistics of the three source families.
//!
//! Sources are represented only by their photon-number distribution. Alice's
//! signals are phase-randomized mixtures of Fock states, so a QND measurement
//! of the total photon number does not disturb them and the polarization can
//! be carried as a classical (basis, bit) label.

use crate::error::{Error, Result};

/// Default truncation order for the distributions built by this module.
pub const DEFAULT_N_MAX: usize = 20;

/// Largest probability mass that may be folded into the last bin without a
/// warning (Poisson: without an error).
pub const TAIL_TOLERANCE: f64 = 1e-9;

/// Probability vector over the photon number `n = 0..=n_max` in one pulse.
///
/// Mass above `n_max` is folded into the last bin; the folded amount is kept
/// in [`folded_tail`](Self::folded_tail).
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
    folded_tail: f64,
}

impl PhotonNumberDistribution {
    /// An ideal single-photon source: `p1 = 1`.
    pub fn single_photon() -> Self {
        Self {
            probs: vec![0.0, 1.0, 0.0],
            folded_tail: 0.0,
        }
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::invalid("weights", "need at least the n = 0 and n = 1 bins"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights", "entries must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights", "total weight is zero"));
        }
        Ok(Self {
            probs: weights.into_iter().map(|w| w / total).collect(),
            folded_tail: 0.0,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// `p_n`, zero beyond the truncation.
    pub fn p(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn p0(&self) -> f64 {
        self.probs[0]
    }

    pub fn p1(&self) -> f64 {
        self.probs[1]
    }

    /// Probability of two or more photons, `1 - p0 - p1`.
    ///
    /// Summed from the `n >= 2` bins so that it keeps full relative precision
    /// when it is many orders of magnitude below `p0`.
    pub fn p_multi(&self) -> f64 {
        self.probs[2..].iter().sum::<f64>().clamp(0.0, 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Mass that lay above `n_max` and was folded into the last bin.
    pub fn folded_tail(&self) -> f64 {
        self.folded_tail
    }

    pub fn exceeds_tail_tolerance(&self) -> bool {
        self.folded_tail > TAIL_TOLERANCE
    }
}

/// Photon-number-resolving description of a source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceModel {
    SinglePhoton,
    /// Attenuated laser pulse with Poissonian statistics of mean `mu`.
    WeakCoherent { mu: f64 },
    HeraldedPdc(HeraldedPdc),
}

impl SourceModel {
    pub fn weak_coherent(mu: f64) -> Result<Self> {
        validate_mu(mu)?;
        Ok(SourceModel::WeakCoherent { mu })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceModel::SinglePhoton => Ok(()),
            SourceModel::WeakCoherent { mu } => validate_mu(*mu),
            SourceModel::HeraldedPdc(pdc) => pdc.validate(),
        }
    }

    /// Exact photon-number distribution at the default truncation, growing
    /// `n_max` for Poisson sources whose tail would not fit.
    pub fn distribution(&self) -> Result<PhotonNumberDistribution> {
        match self {
            SourceModel::SinglePhoton => Ok(PhotonNumberDistribution::single_photon()),
            SourceModel::WeakCoherent { mu } => match poisson_distribution(*mu, DEFAULT_N_MAX) {
                Err(Error::TruncationTooSmall { required, .. }) => {
                    poisson_distribution(*mu, required)
                }
                other => other,
            },
            SourceModel::HeraldedPdc(pdc) => {
                Ok(heralded_pdc_distribution(pdc, DEFAULT_N_MAX, AmplitudeMode::Exact)?.dist)
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SourceModel::SinglePhoton => "single-photon",
            SourceModel::WeakCoherent { .. } => "wcp",
            SourceModel::HeraldedPdc(_) => "pdc",
        }
    }
}

fn validate_mu(mu: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid("mu", format!("mean photon number must be > 0, got {mu}")));
    }
    if mu > 700.0 {
        return Err(Error::invalid("mu", format!("mean photon number {mu} underflows e^-mu")));
    }
    Ok(())
}

/// Downconversion source heralded by a threshold detector on the partner
/// mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeraldedPdc {
    /// Squared squeezing parameter `chi^2`.
    pub chi_sq: f64,
    /// Efficiency of the heralding detector.
    pub eta_a: f64,
    /// Dark-count probability per slot of the heralding detector.
    pub d_a: f64,
}

impl HeraldedPdc {
    pub fn new(chi_sq: f64, eta_a: f64, d_a: f64) -> Result<Self> {
        let pdc = Self { chi_sq, eta_a, d_a };
        pdc.validate()?;
        Ok(pdc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.chi_sq > 0.0 && self.chi_sq < 1.0) {
            return Err(Error::invalid("chi2", format!("must lie in (0, 1), got {}", self.chi_sq)));
        }
        if !(self.eta_a > 0.0 && self.eta_a <= 1.0) {
            return Err(Error::invalid("eta_a", format!("must lie in (0, 1], got {}", self.eta_a)));
        }
        if !(self.d_a >= 0.0 && self.d_a < 1.0) {
            return Err(Error::invalid("dark_a", format!("must lie in [0, 1), got {}", self.d_a)));
        }
        Ok(())
    }

    pub fn chi(&self) -> f64 {
        self.chi_sq.sqrt()
    }

    pub fn with_chi_sq(self, chi_sq: f64) -> Self {
        Self { chi_sq, ..self }
    }
}

/// How the two-mode squeezed vacuum is expanded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeMode {
    /// Closed form `tanh^n(chi) / cosh(chi)`.
    #[default]
    Exact,
    /// Fourth-order Taylor coefficients in `chi`.
    FourthOrderTaylor,
}

/// Amplitudes `c_n` of the joint state `sum_n c_n |n, n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdcAmplitudes {
    pub amps: Vec<f64>,
    pub mode: AmplitudeMode,
}

/// Poisson photon-number distribution of a weak coherent pulse.
///
/// `probs[n] = e^-mu mu^n / n!` for `n < n_max`; the remaining mass goes into
/// `probs[n_max]`. Fails if more than [`TAIL_TOLERANCE`] lies above `n_max`.
pub fn poisson_distribution(mu: f64, n_max: usize) -> Result<PhotonNumberDistribution> {
    validate_mu(mu)?;
    if n_max < 2 {
        return Err(Error::invalid("n_max", format!("must be >= 2, got {n_max}")));
    }

    // Generate terms well past the mode until they are negligible, then form
    // suffix sums so tails are exact rather than 1 - (partial sum).
    let mut terms = vec![(-mu).exp()];
    let mut n = 0usize;
    loop {
        n += 1;
        let next = terms[n - 1] * mu / n as f64;
        terms.push(next);
        if n > n_max && (n as f64) > mu && next < 1e-30 {
            break;
        }
    }
    let mut suffix = vec![0.0; terms.len() + 1];
    for k in (0..terms.len()).rev() {
        suffix[k] = suffix[k + 1] + terms[k];
    }

    let beyond = suffix[n_max + 1];
    if beyond > TAIL_TOLERANCE {
        let required = (n_max + 1..terms.len())
            .find(|&m| suffix[m + 1] <= TAIL_TOLERANCE)
            .unwrap_or(terms.len());
        return Err(Error::TruncationTooSmall { n_max, required });
    }

    let mut probs = terms[..n_max].to_vec();
    probs.push(suffix[n_max]);
    Ok(PhotonNumberDistribution {
        probs,
        folded_tail: beyond,
    })
}

/// Amplitudes of the two-mode squeezed vacuum `exp{chi (a+ b+ - a b)} |0,0>`.
pub fn pdc_joint_amplitudes(chi: f64, n_max: usize, mode: AmplitudeMode) -> Result<PdcAmplitudes> {
    if !(chi > 0.0 && chi < 1.0) {
        return Err(Error::invalid("chi", format!("must lie in (0, 1), got {chi}")));
    }
    let amps = match mode {
        AmplitudeMode::Exact => {
            let t = chi.tanh();
            let mut amps = Vec::with_capacity(n_max + 1);
            let mut c = 1.0 / chi.cosh();
            for _ in 0..=n_max {
                amps.push(c);
                c *= t;
            }
            amps
        }
        AmplitudeMode::FourthOrderTaylor => {
            let x2 = chi * chi;
            let x3 = x2 * chi;
            let x4 = x2 * x2;
            let taylor = [
                1.0 - x2 / 2.0 + 5.0 * x4 / 24.0,
                chi - 5.0 * x3 / 6.0,
                x2 - 7.0 * x4 / 6.0,
                x3,
                x4,
            ];
            (0..=n_max)
                .map(|n| taylor.get(n).copied().unwrap_or(0.0))
                .collect()
        }
    };
    Ok(PdcAmplitudes { amps, mode })
}

/// Click probability of a threshold detector with efficiency `eta` and dark
/// count `dark` when `n` photons arrive.
pub fn threshold_click_probability(n: usize, eta: f64, dark: f64) -> f64 {
    if n == 0 {
        dark
    } else {
        -(n as f64 * (-eta).ln_1p()).exp_m1()
    }
}

/// Heralded signal distribution together with the herald probability.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedDistribution {
    pub dist: PhotonNumberDistribution,
    /// Probability `N` that the herald fires in a pump slot.
    pub heralding_probability: f64,
}

/// Photon-number distribution of the signal mode conditioned on a herald
/// click: `w_n = c_n^2 * E_click(n)`, normalized by `N = sum w_n`.
///
/// In `FourthOrderTaylor` mode the weights are the three fourth-order terms
/// `d_A (1 - chi^2 + 2 chi^4 / 3)`, `eta_A chi^2 (1 - 5 chi^2 / 3)` and
/// `eta_A (2 - eta_A) chi^4`.
pub fn heralded_pdc_distribution(
    source: &HeraldedPdc,
    n_max: usize,
    mode: AmplitudeMode,
) -> Result<HeraldedDistribution> {
    source.validate()?;
    if n_max < 2 {
        return Err(Error::invalid("n_max", format!("must be >= 2, got {n_max}")));
    }
    let HeraldedPdc { chi_sq, eta_a, d_a } = *source;

    let (weights, tail) = match mode {
        AmplitudeMode::FourthOrderTaylor => {
            let x4 = chi_sq * chi_sq;
            let mut w = vec![0.0; n_max + 1];
            w[0] = d_a * (1.0 - chi_sq + 2.0 * x4 / 3.0);
            w[1] = eta_a * chi_sq * (1.0 - 5.0 * chi_sq / 3.0);
            w[2] = eta_a * (2.0 - eta_a) * x4;
            (w, 0.0)
        }
        AmplitudeMode::Exact => {
            let chi = source.chi();
            let t2 = chi.tanh().powi(2);
            let mut c_sq = 1.0 / chi.cosh().powi(2);
            let mut w = Vec::with_capacity(n_max + 1);
            let mut tail = 0.0;
            let mut n = 0usize;
            loop {
                let term = c_sq * threshold_click_probability(n, eta_a, d_a);
                if n <= n_max {
                    w.push(term);
                } else {
                    tail += term;
                    if c_sq < 1e-300 || c_sq < 1e-30 * w.iter().sum::<f64>() {
                        break;
                    }
                }
                c_sq *= t2;
                n += 1;
            }
            (w, tail)
        }
    };

    let norm: f64 = weights.iter().sum::<f64>() + tail;
    if norm.is_nan() || norm < 1e-300 {
        return Err(Error::DegenerateHerald(norm));
    }
    let mut probs: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    probs[n_max] += tail / norm;
    Ok(HeraldedDistribution {
        dist: PhotonNumberDistribution {
            probs,
            folded_tail: tail / norm,
        },
        heralding_probability: norm,
    })
}

/// `1 - p0 - p1`, clamped to `[0, 1]`.
pub fn multi_photon_probability(dist: &PhotonNumberDistribution) -> f64 {
    dist.p_multi()
}
