//! Necessary conditions for secure key distribution and the transmission and
//! distance limits they imply.
//!
//! All three criteria compare a left-hand side against a right-hand side with
//! a strict inequality; equality is reported as insecure with margin zero.
//!
//! * error-only: `e / threshold < p_exp` (Eve hides an intercept-resend attack
//!   behind the observed error rate, `threshold = 1/4`);
//! * multi-photon: `p_multi < p_sig` (Eve splits every multi-photon pulse,
//!   blocks single photons and still delivers the expected click count);
//! * combined: `e / threshold < p_exp - p_multi`.
//!
//! Closed forms use the small-intensity expansions with `e = d_B / 2`; the
//! `NumericExact` method solves the combined criterion with exact photon
//! statistics instead.

use crate::error::{Error, Result};
use crate::link_model::{
    db_to_transmission, detection_prob_signal, distance_for_transmission, expected_click_rate,
    Composition, DetectorParams, ErrorModel,
};
use crate::numeric::{bisect_threshold, numeric_minimize};
use crate::photon_statistics::{
    heralded_pdc_distribution, AmplitudeMode, HeraldedPdc,
    PhotonNumberDistribution, SourceModel, DEFAULT_N_MAX,
};

/// Sifted error rate at which intercept-resend gives Eve as much as Bob.
pub const INTERCEPT_RESEND_THRESHOLD: f64 = 0.25;

/// Largest `mu` accepted by the WCP closed form.
pub const WCP_CLOSED_FORM_MAX_MU: f64 = 0.25;
/// Largest `chi^2` accepted by the PDC closed form.
pub const PDC_CLOSED_FORM_MAX_CHI_SQ: f64 = 0.1;

/// Transmission bracket searched by the exact method.
pub const EXACT_F_BRACKET: (f64, f64) = (1e-12, 1.0);
pub const EXACT_F_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    ErrorOnly,
    MultiPhotonOnly,
    Combined,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::ErrorOnly => "error_only",
            Criterion::MultiPhotonOnly => "multiphoton_only",
            Criterion::Combined => "combined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityVerdict {
    pub secure: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; positive iff secure.
    pub margin: f64,
    pub criterion: Criterion,
}

impl SecurityVerdict {
    fn new(lhs: f64, rhs: f64, criterion: Criterion) -> Self {
        let margin = rhs - lhs;
        Self {
            secure: margin > 0.0,
            lhs,
            rhs,
            margin,
            criterion,
        }
    }
}

pub fn necessary_condition_error(p_exp: f64, e: f64) -> SecurityVerdict {
    necessary_condition_error_at(p_exp, e, INTERCEPT_RESEND_THRESHOLD)
}

pub fn necessary_condition_error_at(p_exp: f64, e: f64, threshold: f64) -> SecurityVerdict {
    SecurityVerdict::new(e / threshold, p_exp, Criterion::ErrorOnly)
}

pub fn necessary_condition_multiphoton(p_sig: f64, p_multi: f64) -> SecurityVerdict {
    SecurityVerdict::new(p_multi, p_sig, Criterion::MultiPhotonOnly)
}

pub fn combined_condition(p_exp: f64, e: f64, p_multi: f64) -> SecurityVerdict {
    combined_condition_at(p_exp, e, p_multi, INTERCEPT_RESEND_THRESHOLD)
}

pub fn combined_condition_at(p_exp: f64, e: f64, p_multi: f64, threshold: f64) -> SecurityVerdict {
    SecurityVerdict::new(e / threshold, p_exp - p_multi, Criterion::Combined)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    ClosedForm,
    NumericExact,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::NumericExact => "numeric_exact",
        }
    }
}

/// Where a bound leaves the fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reach {
    /// Secure up to this length.
    Km(f64),
    /// Required transmission is zero, or the fiber is lossless.
    Unlimited,
    /// Required transmission exceeds what even a zero-length fiber offers.
    Unattainable { f_max: f64 },
}

impl Reach {
    pub fn km(&self) -> Option<f64> {
        match self {
            Reach::Km(l) => Some(*l),
            _ => None,
        }
    }

    pub fn is_attainable(&self) -> bool {
        !matches!(self, Reach::Unattainable { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    /// Minimum transmission. Values above 1 (including infinity) mean no
    /// transmission satisfies the criterion.
    pub f_min: f64,
    /// Optimizing `mu` (WCP) or `chi^2` (PDC) when the intensity was optimized.
    pub optimal_intensity: Option<f64>,
    pub method: Method,
    /// The optimum sits at zero intensity; `f_min` is the limiting value.
    pub degenerate: bool,
    pub reach: Option<Reach>,
}

impl BoundResult {
    fn closed(f_min: f64) -> Self {
        Self {
            f_min,
            optimal_intensity: None,
            method: Method::ClosedForm,
            degenerate: false,
            reach: None,
        }
    }

    /// Maximum fiber length for absorption `beta` (dB/km) and fixed loss `c` (dB).
    pub fn reach_for_fiber(&self, beta_db_per_km: f64, c_db: f64) -> Reach {
        let f_max = db_to_transmission(c_db);
        if self.f_min > f_max {
            Reach::Unattainable { f_max }
        } else if self.f_min <= 0.0 || beta_db_per_km == 0.0 {
            Reach::Unlimited
        } else {
            distance_for_transmission(self.f_min, beta_db_per_km, c_db)
                .map(Reach::Km)
                .unwrap_or(Reach::Unattainable { f_max })
        }
    }

    pub fn with_fiber(mut self, beta_db_per_km: f64, c_db: f64) -> Self {
        self.reach = Some(self.reach_for_fiber(beta_db_per_km, c_db));
        self
    }

    pub fn l_max(&self) -> Option<f64> {
        self.reach.and_then(|r| r.km())
    }
}

/// Settings of the exact combined criterion.
///
/// The error rate is taken as `p_sig * p_e_signal + d_B / 2`; with the default
/// `p_e_signal = 0` this is the dark-count floor used by the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactCriterion {
    pub err: ErrorModel,
    pub threshold: f64,
}

impl Default for ExactCriterion {
    fn default() -> Self {
        Self {
            err: ErrorModel::default(),
            threshold: INTERCEPT_RESEND_THRESHOLD,
        }
    }
}

/// Combined-criterion margin at transmission `f` with exact click statistics.
pub fn exact_margin(
    dist: &PhotonNumberDistribution,
    f: f64,
    det: &DetectorParams,
    crit: &ExactCriterion,
) -> f64 {
    let p_sig = detection_prob_signal(dist, f, det.eta);
    let p_exp = expected_click_rate(p_sig, det.dark, Composition::Exact);
    let e = p_sig * crit.err.p_e_signal + ErrorModel::P_E_DARK * det.dark;
    combined_condition_at(p_exp, e, dist.p_multi(), crit.threshold).margin
}

/// Smallest transmission satisfying the exact combined criterion, by
/// bisection on [`EXACT_F_BRACKET`]. `f_min` is infinite when even `F = 1`
/// fails.
pub fn min_transmission_exact(
    dist: &PhotonNumberDistribution,
    det: &DetectorParams,
    crit: &ExactCriterion,
) -> Result<BoundResult> {
    det.validate()?;
    crit.err.validate()?;
    let (lo, hi) = EXACT_F_BRACKET;
    let margin = |f: f64| exact_margin(dist, f, det, crit);

    // The bisection assumes the margin is nondecreasing in F.
    let grid: Vec<f64> = (0..=24)
        .map(|k| lo * (hi / lo).powf(k as f64 / 24.0))
        .map(margin)
        .collect();
    if grid.windows(2).any(|w| w[1] < w[0] - 1e-15) {
        return Err(Error::NonMonotoneMargin { lo, hi });
    }

    let f_min = bisect_threshold(|f| margin(f) > 0.0, lo, hi, EXACT_F_REL_TOL).unwrap_or(f64::INFINITY);
    Ok(BoundResult {
        f_min,
        optimal_intensity: None,
        method: Method::NumericExact,
        degenerate: false,
        reach: None,
    })
}

/// Ideal single-photon source: `F > d_B / eta_B`.
pub fn min_transmission_single_photon(det: &DetectorParams) -> Result<BoundResult> {
    det.validate()?;
    Ok(BoundResult::closed(det.dark / det.eta))
}

/// Minimum transmission for weak coherent pulses of mean `mu`.
///
/// Closed form: `d_B / (eta_B mu) + mu / (2 eta_B)`, valid for `mu <= 0.25`.
pub fn wcp_transmission_bound(mu: f64, det: &DetectorParams, method: Method) -> Result<BoundResult> {
    det.validate()?;
    match method {
        Method::ClosedForm => {
            if mu.is_nan() || mu <= 0.0 {
                return Err(Error::invalid("mu", format!("must be > 0, got {mu}")));
            }
            if mu > WCP_CLOSED_FORM_MAX_MU {
                return Err(Error::ClosedFormOutOfRange {
                    name: "mu",
                    value: mu,
                    limit: WCP_CLOSED_FORM_MAX_MU,
                });
            }
            Ok(BoundResult::closed(wcp_closed_form(mu, det)))
        }
        Method::NumericExact => {
            let dist = SourceModel::weak_coherent(mu)?.distribution()?;
            min_transmission_exact(&dist, det, &ExactCriterion::default())
        }
    }
}

fn wcp_closed_form(mu: f64, det: &DetectorParams) -> f64 {
    det.dark / (det.eta * mu) + mu / (2.0 * det.eta)
}

/// Optimal mean photon number `sqrt(2 d_B)` and the resulting
/// `F_min = sqrt(2 d_B) / eta_B`.
pub fn optimal_wcp_mu(det: &DetectorParams) -> Result<BoundResult> {
    det.validate()?;
    if det.dark == 0.0 {
        return Err(Error::DegenerateOptimum(
            "without dark counts the WCP bound improves without limit as mu -> 0",
        ));
    }
    let mu = (2.0 * det.dark).sqrt();
    Ok(BoundResult {
        optimal_intensity: Some(mu),
        ..BoundResult::closed(mu / det.eta)
    })
}

/// WCP multi-photon bound when `eta_B` is outside Eve's control.
///
/// Forwarded multi-photon pulses then see the same `eta_B` as honest ones, so
/// `F eta_B mu > p_multi eta_B` reduces to `F > mu / 2` at leading order.
pub fn honest_detector_wcp_bound(mu: f64) -> Result<BoundResult> {
    if !(mu > 0.0 && mu <= WCP_CLOSED_FORM_MAX_MU) {
        return Err(Error::invalid(
            "mu",
            format!("must lie in (0, {WCP_CLOSED_FORM_MAX_MU}], got {mu}"),
        ));
    }
    Ok(BoundResult::closed(mu / 2.0))
}

/// Minimum transmission for a heralded PDC source.
///
/// Closed form, valid for `chi^2 <= 0.1`:
/// `d_A d_B / (eta_A eta_B chi^2) + d_B / eta_B + (2 - eta_A) chi^2 / eta_B`.
pub fn pdc_transmission_bound(
    source: &HeraldedPdc,
    det: &DetectorParams,
    method: Method,
) -> Result<BoundResult> {
    source.validate()?;
    det.validate()?;
    match method {
        Method::ClosedForm => {
            if source.chi_sq > PDC_CLOSED_FORM_MAX_CHI_SQ {
                return Err(Error::ClosedFormOutOfRange {
                    name: "chi2",
                    value: source.chi_sq,
                    limit: PDC_CLOSED_FORM_MAX_CHI_SQ,
                });
            }
            Ok(BoundResult::closed(pdc_closed_form(source, det)))
        }
        Method::NumericExact => {
            let h = heralded_pdc_distribution(source, DEFAULT_N_MAX, AmplitudeMode::Exact)?;
            min_transmission_exact(&h.dist, det, &ExactCriterion::default())
        }
    }
}

fn pdc_closed_form(s: &HeraldedPdc, det: &DetectorParams) -> f64 {
    s.d_a * det.dark / (s.eta_a * det.eta * s.chi_sq)
        + det.dark / det.eta
        + (2.0 - s.eta_a) * s.chi_sq / det.eta
}

/// Minimizes the PDC closed form over `chi^2`.
///
/// `chi^2* = sqrt(d_A d_B / (eta_A (2 - eta_A)))` and
/// `F_min = 2 sqrt(d_A d_B (2 - eta_A) / (eta_A eta_B^2)) + d_B / eta_B`.
/// With `d_A = 0` or `d_B = 0` the optimum sits at `chi^2 -> 0`; the limit is
/// returned with `degenerate` set and no intensity.
pub fn optimal_pdc_chi(eta_a: f64, d_a: f64, det: &DetectorParams) -> Result<BoundResult> {
    det.validate()?;
    // Validate the herald parameters with a placeholder chi^2.
    HeraldedPdc::new(0.01, eta_a, d_a)?;
    let f_min = 2.0 * (d_a * det.dark * (2.0 - eta_a) / (eta_a * det.eta * det.eta)).sqrt()
        + det.dark / det.eta;
    let chi_sq = (d_a * det.dark / (eta_a * (2.0 - eta_a))).sqrt();
    let degenerate = chi_sq == 0.0;
    Ok(BoundResult {
        optimal_intensity: (!degenerate).then_some(chi_sq),
        degenerate,
        ..BoundResult::closed(f_min)
    })
}

/// Relative tolerance of the numeric intensity optimizations.
const INTENSITY_TOL: f64 = 1e-7;
/// Search window around the closed-form optimum, as a multiplicative factor.
const INTENSITY_WINDOW: f64 = 30.0;
/// Intensity used to evaluate degenerate (zero-intensity) optima numerically.
const DEGENERATE_CHI_SQ: f64 = 1e-10;

/// Minimizes the exact WCP bound over `mu`.
pub fn optimize_wcp_exact(det: &DetectorParams) -> Result<BoundResult> {
    let guess = optimal_wcp_mu(det)?.optimal_intensity.unwrap_or(1e-3);
    let lo = guess / INTENSITY_WINDOW;
    let hi = (guess * INTENSITY_WINDOW).min(0.5);
    let objective = |t: f64| {
        wcp_transmission_bound(t.exp(), det, Method::NumericExact)
            .map(|b| b.f_min)
            .unwrap_or(f64::NAN)
    };
    let (t, f_min) = numeric_minimize(objective, lo.ln(), hi.ln(), INTENSITY_TOL)?;
    Ok(BoundResult {
        f_min,
        optimal_intensity: Some(t.exp()),
        method: Method::NumericExact,
        degenerate: false,
        reach: None,
    })
}

/// Minimizes the exact PDC bound over `chi^2`.
pub fn optimize_pdc_exact(eta_a: f64, d_a: f64, det: &DetectorParams) -> Result<BoundResult> {
    let closed = optimal_pdc_chi(eta_a, d_a, det)?;
    let Some(guess) = closed.optimal_intensity else {
        let src = HeraldedPdc::new(DEGENERATE_CHI_SQ, eta_a, d_a)?;
        return Ok(BoundResult {
            degenerate: true,
            ..pdc_transmission_bound(&src, det, Method::NumericExact)?
        });
    };
    let lo = guess / INTENSITY_WINDOW;
    let hi = (guess * INTENSITY_WINDOW).min(0.5);
    let objective = |t: f64| {
        HeraldedPdc::new(t.exp(), eta_a, d_a)
            .and_then(|src| pdc_transmission_bound(&src, det, Method::NumericExact))
            .map(|b| b.f_min)
            .unwrap_or(f64::NAN)
    };
    let (t, f_min) = numeric_minimize(objective, lo.ln(), hi.ln(), INTENSITY_TOL)?;
    Ok(BoundResult {
        f_min,
        optimal_intensity: Some(t.exp()),
        method: Method::NumericExact,
        degenerate: false,
        reach: None,
    })
}

/// Minimum transmission for `source`, optionally optimizing its intensity,
/// translated into a maximum fiber length.
pub fn max_secure_distance(
    source: &SourceModel,
    det: &DetectorParams,
    beta_db_per_km: f64,
    c_db: f64,
    optimize_intensity: bool,
    method: Method,
) -> Result<BoundResult> {
    if !(beta_db_per_km >= 0.0 && beta_db_per_km.is_finite()) {
        return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta_db_per_km}")));
    }
    if !(c_db >= 0.0 && c_db.is_finite()) {
        return Err(Error::invalid("c", format!("must be finite and >= 0, got {c_db}")));
    }
    let bound = match (source, optimize_intensity, method) {
        (SourceModel::SinglePhoton, _, Method::ClosedForm) => min_transmission_single_photon(det)?,
        (SourceModel::SinglePhoton, _, Method::NumericExact) => min_transmission_exact(
            &PhotonNumberDistribution::single_photon(),
            det,
            &ExactCriterion::default(),
        )?,
        (SourceModel::WeakCoherent { .. }, true, Method::ClosedForm) => optimal_wcp_mu(det)?,
        (SourceModel::WeakCoherent { .. }, true, Method::NumericExact) => optimize_wcp_exact(det)?,
        (SourceModel::WeakCoherent { mu }, false, m) => wcp_transmission_bound(*mu, det, m)?,
        (SourceModel::HeraldedPdc(p), true, Method::ClosedForm) => optimal_pdc_chi(p.eta_a, p.d_a, det)?,
        (SourceModel::HeraldedPdc(p), true, Method::NumericExact) => {
            optimize_pdc_exact(p.eta_a, p.d_a, det)?
        }
        (SourceModel::HeraldedPdc(p), false, m) => pdc_transmission_bound(p, det, m)?,
    };
    Ok(bound.with_fiber(beta_db_per_km, c_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link_model::{link_budget_for, transmission, ChannelParams};
    use crate::photon_statistics::poisson_distribution;

    fn reference_det() -> DetectorParams {
        DetectorParams::new(0.11, 1e-5).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn error_criterion() {
        assert!(necessary_condition_error(1e-3, 0.0).secure);
        let v = necessary_condition_error(1e-3, 2.5e-4);
        assert!(!v.secure);
        assert_eq!(v.margin, 0.0);
        let d = 1e-5;
        let v = necessary_condition_error(2.0 * d, d / 2.0);
        assert!(!v.secure);
        assert_eq!(v.margin, 0.0);
    }

    #[test]
    fn multiphoton_criterion() {
        assert!(necessary_condition_multiphoton(1.0, 0.0).secure);
        assert!(!necessary_condition_multiphoton(3.47e-3, 4.68e-3).secure);
        assert!(!necessary_condition_multiphoton(0.3, 0.3).secure);
    }

    #[test]
    fn combined_criterion() {
        let v = combined_condition(1e-3, 0.0, 0.0);
        assert!(v.secure);
        assert_eq!(v.margin, 1e-3);
        assert!(!combined_condition(1e-3, 0.0, 1e-3).secure);
        assert_eq!(combined_condition(1e-3, 0.0, 0.0).criterion, Criterion::Combined);
    }

    #[test]
    fn combined_margin_near_zero_at_wcp_optimum() {
        let det = reference_det();
        let dist = poisson_distribution(4.5e-3, 20).unwrap();
        let b = link_budget_for(&dist, 0.0407, &det, &ErrorModel::default(), Composition::FirstOrder);
        let v = combined_condition(b.p_exp, det.dark / 2.0, dist.p_multi());
        assert!(v.margin.abs() < 0.05 * b.p_exp, "{v:?}");
    }

    #[test]
    fn single_photon_bound() {
        assert_eq!(min_transmission_single_photon(&DetectorParams::new(1.0, 1e-5).unwrap()).unwrap().f_min, 1e-5);
        let b = min_transmission_single_photon(&reference_det()).unwrap();
        assert!(rel(b.f_min, 9.0909e-5) < 1e-4);
        let b = min_transmission_single_photon(&DetectorParams::new(0.11, 0.0).unwrap()).unwrap();
        assert_eq!(b.f_min, 0.0);
        assert_eq!(b.reach_for_fiber(0.38, 5.0), Reach::Unlimited);
    }

    #[test]
    fn wcp_closed_form_values() {
        let b = wcp_transmission_bound(0.1, &reference_det(), Method::ClosedForm).unwrap();
        assert!(rel(b.f_min, 0.4554) < 1e-3);
        assert!(b.f_min > transmission(&ChannelParams::new(0.38, 5.0, 0.0).unwrap()));
        assert!(matches!(b.reach_for_fiber(0.38, 5.0), Reach::Unattainable { .. }));
        let b = wcp_transmission_bound(4.5e-3, &reference_det(), Method::ClosedForm).unwrap();
        assert!(rel(b.f_min, 0.0407) < 2e-3);
        assert!(matches!(
            wcp_transmission_bound(0.3, &reference_det(), Method::ClosedForm),
            Err(Error::ClosedFormOutOfRange { .. })
        ));
    }

    #[test]
    fn wcp_exact_matches_closed_form() {
        let closed = wcp_transmission_bound(4.5e-3, &reference_det(), Method::ClosedForm).unwrap();
        let exact = wcp_transmission_bound(4.5e-3, &reference_det(), Method::NumericExact).unwrap();
        assert!(rel(exact.f_min, closed.f_min) < 0.01);
        assert_eq!(exact.method, Method::NumericExact);
    }

    #[test]
    fn wcp_optimum() {
        let b = optimal_wcp_mu(&reference_det()).unwrap();
        assert!(rel(b.optimal_intensity.unwrap(), 4.4721e-3) < 1e-4);
        assert!(rel(b.f_min, 0.040656) < 1e-4);
        let b = optimal_wcp_mu(&DetectorParams::new(1.0, 1e-5).unwrap()).unwrap();
        assert!(rel(b.f_min, 4.4721e-3) < 1e-4);
        assert!(matches!(
            optimal_wcp_mu(&DetectorParams::new(0.11, 0.0).unwrap()),
            Err(Error::DegenerateOptimum(_))
        ));
    }

    #[test]
    fn wcp_optimum_is_stationary() {
        let det = reference_det();
        let (mu, _) = numeric_minimize(|mu| wcp_closed_form(mu, &det), 1e-6, 0.25, 1e-10).unwrap();
        let closed = optimal_wcp_mu(&det).unwrap().optimal_intensity.unwrap();
        assert!(rel(mu, closed) < 1e-6);
    }

    #[test]
    fn honest_detector_bound() {
        let b = honest_detector_wcp_bound(0.1).unwrap().with_fiber(0.38, 5.0);
        assert_eq!(b.f_min, 0.05);
        assert!((b.l_max().unwrap() - 21.1).abs() < 0.05);
        assert_eq!(honest_detector_wcp_bound(0.01).unwrap().f_min, 0.005);
        assert!(honest_detector_wcp_bound(0.3).is_err());
        assert!(honest_detector_wcp_bound(0.0).is_err());
    }

    #[test]
    fn pdc_values() {
        let det = reference_det();
        let b = optimal_pdc_chi(0.11, 1e-5, &det).unwrap();
        assert!(rel(b.f_min, 8.4457e-4) < 1e-4, "{}", b.f_min);
        // sqrt(1e-10 / (0.11 * 1.89))
        assert!(rel(b.optimal_intensity.unwrap(), 2.19317e-5) < 1e-5);
        let b = optimal_pdc_chi(1.0, 0.0, &det).unwrap();
        assert!(b.degenerate);
        assert_eq!(b.optimal_intensity, None);
        assert!(rel(b.f_min, 1e-5 / 0.11) < 1e-12);
    }

    #[test]
    fn pdc_closed_form_approaches_single_photon() {
        let det = reference_det();
        let src = HeraldedPdc::new(1e-9, 1.0, 0.0).unwrap();
        let b = pdc_transmission_bound(&src, &det, Method::ClosedForm).unwrap();
        assert!(rel(b.f_min, det.dark / det.eta) < 1e-3);
        let big = HeraldedPdc::new(0.2, 1.0, 0.0).unwrap();
        assert!(pdc_transmission_bound(&big, &det, Method::ClosedForm).is_err());
    }

    #[test]
    fn pdc_exact_at_optimum() {
        let det = reference_det();
        let closed = optimal_pdc_chi(0.11, 1e-5, &det).unwrap();
        let src = HeraldedPdc::new(closed.optimal_intensity.unwrap(), 0.11, 1e-5).unwrap();
        let exact = pdc_transmission_bound(&src, &det, Method::NumericExact).unwrap();
        assert!(rel(exact.f_min, closed.f_min) < 0.02, "{} vs {}", exact.f_min, closed.f_min);
    }

    #[test]
    fn pdc_optimum_is_stationary() {
        let det = reference_det();
        let src = HeraldedPdc::new(0.01, 0.11, 1e-5).unwrap();
        let (x, _) = numeric_minimize(
            |x| pdc_closed_form(&src.with_chi_sq(x), &det),
            1e-9,
            0.1,
            1e-10,
        )
        .unwrap();
        let closed = optimal_pdc_chi(0.11, 1e-5, &det).unwrap().optimal_intensity.unwrap();
        assert!(rel(x, closed) < 1e-6, "{x} vs {closed}");
    }

    #[test]
    fn distances() {
        let det = reference_det();
        let wcp = SourceModel::weak_coherent(0.01).unwrap();
        let b = max_secure_distance(&wcp, &det, 0.38, 5.0, true, Method::ClosedForm).unwrap();
        assert!((b.l_max().unwrap() - 23.5).abs() < 1.0);
        let pdc = SourceModel::HeraldedPdc(HeraldedPdc::new(0.01, 0.11, 1e-5).unwrap());
        let b = max_secure_distance(&pdc, &det, 0.38, 5.0, true, Method::ClosedForm).unwrap();
        assert!((b.l_max().unwrap() - 67.8).abs() < 1.0);
        let pdc = SourceModel::HeraldedPdc(HeraldedPdc::new(0.01, 1.0, 0.0).unwrap());
        let b = max_secure_distance(&pdc, &det, 0.38, 5.0, true, Method::ClosedForm).unwrap();
        assert!((b.l_max().unwrap() - 93.2).abs() < 1.0);
        assert!(max_secure_distance(&pdc, &det, -1.0, 5.0, true, Method::ClosedForm).is_err());
    }

    #[test]
    fn exact_optimizers_track_closed_forms() {
        let det = reference_det();
        let w = optimize_wcp_exact(&det).unwrap();
        assert!(rel(w.f_min, 0.040656) < 0.02, "{w:?}");
        assert!(rel(w.optimal_intensity.unwrap(), 4.4721e-3) < 0.05, "{w:?}");
        let p = optimize_pdc_exact(0.11, 1e-5, &det).unwrap();
        assert!(rel(p.f_min, 8.4457e-4) < 0.02, "{p:?}");
        let p = optimize_pdc_exact(1.0, 0.0, &det).unwrap();
        assert!(p.degenerate);
        assert!(rel(p.f_min, det.dark / det.eta) < 1e-3, "{p:?}");
    }

    #[test]
    fn exact_bound_infeasible_is_infinite() {
        let det = DetectorParams::new(0.05, 1e-5).unwrap();
        let b = wcp_transmission_bound(0.5, &det, Method::NumericExact).unwrap();
        assert!(b.f_min.is_infinite());
        assert!(!b.reach_for_fiber(0.38, 0.0).is_attainable());
    }

    #[test]
    fn exact_bound_rejects_non_monotone_margin() {
        let crit = ExactCriterion {
            err: ErrorModel::new(0.3).unwrap(),
            threshold: INTERCEPT_RESEND_THRESHOLD,
        };
        let r = min_transmission_exact(&PhotonNumberDistribution::single_photon(), &reference_det(), &crit);
        assert!(matches!(r, Err(Error::NonMonotoneMargin { .. })));
    }
}
