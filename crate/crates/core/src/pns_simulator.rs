//! Seeded Monte Carlo model of BB84 under photon-number-splitting and
//! intercept-resend attacks.
//!
//! Every pulse draws from its own ChaCha stream keyed by `(seed, pulse index)`,
//! so the result depends only on the configuration and seed, never on how the
//! pulses are split across worker threads.
//!
//! With Eve present the fiber is replaced by her lossless channel: she decides
//! which pulses reach Bob and with how many photons. Polarization is tracked
//! as a `(basis, bit)` label.

use std::num::NonZeroUsize;
use std::ops::AddAssign;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::link_model::{
    detection_prob_signal, link_budget, transmission, ChannelParams, Composition, DetectorParams,
    ErrorModel, LinkBudget,
};
use crate::photon_statistics::{
    heralded_pdc_distribution, threshold_click_probability, AmplitudeMode, PhotonNumberDistribution,
    SourceModel, DEFAULT_N_MAX,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveMode {
    Absent,
    /// Split one photon off every multi-photon pulse, block single photons.
    Pns,
    /// Measure in a random basis and resend.
    InterceptResend,
    /// PNS on multi-photon pulses, intercept-resend on forwarded single photons.
    PnsPlusInterceptResend,
}

impl EveMode {
    pub fn splits_photons(&self) -> bool {
        matches!(self, EveMode::Pns | EveMode::PnsPlusInterceptResend)
    }

    fn intercepts(&self) -> bool {
        matches!(self, EveMode::InterceptResend | EveMode::PnsPlusInterceptResend)
    }
}

/// Suppression of single-photon pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockPolicy {
    Fixed(f64),
    /// Chosen so Bob sees exactly the click rate of the honest lossy channel.
    AutoMatch,
}

/// What Eve sends on after splitting an `n`-photon pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Forwarding {
    /// The remaining `n - 1` photons.
    #[default]
    AllRemaining,
    /// A single photon.
    OnePhoton,
}

impl Forwarding {
    fn photons(&self, n: usize) -> usize {
        match self {
            Forwarding::AllRemaining => n - 1,
            Forwarding::OnePhoton => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveStrategy {
    pub mode: EveMode,
    pub single_photon_block: BlockPolicy,
    /// Fraction of eligible pulses that are intercepted and resent.
    pub intercept_fraction: f64,
    pub forwarding: Forwarding,
    /// Count Bob's dark-count clicks as known to Eve (the conservative
    /// assumption that she controls every error, dark counts included).
    pub credit_dark_counts: bool,
}

impl EveStrategy {
    pub fn absent() -> Self {
        Self {
            mode: EveMode::Absent,
            single_photon_block: BlockPolicy::Fixed(0.0),
            intercept_fraction: 0.0,
            forwarding: Forwarding::AllRemaining,
            credit_dark_counts: true,
        }
    }

    pub fn pns_auto_match() -> Self {
        Self {
            mode: EveMode::Pns,
            single_photon_block: BlockPolicy::AutoMatch,
            ..Self::absent()
        }
    }

    pub fn intercept_resend(fraction: f64) -> Self {
        Self {
            mode: EveMode::InterceptResend,
            intercept_fraction: fraction,
            ..Self::absent()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.intercept_fraction) {
            return Err(Error::invalid(
                "intercept",
                format!("must lie in [0, 1], got {}", self.intercept_fraction),
            ));
        }
        match self.single_photon_block {
            BlockPolicy::Fixed(q) if !(0.0..=1.0).contains(&q) => Err(Error::invalid(
                "block",
                format!("must lie in [0, 1], got {q}"),
            )),
            BlockPolicy::AutoMatch if !self.mode.splits_photons() => Err(Error::invalid(
                "block",
                "auto matching needs a photon-number-splitting mode",
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_pulses: u64,
    pub seed: u64,
    pub source: SourceModel,
    pub channel: ChannelParams,
    pub bob: DetectorParams,
    pub error_model: ErrorModel,
    pub eve: EveStrategy,
    /// Eve can make Bob's detector fire with certainty on forwarded photons.
    pub eve_controls_bob_efficiency: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 {
            return Err(Error::invalid("pulses", "must be >= 1"));
        }
        self.source.validate()?;
        self.channel.validate()?;
        self.bob.validate()?;
        self.error_model.validate()?;
        self.eve.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchStatus {
    Matched,
    /// Even forwarding every single photon leaves Bob short of clicks.
    InfeasibleDeficit,
    /// Multi-photon pulses alone over-deliver; some of them are blocked too.
    MultiPhotonSurplus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockingPlan {
    /// Probability of blocking a single-photon pulse.
    pub single_block: f64,
    /// Probability of blocking a (split) multi-photon pulse.
    pub multi_block: f64,
    pub status: MatchStatus,
}

/// Blocking probabilities that make Bob's signal click rate under a PNS attack
/// equal the honest rate `sum_n p_n (1 - (1 - f eta)^n)`.
pub fn auto_match_block_probability(
    dist: &PhotonNumberDistribution,
    f: f64,
    eta: f64,
    eve_controls_bob_efficiency: bool,
) -> BlockingPlan {
    auto_match_with_forwarding(dist, f, eta, eve_controls_bob_efficiency, Forwarding::AllRemaining)
}

pub fn auto_match_with_forwarding(
    dist: &PhotonNumberDistribution,
    f: f64,
    eta: f64,
    eve_controls_bob_efficiency: bool,
    forwarding: Forwarding,
) -> BlockingPlan {
    let detect = |k: usize| {
        if eve_controls_bob_efficiency {
            1.0
        } else {
            threshold_click_probability(k, eta, 0.0)
        }
    };
    let honest = detection_prob_signal(dist, f, eta);
    let multi: f64 = dist
        .probs()
        .iter()
        .enumerate()
        .skip(2)
        .map(|(n, p)| p * detect(forwarding.photons(n)))
        .sum();
    let single = dist.p1() * detect(1);

    if multi >= honest {
        BlockingPlan {
            single_block: 1.0,
            multi_block: if multi > 0.0 { 1.0 - honest / multi } else { 0.0 },
            status: MatchStatus::MultiPhotonSurplus,
        }
    } else if multi + single < honest {
        BlockingPlan {
            single_block: 0.0,
            multi_block: 0.0,
            status: MatchStatus::InfeasibleDeficit,
        }
    } else {
        BlockingPlan {
            single_block: (1.0 - (honest - multi) / single).clamp(0.0, 1.0),
            multi_block: 0.0,
            status: MatchStatus::Matched,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub emitted: u64,
    /// Slots in which Alice's source produced a usable signal (the herald
    /// fired for PDC; every slot otherwise).
    pub heralded: u64,
    pub clicks: u64,
    pub sifted_bits: u64,
    pub error_bits: u64,
    pub eve_known_bits: u64,
    /// Clicks per heralded slot.
    pub p_exp_empirical: f64,
    pub qber: f64,
    pub eve_known_fraction: f64,
    pub p_exp_stderr: f64,
    pub qber_stderr: f64,
    /// Blocking used by Eve, when she was present.
    pub blocking: Option<BlockingPlan>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    emitted: u64,
    heralded: u64,
    clicks: u64,
    sifted: u64,
    errors: u64,
    eve_known: u64,
}

impl AddAssign for Tally {
    fn add_assign(&mut self, o: Self) {
        self.emitted += o.emitted;
        self.heralded += o.heralded;
        self.clicks += o.clicks;
        self.sifted += o.sifted;
        self.errors += o.errors;
        self.eve_known += o.eve_known;
    }
}

/// Everything a worker needs, resolved once per run.
struct Prepared {
    cfg: SimConfig,
    cdf: Vec<f64>,
    herald_prob: f64,
    honest_survival: f64,
    plan: BlockingPlan,
    base_rng: ChaCha8Rng,
}

impl Prepared {
    fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let (dist, herald_prob) = match &cfg.source {
            SourceModel::HeraldedPdc(p) => {
                let h = heralded_pdc_distribution(p, DEFAULT_N_MAX, AmplitudeMode::Exact)?;
                (h.dist, h.heralding_probability)
            }
            other => (other.distribution()?, 1.0),
        };
        let f = transmission(&cfg.channel);
        let plan = match cfg.eve.single_photon_block {
            BlockPolicy::AutoMatch => auto_match_with_forwarding(
                &dist,
                f,
                cfg.bob.eta,
                cfg.eve_controls_bob_efficiency,
                cfg.eve.forwarding,
            ),
            BlockPolicy::Fixed(q) => BlockingPlan {
                single_block: q,
                multi_block: 0.0,
                status: MatchStatus::Matched,
            },
        };
        let mut cdf: Vec<f64> = dist
            .probs()
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        Ok(Self {
            cfg: *cfg,
            cdf,
            herald_prob,
            honest_survival: f * cfg.bob.eta,
            plan,
            base_rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        })
    }

    fn run_range(&self, start: u64, end: u64) -> Tally {
        let mut t = Tally::default();
        for i in start..end {
            self.pulse(i, &mut t);
        }
        t
    }

    fn pulse(&self, index: u64, t: &mut Tally) {
        let cfg = &self.cfg;
        let mut rng = self.base_rng.clone();
        rng.set_stream(index);
        t.emitted += 1;
        if self.herald_prob < 1.0 && rng.gen::<f64>() >= self.herald_prob {
            return;
        }
        t.heralded += 1;

        let alice_basis: bool = rng.gen();
        let alice_bit: bool = rng.gen();
        let bob_basis: bool = rng.gen();
        let u: f64 = rng.gen();
        let n = self.cdf.partition_point(|&c| c <= u);

        let mut eve_knows = false;
        // (photons reaching Bob's detector, basis, bit) after the channel or Eve.
        let mut arriving: Option<(usize, bool, bool)> = None;
        let eve = &cfg.eve;
        if eve.mode == EveMode::Absent {
            if n > 0 {
                arriving = Some((n, alice_basis, alice_bit));
            }
        } else if n >= 2 && eve.mode.splits_photons() {
            eve_knows = true;
            if rng.gen::<f64>() >= self.plan.multi_block {
                arriving = Some((eve.forwarding.photons(n), alice_basis, alice_bit));
            }
        } else if n >= 1 {
            let blocked = n == 1 && rng.gen::<f64>() < self.plan.single_block;
            if !blocked {
                if eve.mode.intercepts() && rng.gen::<f64>() < eve.intercept_fraction {
                    let eve_basis: bool = rng.gen();
                    let eve_bit = if eve_basis == alice_basis {
                        eve_knows = true;
                        alice_bit
                    } else {
                        rng.gen()
                    };
                    arriving = Some((1, eve_basis, eve_bit));
                } else {
                    arriving = Some((n, alice_basis, alice_bit));
                }
            }
        }

        let mut bob_bit = false;
        let mut signal_click = false;
        if let Some((k, basis, bit)) = arriving {
            let p_click = match (eve.mode, cfg.eve_controls_bob_efficiency) {
                (EveMode::Absent, _) => threshold_click_probability(k, self.honest_survival, 0.0),
                (_, true) => 1.0,
                (_, false) => threshold_click_probability(k, cfg.bob.eta, 0.0),
            };
            if rng.gen::<f64>() < p_click {
                signal_click = true;
                bob_bit = if basis == bob_basis {
                    bit ^ (rng.gen::<f64>() < cfg.error_model.p_e_signal)
                } else {
                    rng.gen()
                };
            }
        }
        let dark = rng.gen::<f64>() < cfg.bob.dark;
        if !signal_click && dark {
            bob_bit = rng.gen();
            eve_knows |= eve.mode != EveMode::Absent && eve.credit_dark_counts;
        }
        if !(signal_click || dark) {
            return;
        }
        t.clicks += 1;
        if bob_basis == alice_basis {
            t.sifted += 1;
            t.errors += u64::from(bob_bit != alice_bit);
            t.eve_known += u64::from(eve_knows);
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn binomial_stderr(p: f64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

/// Runs the simulation on all available cores.
pub fn run_simulation(config: &SimConfig) -> Result<SimResult> {
    let shards = thread::available_parallelism().map_or(1, NonZeroUsize::get);
    run_simulation_sharded(config, shards)
}

/// Runs the simulation split into `shards` contiguous pulse ranges, one thread
/// each. The result is identical for every shard count.
pub fn run_simulation_sharded(config: &SimConfig, shards: usize) -> Result<SimResult> {
    let prep = Prepared::new(config)?;
    let n = config.n_pulses;
    let shards = (shards.max(1) as u64).min(n);
    let bounds: Vec<(u64, u64)> = (0..shards)
        .map(|s| (n * s / shards, n * (s + 1) / shards))
        .collect();

    let mut total = Tally::default();
    if shards == 1 {
        total = prep.run_range(0, n);
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = bounds
                .iter()
                .map(|&(a, b)| {
                    let prep = &prep;
                    scope.spawn(move || prep.run_range(a, b))
                })
                .collect();
            for h in handles {
                total += h.join().expect("simulation worker panicked");
            }
        });
    }

    let p_exp = ratio(total.clicks, total.heralded);
    let qber = ratio(total.errors, total.sifted);
    Ok(SimResult {
        emitted: total.emitted,
        heralded: total.heralded,
        clicks: total.clicks,
        sifted_bits: total.sifted,
        error_bits: total.errors,
        eve_known_bits: total.eve_known,
        p_exp_empirical: p_exp,
        qber,
        eve_known_fraction: ratio(total.eve_known, total.sifted),
        p_exp_stderr: binomial_stderr(p_exp, total.heralded),
        qber_stderr: binomial_stderr(qber, total.sifted),
        blocking: config.eve.mode.splits_photons().then_some(prep.plan),
    })
}

/// Exact link budget an honest-channel simulation should reproduce.
pub fn theoretical_reference(config: &SimConfig) -> Result<LinkBudget> {
    if config.eve.mode != EveMode::Absent {
        return Err(Error::EavesdropperPresent);
    }
    config.validate()?;
    link_budget(
        &config.source,
        &config.channel,
        &config.bob,
        &config.error_model,
        Composition::Exact,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon_statistics::poisson_distribution;

    fn ideal(n_pulses: u64) -> SimConfig {
        SimConfig {
            n_pulses,
            seed: 7,
            source: SourceModel::SinglePhoton,
            channel: ChannelParams::new(0.0, 0.0, 0.0).unwrap(),
            bob: DetectorParams::new(1.0, 0.0).unwrap(),
            error_model: ErrorModel::default(),
            eve: EveStrategy::absent(),
            eve_controls_bob_efficiency: false,
        }
    }

    #[test]
    fn ideal_channel_is_error_free() {
        let r = run_simulation_sharded(&ideal(10_000), 3).unwrap();
        assert_eq!(r.clicks, 10_000);
        assert_eq!(r.p_exp_empirical, 1.0);
        assert_eq!(r.qber, 0.0);
        assert_eq!(r.eve_known_fraction, 0.0);
        assert!(r.blocking.is_none());
    }

    #[test]
    fn auto_match_single_photon() {
        let plan = auto_match_block_probability(&PhotonNumberDistribution::single_photon(), 0.5, 0.5, true);
        assert_eq!(plan.status, MatchStatus::Matched);
        assert!((plan.single_block - 0.75).abs() < 1e-15);
    }

    #[test]
    fn auto_match_surplus_and_deficit() {
        let p = poisson_distribution(0.1, 20).unwrap();
        let plan = auto_match_block_probability(&p, 0.316, 0.11, true);
        assert_eq!(plan.status, MatchStatus::MultiPhotonSurplus);
        assert_eq!(plan.single_block, 1.0);
        let honest = detection_prob_signal(&p, 0.316, 0.11);
        assert!(((1.0 - plan.multi_block) * p.p_multi() - honest).abs() < 1e-15);

        // Honest detector: forwarded pairs only fire with 1 - (1 - eta)^(n-1).
        let plan = auto_match_block_probability(&p, 0.316, 0.11, false);
        assert_eq!(plan.status, MatchStatus::Matched);
        assert!(plan.single_block > 0.0 && plan.single_block < 1.0);

        // Without control of eta_B, the lost photon of each split pulse costs clicks.
        let short = auto_match_block_probability(&p, 1.0, 0.5, false);
        assert_eq!(short.status, MatchStatus::InfeasibleDeficit);
    }

    #[test]
    fn reference_requires_honest_channel() {
        let mut cfg = ideal(10);
        assert_eq!(theoretical_reference(&cfg).unwrap().p_exp, 1.0);
        cfg.eve = EveStrategy::pns_auto_match();
        assert_eq!(theoretical_reference(&cfg), Err(Error::EavesdropperPresent));
    }

    #[test]
    fn config_validation() {
        let mut cfg = ideal(0);
        assert!(run_simulation(&cfg).is_err());
        cfg.n_pulses = 10;
        cfg.eve = EveStrategy {
            single_photon_block: BlockPolicy::AutoMatch,
            ..EveStrategy::intercept_resend(1.0)
        };
        assert!(run_simulation(&cfg).is_err());
        cfg.eve = EveStrategy::intercept_resend(1.5);
        assert!(run_simulation(&cfg).is_err());
    }

    #[test]
    fn shard_count_does_not_change_result() {
        let mut cfg = ideal(20_001);
        cfg.source = SourceModel::weak_coherent(0.3).unwrap();
        cfg.bob = DetectorParams::new(0.4, 0.01).unwrap();
        cfg.error_model = ErrorModel::new(0.05).unwrap();
        let one = run_simulation_sharded(&cfg, 1).unwrap();
        for shards in [2, 5, 16] {
            assert_eq!(run_simulation_sharded(&cfg, shards).unwrap(), one);
        }
    }
}
