// Photon-number splitting against weak pulses at zero fiber length.
//
// With mu = 0.1 there are more multi-photon pulses than honest clicks, so Eve
// blocks every single photon and still reproduces Bob's click rate.

use qkd_limits::link_model::{ChannelParams, DetectorParams, ErrorModel};
use qkd_limits::photon_statistics::SourceModel;
use qkd_limits::pns_simulator::{run_simulation, EveStrategy, SimConfig};

fn main() {
    let honest = SimConfig {
        n_pulses: 1_000_000,
        seed: 2024,
        source: SourceModel::weak_coherent(0.1).unwrap(),
        channel: ChannelParams::new(0.38, 5.0, 0.0).unwrap(),
        bob: DetectorParams::new(0.11, 1e-5).unwrap(),
        error_model: ErrorModel::default(),
        eve: EveStrategy::absent(),
        eve_controls_bob_efficiency: true,
    };
    let attacked = SimConfig { eve: EveStrategy::pns_auto_match(), ..honest };

    for (name, config) in [("no eve", honest), ("pns", attacked)] {
        let r = run_simulation(&config).unwrap();
        println!(
            "{name:<7} clicks/slot = {:.4e} ± {:.1e}  qber = {:.2e}  eve knows {:.3} of the sifted key",
            r.p_exp_empirical, r.p_exp_stderr, r.qber, r.eve_known_fraction
        );
        if let Some(plan) = r.blocking {
            println!("        blocking: single {:.3}, multi {:.3} ({:?})", plan.single_block, plan.multi_block, plan.status);
        }
    }
}
