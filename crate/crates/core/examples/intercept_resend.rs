use qkd_limits::link_model::{ChannelParams, DetectorParams, ErrorModel};
use qkd_limits::photon_statistics::SourceModel;
use qkd_limits::pns_simulator::{run_simulation, EveStrategy, SimConfig};

fn main() {
    for fraction in [0.0, 0.25, 0.5, 1.0] {
        let config = SimConfig {
            n_pulses: 200_000,
            seed: 1,
            source: SourceModel::SinglePhoton,
            channel: ChannelParams::new(0.0, 0.0, 0.0).unwrap(),
            bob: DetectorParams::new(1.0, 0.0).unwrap(),
            error_model: ErrorModel::default(),
            eve: if fraction > 0.0 { EveStrategy::intercept_resend(fraction) } else { EveStrategy::absent() },
            eve_controls_bob_efficiency: false,
        };
        let r = run_simulation(&config).unwrap();
        println!(
            "intercepted {fraction:<4}  qber = {:.4} ± {:.4}  eve knows {:.4}",
            r.qber, r.qber_stderr, r.eve_known_fraction
        );
    }
}
