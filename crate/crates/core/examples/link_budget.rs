// Click and error probabilities of a weak-pulse link over increasing fiber lengths.

use qkd_limits::link_model::{link_budget, ChannelParams, Composition, DetectorParams, ErrorModel};
use qkd_limits::photon_statistics::SourceModel;

fn main() {
    let source = SourceModel::weak_coherent(0.1).unwrap();
    let bob = DetectorParams::new(0.11, 1e-5).unwrap();
    let err = ErrorModel::new(0.01).unwrap();

    println!("{:>6} {:>11} {:>11} {:>11} {:>11}", "km", "F", "p_exp", "e", "qber");
    for km in [0.0, 10.0, 20.0, 40.0, 80.0] {
        let channel = ChannelParams::new(0.38, 5.0, km).unwrap();
        let b = link_budget(&source, &channel, &bob, &err, Composition::Exact).unwrap();
        println!(
            "{km:>6} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e}",
            b.f, b.p_exp, b.e, b.p_e_sifted
        );
    }
}
