// An ideal single-photon source is limited only by Bob's dark counts: F > d/eta.

use qkd_limits::link_model::DetectorParams;
use qkd_limits::security_bounds::{max_secure_distance, Method};
use qkd_limits::photon_statistics::SourceModel;

fn main() {
    for (eta, dark) in [(0.11, 1e-5), (0.5, 1e-6), (0.9, 1e-8)] {
        let bob = DetectorParams::new(eta, dark).unwrap();
        let b = max_secure_distance(&SourceModel::SinglePhoton, &bob, 0.38, 5.0, false, Method::ClosedForm)
            .unwrap();
        println!(
            "eta_B = {eta:<4} d_B = {dark:<6e}  F_min = {:.4e}  l_max = {:.1} km",
            b.f_min,
            b.l_max().unwrap_or(0.0)
        );
    }
}
