// Optimal weak-pulse intensity, closed form against the exact bisection bound.

use qkd_limits::link_model::DetectorParams;
use qkd_limits::security_bounds::{honest_detector_wcp_bound, optimal_wcp_mu, optimize_wcp_exact};

fn main() {
    let bob = DetectorParams::new(0.11, 1e-5).unwrap();

    let closed = optimal_wcp_mu(&bob).unwrap().with_fiber(0.38, 5.0);
    let exact = optimize_wcp_exact(&bob).unwrap().with_fiber(0.38, 5.0);
    for (name, b) in [("closed form", closed), ("exact", exact)] {
        println!(
            "{name:<12} mu* = {:.4e}  F_min = {:.4e}  l_max = {:.2} km",
            b.optimal_intensity.unwrap(),
            b.f_min,
            b.l_max().unwrap()
        );
    }

    // Fixed mu = 0.1 is insecure at every length unless Bob's efficiency is trusted.
    let trusted = honest_detector_wcp_bound(0.1).unwrap().with_fiber(0.38, 5.0);
    println!("mu = 0.1 with trusted detector: F_min = {}  l_max = {:.2} km", trusted.f_min, trusted.l_max().unwrap());
}
