// Heralded downconversion: photon statistics after the herald and the best achievable bound.

use qkd_limits::link_model::DetectorParams;
use qkd_limits::photon_statistics::{heralded_pdc_distribution, AmplitudeMode, HeraldedPdc};
use qkd_limits::security_bounds::optimal_pdc_chi;

fn main() {
    let src = HeraldedPdc::new(0.01, 0.11, 1e-5).unwrap();
    for mode in [AmplitudeMode::Exact, AmplitudeMode::FourthOrderTaylor] {
        let h = heralded_pdc_distribution(&src, 20, mode).unwrap();
        println!(
            "{mode:?}: N = {:.4e}  p0 = {:.4e}  p1 = {:.6}  p_multi = {:.4e}",
            h.heralding_probability,
            h.dist.p0(),
            h.dist.p1(),
            h.dist.p_multi()
        );
    }

    let bob = DetectorParams::new(0.11, 1e-5).unwrap();
    for (eta_a, d_a) in [(0.11, 1e-5), (1.0, 0.0)] {
        let b = optimal_pdc_chi(eta_a, d_a, &bob).unwrap().with_fiber(0.38, 5.0);
        let chi2 = b.optimal_intensity.map_or("-> 0".to_owned(), |x| format!("{x:.4e}"));
        println!(
            "eta_A = {eta_a}, d_A = {d_a}: chi^2* = {chi2}  F_min = {:.4e}  l_max = {:.1} km",
            b.f_min,
            b.l_max().unwrap()
        );
    }
}
