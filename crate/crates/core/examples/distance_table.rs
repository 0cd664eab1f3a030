use qkd_limits::link_model::DetectorParams;
use qkd_limits::photon_statistics::{HeraldedPdc, SourceModel};
use qkd_limits::security_bounds::{max_secure_distance, Method, Reach};

fn main() {
    let bob = DetectorParams::new(0.11, 1e-5).unwrap();
    let sources = [
        ("single photon", SourceModel::SinglePhoton, false),
        ("wcp mu=0.1", SourceModel::weak_coherent(0.1).unwrap(), false),
        ("wcp optimal", SourceModel::weak_coherent(0.01).unwrap(), true),
        ("pdc optimal", SourceModel::HeraldedPdc(HeraldedPdc::new(0.01, 0.11, 1e-5).unwrap()), true),
    ];
    for method in [Method::ClosedForm, Method::NumericExact] {
        println!("{}", method.as_str());
        for (name, source, optimize) in &sources {
            let b = max_secure_distance(source, &bob, 0.38, 5.0, *optimize, method).unwrap();
            let reach = match b.reach.unwrap() {
                Reach::Km(l) => format!("{l:.1} km"),
                Reach::Unlimited => "unlimited".into(),
                Reach::Unattainable { .. } => "insecure at any length".into(),
            };
            println!("  {name:<14} F_min = {:<11.4e} {reach}", b.f_min);
        }
    }
}
