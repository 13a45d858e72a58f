use contrastive_vc::bounds::vc_upper_crossover;
use contrastive_vc::realize::{NumericConfig, RealizeConfig};
use contrastive_vc::shatter::{is_shattered, vc_search, ShatterConfig, UnknownPolicy};
use contrastive_vc::HypothesisClass;

#[test]
fn arbitrary_search_reaches_the_construction_size() {
    let cfg = ShatterConfig::default();
    let n = 4;
    let r = vc_search(n, HypothesisClass::Arbitrary, 12, 3, 0, &cfg).unwrap();
    assert!(r.size() >= (n - 1) * (n - 2) / 2);
    assert!(r.size() as u64 <= vc_upper_crossover(n, HypothesisClass::Arbitrary).unwrap());
    assert!(is_shattered(&r.best, HypothesisClass::Arbitrary, &cfg).unwrap().shattered);
}

#[test]
fn plane_search_reaches_the_construction_size() {
    let class = HypothesisClass::Lp { p: 2, d: 2 };
    let cfg = ShatterConfig {
        unknown: Some(UnknownPolicy::TreatAsRefuted),
        realize: RealizeConfig {
            numeric: NumericConfig {
                restarts: 8,
                iterations: 600,
                ..NumericConfig::default()
            },
            ..RealizeConfig::default()
        },
        ..ShatterConfig::default()
    };
    let (n, d) = (5, 2);
    let r = vc_search(n, class, 4, 1, 0, &cfg).unwrap();
    assert!(r.size() >= (d - 1) * (n - d));
    assert!(r.size() as u64 <= vc_upper_crossover(n, class).unwrap());
}
