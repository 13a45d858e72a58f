#![no_main]

use contrastive_vc::io::parse_query_file;
use contrastive_vc::realize::{realize, NumericConfig, RealizeConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = parse_query_file(text) else {
        return;
    };
    let (Some(class), Some(labels)) = (file.class, file.labels) else {
        return;
    };
    if file.queries.n() > 8 || file.queries.len() > 16 {
        return;
    }
    let cfg = RealizeConfig {
        line_cap: 6,
        tree_cap: 5,
        branch_cap: 1 << 8,
        multi_cap: 8,
        numeric: NumericConfig {
            restarts: 2,
            iterations: 50,
            ..NumericConfig::default()
        },
        ..RealizeConfig::default()
    };
    if let Ok(verdict) = realize(&file.queries, &labels, class, &cfg) {
        if let Some(w) = verdict.witness() {
            assert!(w.satisfies(&file.queries, &labels));
        }
    }
});
