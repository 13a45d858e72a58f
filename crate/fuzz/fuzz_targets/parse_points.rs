#![no_main]

use contrastive_vc::io::parse_points;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(points) = parse_points(text) {
            assert!(!points.is_empty());
            assert!(points.iter().all(|p| p.len() == points[0].len()));
        }
    }
});
