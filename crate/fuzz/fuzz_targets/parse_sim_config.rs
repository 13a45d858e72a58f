#![no_main]

use contrastive_vc::io::parse_sim_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = parse_sim_config(text) {
            for run in cfg.runs() {
                run.validate().expect("parsed runs validate");
            }
        }
    }
});
