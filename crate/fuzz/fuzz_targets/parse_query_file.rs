#![no_main]

use contrastive_vc::io::parse_query_file;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = parse_query_file(text) {
            let again = parse_query_file(&file.to_json().to_string()).expect("re-parse");
            assert_eq!(again, file);
        }
    }
});
