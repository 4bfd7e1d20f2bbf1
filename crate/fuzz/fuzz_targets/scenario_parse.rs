//! Scenario TOML: decoding and validation must not panic, and anything that
//! validates must survive a serialize/parse round trip.

#![no_main]

use fbsim::workload::{decode_scenario, parse_scenario, serialize_scenario};
use libfuzzer_sys::fuzz_target;

const MAX_INPUT: usize = 64 * 1024;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_INPUT {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = decode_scenario(text, None);
    if let Ok(cfg) = parse_scenario(text, None) {
        let again = serialize_scenario(&cfg);
        let back = parse_scenario(&again, None).expect("serialized scenario parses");
        assert_eq!(back, cfg);
    }
});
