//! α and rational literals: no panics, and accepted α values print back to
//! the same fraction.

#![no_main]

use fbsim::fluid::parse_rational;
use fbsim::workload::{format_alpha, parse_alpha};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 256 {
        return;
    }
    if let Ok(a) = parse_alpha(text) {
        assert_eq!(parse_alpha(&format_alpha(a)), Ok(a));
    }
    let _ = parse_rational(text);
});
