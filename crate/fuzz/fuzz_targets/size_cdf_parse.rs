//! Flow-size CDF text: parsing must not panic, and a parsed CDF only ever
//! samples sizes it lists.

#![no_main]

use fbsim::workload::parse_cdf;
use libfuzzer_sys::fuzz_target;
use rand::SeedableRng;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cdf) = parse_cdf(text) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(data.len() as u64);
        for _ in 0..8 {
            let s = cdf.sample(&mut rng);
            assert!(cdf.points().iter().any(|&(size, _)| size == s), "sampled {s}");
        }
        assert!(cdf.mean().is_finite());
    }
});
