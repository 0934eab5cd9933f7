#![no_main]

use aggtree::sim::{parse_trace, TraceRecord};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = parse_trace(text) {
        for r in records {
            let line = r.to_string();
            let back: TraceRecord = line.parse().expect("rendered line parses");
            assert_eq!(back, r);
        }
    }
});
