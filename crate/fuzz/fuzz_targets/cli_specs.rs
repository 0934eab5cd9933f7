#![no_main]

use aggtree_cli::config::{
    parse_exec, parse_fail_list, parse_fail_random, parse_rgg_spec, parse_trace_level,
};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = parse_rgg_spec(text) {
        assert!(p.n >= 2 && p.radius >= 0.0 && p.radius.is_finite());
    }
    if let Ok(ids) = parse_fail_list(text) {
        assert!(!ids.is_empty());
    }
    let _ = parse_fail_random(text);
    let _ = parse_exec(text);
    let _ = parse_trace_level(text);
});
