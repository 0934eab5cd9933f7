#![no_main]

use aggtree_cli::config::parse_config_file;
use aggtree_cli::{resolve, Overrides};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = parse_config_file(text) {
        if let Ok(cfg) = resolve(Some(file), Overrides::default()) {
            assert!(cfg.trials >= 1);
        }
    }
});
