#![no_main]

use aggtree::topology::{parse_dump, write_dump};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = parse_dump(text) {
        let dumped = write_dump(&g);
        let again = parse_dump(&dumped).expect("dump output parses");
        assert_eq!(again, g);
        assert_eq!(write_dump(&again), dumped);
    }
});
