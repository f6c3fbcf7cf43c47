#![no_main]

use libfuzzer_sys::fuzz_target;
use sprtree::io::{tree_from_json, tree_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((t, meta)) = tree_from_json(text) {
        let again = tree_to_json(&t, meta);
        let (back, _) = tree_from_json(&again).expect("own output parses");
        assert_eq!(back, t);
        let _ = t.diameter();
    }
});
