#![no_main]

use libfuzzer_sys::fuzz_target;
use sprtree::io::{excursion_from_csv, excursion_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Whatever parses must survive a write/read round trip unchanged.
    if let Ok((e, meta)) = excursion_from_csv(text) {
        let again = excursion_to_csv(&e, &meta);
        let (back, _) = excursion_from_csv(&again).expect("own output parses");
        assert_eq!(back, e);
    }
});
