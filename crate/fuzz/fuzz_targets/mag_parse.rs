//! Magnitude grammar: anything accepted must print back to a string that
//! reparses to the same value.

#![no_main]

use libfuzzer_sys::fuzz_target;
use ultramet::magnitude::Magnitude;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = text.parse::<Magnitude>() {
        let printed = m.to_string();
        let again: Magnitude = printed.parse().expect("printed magnitude must reparse");
        assert_eq!(again, m);
    }
});
