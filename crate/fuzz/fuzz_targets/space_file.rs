//! Space files: any accepted file serializes back to an equal space.

#![no_main]

use libfuzzer_sys::fuzz_target;
use ultramet::io;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(space) = io::parse_space(text) {
        let printed = io::space_json(&space);
        let again = io::parse_space(&printed).expect("printed space must reparse");
        assert_eq!(again, space);
    }
});
