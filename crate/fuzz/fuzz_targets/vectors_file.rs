//! Vectors files against fixed spaces on both backends; accepted rows must
//! round-trip through the writer.

#![no_main]

use libfuzzer_sys::fuzz_target;
use std::sync::LazyLock;
use ultramet::io;
use ultramet::space::WeightedSpace;

static SPACES: LazyLock<Vec<WeightedSpace>> = LazyLock::new(|| {
    vec![
        io::parse_space(
            r#"{"field":{"backend":"padic","prime":2},"weights":["1","2^-1/2","2^1"]}"#,
        )
        .unwrap(),
        io::parse_space(
            r#"{"field":{"backend":"hahn","prime":3,"tail_order":"5"},"weights":["1","3^-1/2"]}"#,
        )
        .unwrap(),
    ]
});

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for space in SPACES.iter() {
        if let Ok(vectors) = io::parse_vectors(text, space) {
            let printed = io::vectors_json(&vectors);
            let again = io::parse_vectors(&printed, space).expect("printed vectors must reparse");
            assert_eq!(again, vectors);
        }
    }
});
