//! Subspace files: the written span must reparse verbatim, and the reduced
//! base must stay inside the parsed subspace.

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
        if let Ok(sub) = io::parse_subspace(text, space) {
            let printed = io::subspace_json(&sub);
            let again = io::parse_subspace(&printed, space).expect("printed span must reparse");
            assert_eq!(again.span(), sub.span());
            if let Ok(reduced) = sub.reduced() {
                for b in &reduced.base {
                    // truncated series may leave membership undecidable; a
                    // decided answer must be yes
                    if let Ok(inside) = sub.contains(b) {
                        assert!(inside);
                    }
                }
            }
        }
    }
});
