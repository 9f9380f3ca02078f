//! Scalar grammars on both backends, plus the context-free parser. Accepted
//! values must round-trip through their printed form.

#![no_main]

use libfuzzer_sys::fuzz_target;
use ultramet::scalar::{parse_scalar_any, FieldDescriptor};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };

    let fields = [
        FieldDescriptor::padic(2).unwrap(),
        FieldDescriptor::padic(97).unwrap(),
        FieldDescriptor::hahn(2).unwrap(),
        FieldDescriptor::hahn_with_tail(5, num::BigRational::new(7.into(), 2.into())).unwrap(),
    ];
    for field in &fields {
        if let Ok(s) = field.parse_scalar(text) {
            let printed = s.to_string();
            let again = field.parse_scalar(&printed).expect("printed scalar must reparse");
            assert_eq!(again, s);
        }
    }

    if let Ok(s) = parse_scalar_any(text) {
        let printed = s.to_string();
        let again = parse_scalar_any(&printed).expect("printed scalar must reparse");
        assert_eq!(again, s);
    }
});
