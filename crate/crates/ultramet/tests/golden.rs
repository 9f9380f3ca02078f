//! Frozen outputs. These tests pin three things at once: the seeded
//! generators (any change to the RNG discipline shows up here first), the
//! report serialization, and the certificate file format the CLI emits.
//!
//! To regenerate after an intentional change:
//! GOLDEN_WRITE=1 cargo test -p ultramet --test golden

use std::fs;
use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use ultramet::gurarii::{nonexistence_certificate, GapOutcome};
use ultramet::magnitude::Magnitude;
use ultramet::scalar::FieldDescriptor;
use ultramet::space::WeightedSpace;
use ultramet::verify::generate::{gen_isometry, gen_space, gen_subspace, rat};
use ultramet::verify::run_suite;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check(name: &str, computed: &str) {
    let path = golden_path(name);
    if std::env::var_os("GOLDEN_WRITE").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, computed).unwrap();
        return;
    }
    let frozen = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(
        computed,
        frozen,
        "{name} drifted from its frozen form; if intentional, regenerate with GOLDEN_WRITE=1"
    );
}

#[test]
fn suite_report_is_byte_stable() {
    let report = run_suite("l-ort", 42, 12).unwrap();
    assert!(report.all_passed());
    check("l-ort-seed42.json", &report.canonical_json());
}

#[test]
fn generator_transcript_is_byte_stable() {
    let mut out = serde_json::Map::new();
    for (label, field) in [
        ("padic2", FieldDescriptor::padic(2).unwrap()),
        ("hahn5", FieldDescriptor::hahn(5).unwrap()),
    ] {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        rng.set_stream(0);
        let space = gen_space(&mut rng, &field, 4, true);
        let sub = gen_subspace(&mut rng, &space, 2).unwrap();
        let iso = gen_isometry(&mut rng, &space, 5).unwrap();
        out.insert(
            label.to_string(),
            serde_json::json!({
                "space": space,
                "span": sub.span(),
                "isometry_images": iso.base_images(),
            }),
        );
    }
    let computed = serde_json::to_string_pretty(&serde_json::Value::Object(out)).unwrap();
    check("generator-seed42.json", &computed);
}

#[test]
fn gap_certificate_file_form_is_byte_stable() {
    let field = FieldDescriptor::padic(2).unwrap();
    let e = WeightedSpace::standard(field, 1);
    let s1 = Magnitude::from_rational(&rat(3, 4)).unwrap();
    let cert = match nonexistence_certificate(&e, &s1, &rat(1, 4)).unwrap() {
        GapOutcome::Certificate(c) => c,
        GapOutcome::NoGap { .. } => unreachable!("pinned discrete instance has a gap"),
    };
    assert!(cert.reverify().unwrap());
    let computed = serde_json::to_string_pretty(&cert).unwrap();
    check("gap-p2-s34-eps14.json", &computed);
}
