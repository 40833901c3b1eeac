#![no_main]

use libfuzzer_sys::fuzz_target;

// Radius distributions: parse/validate without panics; accepted tables
// round-trip and validated specs produce Markov operators.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 1 << 12 {
        return;
    }
    if let Ok(sigma) = treejump::json::parse_sigma(s) {
        let emitted = treejump::json::to_string(&treejump::json::emit_sigma(&sigma), false);
        let again = treejump::json::parse_sigma(&emitted).expect("round trip");
        assert_eq!(again, sigma);
        let tree = treejump::fixtures::b2_tree();
        let phi = treejump::fixtures::b2_phi(&tree);
        let mu = treejump::walk::BoundaryMeasure::uniform(&tree);
        if let Ok(spec) = treejump::boundary::JumpProcessSpec::new(tree, phi, mu, sigma) {
            let op = spec.transition_operator(1.0).expect("validated specs step");
            assert!(op.markov_defect() < 1e-9);
        }
    }
});
