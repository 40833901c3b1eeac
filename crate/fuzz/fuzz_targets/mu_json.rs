#![no_main]

use libfuzzer_sys::fuzz_target;

// Boundary measures against a fixed tree: parse/validate without panics;
// accepted measures have full support and exact total mass 1, so the
// reconstruction of a walk from (phi, mu) must succeed.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 1 << 12 {
        return;
    }
    let tree = treejump::fixtures::b2_tree();
    if let Ok(mu) = treejump::json::parse_mu(s, &tree) {
        let phi = treejump::fixtures::b2_phi(&tree);
        let trace = treejump::duality::process_to_walk(&tree, &phi, &mu)
            .expect("reconstruction succeeds on any valid measure");
        let kernels = treejump::walk::WalkKernels::compute(&trace.walk);
        let nu = kernels.harmonic_measure(tree.root()).unwrap();
        assert_eq!(nu.masses(), mu.masses());
    }
});
