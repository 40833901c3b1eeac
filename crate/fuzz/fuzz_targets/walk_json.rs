#![no_main]

use libfuzzer_sys::fuzz_target;

// Walk files: row parsing never panics; validation against a fixed tree
// either rejects cleanly or yields a walk whose kernels can be computed
// and whose identity report passes.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if treejump::json::parse_walk_rows(s).is_err() {
        return;
    }
    let tree = treejump::fixtures::b2_tree();
    if let Ok(walk) = treejump::json::parse_walk(s, tree) {
        let kernels = treejump::walk::WalkKernels::compute(&walk);
        let entries = treejump::walk::check_kernel_identities(&walk, &kernels);
        assert!(entries.iter().all(|e| e.pass), "exact identities must hold on any valid walk");
    }
});
