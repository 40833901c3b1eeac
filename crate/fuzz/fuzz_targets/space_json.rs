#![no_main]

use libfuzzer_sys::fuzz_target;

// Metric files: validation never panics; every accepted space builds a
// ball tree whose boundary metric reproduces the matrix entry for entry
// (checked inside the constructor) and round-trips through the wire form.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 1 << 14 {
        return;
    }
    if let Ok(space) = treejump::json::parse_space(s) {
        let mt = treejump::tree::tree_from_ultrametric(&space).expect("valid spaces build");
        assert_eq!(mt.tree.leaf_count(), space.len());
        let emitted = treejump::json::to_string(&treejump::json::emit_space(&space), false);
        let again = treejump::json::parse_space(&emitted).expect("round trip");
        assert_eq!(again, space);
    }
});
