#![no_main]

use libfuzzer_sys::fuzz_target;

// Radius labellings against a fixed tree: parse/validate without panics;
// accepted labellings give a boundary metric that satisfies the
// ultrametric inequality on all leaf triples.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let tree = treejump::fixtures::b2_tree();
    if let Ok(phi) = treejump::json::parse_phi(s, &tree) {
        let leaves = tree.leaves();
        for &a in leaves {
            for &b in leaves {
                for &c in leaves {
                    let dab = treejump::tree::boundary_distance(&tree, &phi, a, b).unwrap();
                    let dbc = treejump::tree::boundary_distance(&tree, &phi, b, c).unwrap();
                    let dac = treejump::tree::boundary_distance(&tree, &phi, a, c).unwrap();
                    assert!(dac <= dab.max(dbc));
                }
            }
        }
    }
});
