#![no_main]

use libfuzzer_sys::fuzz_target;

// Rational strings: parsing must never panic, and anything accepted must
// re-emit canonically and round-trip to the same value.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = treejump::ratio::parse_rat(s) {
        let canonical = treejump::ratio::fmt_rat(&r);
        let again = treejump::ratio::parse_rat(&canonical).expect("canonical form parses");
        assert_eq!(again, r);
        assert_eq!(treejump::ratio::fmt_rat(&again), canonical);
    }
});
