#![no_main]

use libfuzzer_sys::fuzz_target;

use pe_assim::functionals::container;

fuzz_target!(|data: &[u8]| {
    // Must never panic, whatever the tag and payload.
    let _ = container::decode(data);
});
