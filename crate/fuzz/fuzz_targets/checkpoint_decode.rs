//! Arbitrary bytes fed to the checkpoint decoder must produce an error or a
//! state that survives a re-encode unchanged.

#![no_main]

use libfuzzer_sys::fuzz_target;

use pe_assim::spectral::checkpoint;

fuzz_target!(|data: &[u8]| {
    if let Ok(c) = checkpoint::decode(data) {
        let bytes = checkpoint::encode(&c.state, c.time);
        let again = checkpoint::decode(&bytes).expect("re-encoded checkpoint decodes");
        assert_eq!(again.state, c.state);
        assert_eq!(again.time.to_bits(), c.time.to_bits());
    }
});
