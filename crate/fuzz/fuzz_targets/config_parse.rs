//! Configuration text is user input: parsing must fail cleanly, and any
//! accepted document must serialize back to an equal configuration.

#![no_main]

use libfuzzer_sys::fuzz_target;

use pe_assim::cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(config) = ExperimentConfig::parse(&text) {
        let round = ExperimentConfig::parse(&config.to_toml()).expect("serialized configuration parses");
        assert_eq!(round, config);
    }
});
