#![no_main]

use libfuzzer_sys::fuzz_target;
use ultratight::scenario::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // anything that validates must also build and survive a round trip
    if let Ok(cfg) = ScenarioConfig::from_toml_str(text) {
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back.hash(), cfg.hash());
        let _ = cfg.build();
    }
});
