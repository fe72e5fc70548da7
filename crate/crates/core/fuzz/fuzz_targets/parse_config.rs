#![no_main]

use libfuzzer_sys::fuzz_target;
use memtoolbox::config::Config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = Config::parse(text) {
        // canonical text must parse back to itself
        let canon = cfg.to_text();
        let again = Config::parse(&canon).expect("canonical config must parse");
        assert_eq!(again.to_text(), canon);
    }
});
