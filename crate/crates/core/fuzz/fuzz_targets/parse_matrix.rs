#![no_main]

use libfuzzer_sys::fuzz_target;
use memtoolbox::textio::{format_matrix, parse_matrix};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_matrix(text) {
        assert!(m.data().iter().all(|x| x.is_finite()));
        assert_eq!(parse_matrix(&format_matrix(&m)).expect("formatted matrix must parse"), m);
    }
});
