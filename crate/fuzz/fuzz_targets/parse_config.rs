#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Any document must either parse into a validated vehicle or return an error.
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(doc) = glider_core::io::parse_config(text) {
            doc.glider.validate().expect("parsed config passes validation");
        }
    }
});
