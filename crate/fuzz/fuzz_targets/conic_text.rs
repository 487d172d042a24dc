#![no_main]

use ddro::socp::ConicProgram;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(prog) = ConicProgram::from_text(text) else { return };
    let back = ConicProgram::from_text(&prog.to_text()).unwrap();
    assert_eq!(prog, back);
});
