#![no_main]

use ddro::model::{read_returns_csv, write_returns_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(sample) = read_returns_csv(data) else { return };
    // writing rounds once; after that the text is a fixed point
    let mut first = Vec::new();
    write_returns_csv(&sample, &mut first).unwrap();
    let again = read_returns_csv(first.as_slice()).unwrap();
    assert_eq!((again.n(), again.m()), (sample.n(), sample.m()));
    let mut second = Vec::new();
    write_returns_csv(&again, &mut second).unwrap();
    assert_eq!(first, second);
});
