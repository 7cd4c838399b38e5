#![no_main]

use kcontract::io::{parse_deltas, parse_params, parse_real_list, parse_window};
use kcontract::linalg::NormKind;
use libfuzzer_sys::fuzz_target;

// The first byte picks the flag parser; the rest is the flag value.
fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    match which % 5 {
        0 => drop(parse_real_list(text, "--ic")),
        1 => drop(parse_params(text)),
        2 => drop(parse_window(text)),
        3 => drop(parse_deltas(text)),
        _ => drop(text.parse::<NormKind>()),
    }
});
