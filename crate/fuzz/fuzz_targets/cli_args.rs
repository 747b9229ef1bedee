#![no_main]

use bhadv_cli::Cli;
use clap::Parser;
use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated; only parsing runs.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = Cli::try_parse_from(std::iter::once("bhadv").chain(text.split('\0')));
});
