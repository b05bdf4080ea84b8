#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| grpauth::fuzzing::parse_scenario(text));
