#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| grpauth::fuzzing::decode_commitment(data));
