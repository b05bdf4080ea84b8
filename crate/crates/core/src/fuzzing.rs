//! Bodies of the fuzz targets under `fuzz/`. Kept in the library so the
//! checked-in corpus can be replayed by ordinary tests on stable.

use crate::groups::GroupSuite;
use crate::handover::{HandoverCredential, HandoverMessage, HandoverNotice};
use crate::protocol::{Commitment, MemberCredential};
use crate::simnet::{ChannelCipher, KeyedStreamCipher, Scenario, SimConfig, Simulation, Transcript};

/// First byte picks the suite, the rest is the encoding.
pub fn decode_element(data: &[u8]) {
    let Some((&pick, bytes)) = data.split_first() else { return };
    let suite = match pick % 4 {
        0 => GroupSuite::mock13(),
        1 => GroupSuite::mock61(),
        2 => GroupSuite::curve43(),
        _ => GroupSuite::curve_large(),
    };
    if let Ok(g) = suite.decode_element(bytes) {
        assert!(suite.contains(&g));
        assert_eq!(suite.encode_element(&g), bytes, "encoding is canonical");
    }
}

pub fn decode_target(data: &[u8]) {
    let Some((&pick, bytes)) = data.split_first() else { return };
    let suite = match pick % 3 {
        0 => GroupSuite::mock13(),
        1 => GroupSuite::curve43(),
        _ => GroupSuite::curve_large(),
    };
    if let Ok(t) = suite.decode_target(bytes) {
        assert_eq!(suite.encode_target(&t), bytes);
        assert_eq!(suite.target_pow(&t, suite.order()).unwrap(), suite.target_identity());
    }
}

pub fn decode_commitment(data: &[u8]) {
    for suite in [GroupSuite::mock61(), GroupSuite::curve43()] {
        if let Ok(c) = Commitment::decode(&suite, data) {
            assert_eq!(c.encode(&suite), data);
        }
    }
}

pub fn decode_credential(data: &[u8]) {
    if let Ok(cred) = MemberCredential::from_bytes(data) {
        assert_eq!(cred.to_bytes(), data);
    }
}

pub fn decode_handover(data: &[u8]) {
    for suite in [GroupSuite::mock13(), GroupSuite::curve43()] {
        if let Ok(msg) = HandoverMessage::decode(&suite, data) {
            assert_eq!(msg.encode(&suite), data);
        }
        if let Ok(cred) = HandoverCredential::decode(&suite, data) {
            assert_eq!(HandoverCredential::decode(&suite, &cred.encode(&suite)).unwrap(), cred);
        }
    }
    if let Ok(notice) = HandoverNotice::decode(data) {
        assert_eq!(notice.encode(), data);
    }
}

pub fn channel_open(data: &[u8]) {
    let key = [7u8; 32];
    if let Ok(plain) = KeyedStreamCipher.open(&key, data) {
        let nonce = u64::from_be_bytes(data[..8].try_into().expect("opened envelopes carry a nonce"));
        assert_eq!(KeyedStreamCipher.seal(&key, nonce, &plain), data);
    }
}

/// Parses, and runs small valid scenarios under a delivery ceiling.
pub fn parse_scenario(text: &str) {
    let Ok(scenario) = Scenario::from_toml(text) else { return };
    Scenario::from_toml(&scenario.to_toml()).expect("round trip");
    let members: usize = scenario.groups.iter().map(|g| g.members.len()).sum();
    if members > 64 || scenario.script.len() > 16 || scenario.validate().is_err() {
        return;
    }
    let config = SimConfig { max_deliveries: 100_000, ..SimConfig::default() };
    let _ = Simulation::run_to_end(&scenario, config);
}

pub fn parse_transcript(text: &str) {
    if let Ok(t) = Transcript::from_ndjson(text) {
        assert_eq!(Transcript::from_ndjson(&t.to_ndjson()).expect("re-parse"), t);
    }
}
