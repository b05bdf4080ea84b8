//! Deterministic in-memory simulation of Group Managers and members.
//!
//! A [`Simulation`] runs a [`Scenario`] script on one thread. Every protocol
//! action travels as bytes through an ordered message queue: private material
//! on [`SecureChannel`]s, commitments and presentations on an unauthenticated
//! public broadcast that an armed adversary tap may rewrite. Everything that
//! crosses the wire lands in the [`Transcript`].
//!
//! A `Simulation` is single-owner and not thread-safe; run independent
//! simulations in separate processes or threads, each with its own value.

pub mod channel;
pub mod demo;
pub mod scenario;
pub mod transcript;

use std::collections::{BTreeMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use channel::{ChannelCipher, ChannelError, KeyedStreamCipher, SecureChannel};
pub use scenario::{GroupDef, MessageKind, Mutation, Scenario, Step, SuiteChoice};
pub use transcript::{ChannelKind, Event, Record, Transcript};

use crate::baselines::{harn_authenticate, harn_deal};
use crate::groups::{GroupSuite, OpCounter};
use crate::handover::{
    handover_issue, handover_present, handover_refresh, handover_verify, HandoverCredential, HandoverError,
    HandoverMessage, HandoverNotice,
};
use crate::protocol::{
    derive_session_key, gm_collect_and_verify, gm_init, gm_reinitialize, member_commit, Commitment, GmState, GroupId,
    MemberCredential, MemberId, ProtocolError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("tamper selector for step {step} matched {matches} messages, expected exactly 1")]
    TapSelector { step: usize, matches: usize },
    #[error("tamper failed: {0}")]
    Tap(String),
    #[error("event loop exceeded {0} deliveries")]
    Livelock(u64),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Log secure-channel plaintext as marked `secure_plaintext` records.
    pub include_secure_plaintext: bool,
    /// Ceiling on message deliveries for the whole run.
    pub max_deliveries: u64,
    pub suite_override: Option<SuiteChoice>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { include_secure_plaintext: false, max_deliveries: 1_000_000, suite_override: None }
    }
}

/// Runs a scenario with the default configuration.
pub fn run_scenario(scenario: &Scenario) -> Result<Transcript, SimError> {
    Simulation::run_to_end(scenario, SimConfig::default()).map(Simulation::into_transcript)
}

struct GmNode {
    state: GmState,
    round: Vec<Result<Commitment, String>>,
    harn_round: Vec<(u64, u64)>,
    /// Credentials this GM issued, keyed by the peer group holding them.
    standing: BTreeMap<GroupId, HandoverCredential>,
    /// Credentials received from peer GMs, keyed by issuer.
    received: BTreeMap<GroupId, HandoverCredential>,
    notices: Vec<HandoverNotice>,
}

struct MemberNode {
    id: MemberId,
    group: GroupId,
    cred: Option<MemberCredential>,
    pending: BTreeMap<MemberId, Commitment>,
    confirmed: BTreeMap<MemberId, Commitment>,
    handover_cred: Option<HandoverCredential>,
    last_presentation: Option<(GroupId, Vec<u8>)>,
}

struct Envelope {
    sender: String,
    receiver: String,
    channel: ChannelKind,
    kind: MessageKind,
    wire: Vec<u8>,
}

struct ArmedTap {
    step: usize,
    sender: String,
    kind: MessageKind,
    receiver: Option<String>,
    mutation: Mutation,
    matches: usize,
}

enum Entity {
    Gm(GroupId),
    Member(String),
    Broadcast,
}

fn gm_label(g: GroupId) -> String {
    format!("gm:{g}")
}

fn parse_entity(label: &str) -> Entity {
    if label == "*" {
        Entity::Broadcast
    } else if let Some(g) = label.strip_prefix("gm:").and_then(|g| g.parse().ok()) {
        Entity::Gm(g)
    } else {
        Entity::Member(label.to_owned())
    }
}

/// `fp(key)`: first 8 bytes of SHA-256 over the key encoding, in hex.
pub fn key_fingerprint(suite: &GroupSuite, key: &crate::groups::TargetElement) -> String {
    hex::encode(&Sha256::digest(suite.encode_target(key))[..8])
}

pub struct Simulation {
    scenario: Scenario,
    suite: GroupSuite,
    config: SimConfig,
    cipher_name: &'static str,
    rng: ChaCha20Rng,
    gms: BTreeMap<GroupId, GmNode>,
    members: BTreeMap<String, MemberNode>,
    channels: BTreeMap<(String, String), SecureChannel>,
    queue: VecDeque<Envelope>,
    transcript: Transcript,
    taps: Vec<ArmedTap>,
    deliveries: u64,
    step: Option<usize>,
}

impl Simulation {
    pub fn new(scenario: &Scenario, config: SimConfig) -> Result<Self, SimError> {
        let valid = scenario.validate()?;
        let suite = config.suite_override.unwrap_or(valid.suite).build()?;
        let members = valid
            .home
            .iter()
            .map(|(name, &group)| {
                let node = MemberNode {
                    id: MemberId::from_name(name).expect("validated"),
                    group,
                    cred: None,
                    pending: BTreeMap::new(),
                    confirmed: BTreeMap::new(),
                    handover_cred: None,
                    last_presentation: None,
                };
                (name.clone(), node)
            })
            .collect();
        Ok(Self {
            scenario: scenario.clone(),
            suite,
            config,
            cipher_name: KeyedStreamCipher.name(),
            rng: ChaCha20Rng::seed_from_u64(scenario.seed),
            gms: BTreeMap::new(),
            members,
            channels: BTreeMap::new(),
            queue: VecDeque::new(),
            transcript: Transcript::new(),
            taps: Vec::new(),
            deliveries: 0,
            step: None,
        })
    }

    /// Builds and runs, keeping the simulation for inspection.
    pub fn run_to_end(scenario: &Scenario, config: SimConfig) -> Result<Self, SimError> {
        let mut sim = Self::new(scenario, config)?;
        sim.run()?;
        Ok(sim)
    }

    pub fn suite(&self) -> &GroupSuite {
        &self.suite
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    pub fn gm_state(&self, group: GroupId) -> Option<&GmState> {
        self.gms.get(&group).map(|g| &g.state)
    }

    pub fn member_credential(&self, name: &str) -> Option<&MemberCredential> {
        self.members.get(name).and_then(|m| m.cred.as_ref())
    }

    /// Hand-over notices received by a GM from its peers.
    pub fn notices(&self, group: GroupId) -> &[HandoverNotice] {
        self.gms.get(&group).map(|g| g.notices.as_slice()).unwrap_or_default()
    }

    pub fn run(&mut self) -> Result<(), SimError> {
        self.transcript.push(Event::Header {
            seed: self.scenario.seed,
            suite: self.suite.name().to_owned(),
            cipher: self.cipher_name.to_owned(),
            groups: self.scenario.groups.len(),
            steps: self.scenario.script.len(),
            secure_plaintext: self.config.include_secure_plaintext,
        });
        self.setup()?;
        let script = self.scenario.script.clone();
        for (i, step) in script.iter().enumerate() {
            if let Step::Tamper { sender, kind, receiver, mutation } = step {
                let target = i + script[i..].iter().position(|s| !matches!(s, Step::Tamper { .. })).expect("validated");
                self.taps.push(ArmedTap {
                    step: target,
                    sender: sender.clone(),
                    kind: *kind,
                    receiver: receiver.clone(),
                    mutation: mutation.clone(),
                    matches: 0,
                });
                continue;
            }
            self.step = Some(i);
            let actual = self.run_step(i, step)?;
            for tap in self.taps.iter().filter(|t| t.step == i) {
                if tap.matches != 1 {
                    return Err(SimError::TapSelector { step: i, matches: tap.matches });
                }
            }
            if let Some(expected) = step.expect() {
                self.transcript.push(Event::Expectation {
                    step: i,
                    expected: expected.to_owned(),
                    actual: actual.clone(),
                    matched: expected == actual,
                });
            }
        }
        Ok(())
    }

    fn setup(&mut self) -> Result<(), SimError> {
        for def in self.scenario.groups.clone() {
            let ids: Vec<MemberId> = def.members.iter().map(|n| MemberId::from_name(n).expect("validated")).collect();
            let policy = crate::protocol::GroupPolicy::new(def.t, def.m, def.members.len()).expect("validated");
            let (state, _, creds) = gm_init(def.id, policy, &self.suite, &ids, &mut self.rng)
                .map_err(|e| SimError::Validation(e.to_string()))?;
            self.gms.insert(
                def.id,
                GmNode {
                    state,
                    round: Vec::new(),
                    harn_round: Vec::new(),
                    standing: BTreeMap::new(),
                    received: BTreeMap::new(),
                    notices: Vec::new(),
                },
            );
            for (name, cred) in def.members.iter().zip(creds) {
                self.send(&gm_label(def.id), name, MessageKind::Credential, cred.to_bytes())?;
            }
        }
        self.pump()
    }

    fn run_step(&mut self, i: usize, step: &Step) -> Result<String, SimError> {
        match step {
            Step::Authenticate { group, participants, .. } => self.authenticate(i, *group, participants),
            Step::HarnRound { group, participants, .. } => self.harn_round(i, *group, participants),
            Step::Handover { member, from, to, .. } => self.handover(i, member, *from, *to),
            Step::Replay { member, .. } => self.replay(i, member),
            Step::DeriveKey { group, a, b, .. } => self.derive_key(i, *group, a, b),
            Step::Reinit { group } => {
                self.reinit(i, *group)?;
                Ok("reinit".into())
            }
            Step::Tamper { .. } => unreachable!("handled by run"),
        }
    }

    fn verdict(
        &mut self,
        step: usize,
        group: GroupId,
        phase: &str,
        result: &str,
        participants: Vec<String>,
        detail: Option<String>,
    ) {
        let epoch = self.gms[&group].state.epoch();
        self.transcript.push(Event::Verdict {
            step,
            group,
            epoch,
            phase: phase.to_owned(),
            result: result.to_owned(),
            participants,
            detail,
        });
    }

    fn authenticate(&mut self, i: usize, group: GroupId, participants: &[String]) -> Result<String, SimError> {
        self.gms.get_mut(&group).expect("validated").round.clear();
        for name in participants {
            let member = &self.members[name];
            let Some(cred) = member.cred.clone() else { continue };
            let commitment = member_commit(&cred, &self.suite);
            self.send(name, "*", MessageKind::Commitment, commitment.encode(&self.suite))?;
        }
        self.pump()?;

        let gm = self.gms.get_mut(&group).expect("validated");
        let round = std::mem::take(&mut gm.round);
        let (result, detail) = match round.into_iter().collect::<Result<Vec<_>, String>>() {
            Err(why) => ("rejected".to_owned(), Some(why)),
            Ok(commitments) => match gm_collect_and_verify(&mut gm.state, &commitments) {
                Ok(res) => {
                    let detail = (!res.suspicious_zero.is_empty()).then(|| {
                        let names: Vec<String> = res.suspicious_zero.iter().map(|m| m.to_string()).collect();
                        format!("identity commitment from {}", names.join(","))
                    });
                    (res.verdict.as_str().to_owned(), detail)
                }
                Err(ProtocolError::InsufficientQuorum { .. }) => ("insufficient_quorum".to_owned(), None),
                // a commitment that fails validation fails the round
                Err(e) => ("rejected".to_owned(), Some(e.to_string())),
            },
        };
        self.verdict(i, group, "auth", &result, participants.to_vec(), detail);

        if result == "accepted" || result == "rejected" {
            let epoch = self.gms[&group].state.epoch();
            let mut payload = group.to_be_bytes().to_vec();
            payload.extend_from_slice(&epoch.to_be_bytes());
            payload.push(u8::from(result == "accepted"));
            self.send(&gm_label(group), "*", MessageKind::AuthVerdict, payload)?;
            self.pump()?;
        }
        if result == "rejected" {
            self.reinit(i, group)?;
        }
        Ok(result)
    }

    fn harn_round(&mut self, i: usize, group: GroupId, participants: &[String]) -> Result<String, SimError> {
        self.gms.get_mut(&group).expect("validated").harn_round.clear();
        for name in participants {
            let member = &self.members[name];
            let Some(cred) = member.cred.clone() else { continue };
            let mut payload = group.to_be_bytes().to_vec();
            payload.extend_from_slice(member.id.as_bytes());
            payload.extend_from_slice(&cred.index.to_be_bytes());
            payload.extend_from_slice(&cred.share.to_be_bytes());
            self.send(name, "*", MessageKind::HarnShare, payload)?;
        }
        self.pump()?;
        let gm = self.gms.get_mut(&group).expect("validated");
        let shares = std::mem::take(&mut gm.harn_round);
        let dealing = harn_deal(gm.state.polynomial().clone(), gm.state.params().policy.members());
        let (result, detail) = match harn_authenticate(&dealing, &shares) {
            Ok(v) => (v.as_str().to_owned(), None),
            Err(e) => ("error".to_owned(), Some(e.to_string())),
        };
        self.verdict(i, group, "harn", &result, participants.to_vec(), detail);
        Ok(result)
    }

    fn handover(&mut self, i: usize, member: &str, from: GroupId, to: GroupId) -> Result<String, SimError> {
        let target = self.gms.get_mut(&to).expect("validated");
        let epoch = target.state.epoch();
        let stale = target.standing.get(&from).is_none_or(|c| c.epoch != epoch);
        if stale {
            match handover_issue(&mut target.state) {
                Ok(cred) => {
                    target.standing.insert(from, cred);
                    let bytes = cred.encode(&self.suite);
                    self.send(&gm_label(to), &gm_label(from), MessageKind::HandoverCredential, bytes)?;
                    self.pump()?;
                }
                Err(e) => {
                    let result = handover_error_label(&e);
                    self.verdict(i, to, "handover", result, vec![member.to_owned()], Some(e.to_string()));
                    return Ok(result.to_owned());
                }
            }
        }

        let Some(cred) = self.gms[&from].received.get(&to).copied() else {
            self.verdict(
                i,
                to,
                "handover",
                "error",
                vec![member.to_owned()],
                Some("home GM holds no credential".into()),
            );
            return Ok("error".into());
        };
        self.send(&gm_label(from), member, MessageKind::HandoverCredential, cred.encode(&self.suite))?;
        self.pump()?;

        let node = self.members.get_mut(member).expect("validated");
        let Some(cred) = node.handover_cred.take() else {
            self.verdict(i, to, "handover", "error", vec![member.to_owned()], Some("credential not delivered".into()));
            return Ok("error".into());
        };
        let bytes = handover_present(node.id, &cred).encode(&self.suite);
        node.last_presentation = Some((to, bytes.clone()));
        self.send(member, &gm_label(to), MessageKind::HandoverPresentation, bytes)?;
        self.pump()?;
        Ok(self.last_verdict(i))
    }

    fn replay(&mut self, i: usize, member: &str) -> Result<String, SimError> {
        let Some((to, bytes)) = self.members[member].last_presentation.clone() else {
            let group = self.members[member].group;
            self.verdict(i, group, "handover", "error", vec![member.to_owned()], Some("nothing to replay".into()));
            return Ok("error".into());
        };
        self.send(member, &gm_label(to), MessageKind::HandoverPresentation, bytes)?;
        self.pump()?;
        Ok(self.last_verdict(i))
    }

    fn last_verdict(&self, step: usize) -> String {
        self.transcript
            .events()
            .filter_map(|e| match e {
                Event::Verdict { step: s, phase, result, .. } if *s == step && phase == "handover" => {
                    Some(result.clone())
                }
                _ => None,
            })
            .last()
            .unwrap_or_else(|| "no_verdict".into())
    }

    fn derive_key(&mut self, i: usize, group: GroupId, a: &str, b: &str) -> Result<String, SimError> {
        let params = self.gms[&group].state.params().clone();
        let derive = |own: &str, peer: &str| -> Result<crate::protocol::SessionKey, String> {
            let own = &self.members[own];
            let peer_id = self.members[peer].id;
            let cred = own.cred.as_ref().ok_or("no credential")?;
            let commitment = own.confirmed.get(&peer_id).ok_or("no accepted commitment from peer")?;
            derive_session_key(cred, commitment, &params).map_err(|e| e.to_string())
        };
        let (ab, ba) = (derive(a, b), derive(b, a));
        let result = match (&ab, &ba) {
            (Ok(x), Ok(y)) => {
                let agree = x.value == y.value;
                self.transcript.push(Event::Key {
                    step: i,
                    group,
                    a: a.to_owned(),
                    b: b.to_owned(),
                    fingerprint_ab: key_fingerprint(&self.suite, &x.value),
                    fingerprint_ba: key_fingerprint(&self.suite, &y.value),
                    agree,
                });
                if agree { "agree" } else { "disagree" }.to_owned()
            }
            (Err(e), _) | (_, Err(e)) => {
                self.verdict(i, group, "key", "error", vec![a.to_owned(), b.to_owned()], Some(e.clone()));
                "error".to_owned()
            }
        };
        Ok(result)
    }

    fn reinit(&mut self, i: usize, group: GroupId) -> Result<(), SimError> {
        let gm = self.gms.get_mut(&group).expect("validated");
        let (params, creds) =
            gm_reinitialize(&mut gm.state, &mut self.rng).map_err(|e| SimError::Validation(e.to_string()))?;
        gm.standing.clear();
        self.transcript.push(Event::Epoch { step: i, group, epoch: params.epoch });
        let names: Vec<String> =
            self.scenario.groups.iter().find(|g| g.id == group).expect("validated").members.clone();
        for (name, cred) in names.iter().zip(creds) {
            self.send(&gm_label(group), name, MessageKind::Credential, cred.to_bytes())?;
        }
        self.pump()
    }

    fn channel_kind(kind: MessageKind) -> ChannelKind {
        match kind {
            MessageKind::Credential | MessageKind::HandoverCredential | MessageKind::HandoverNotice => {
                ChannelKind::Secure
            }
            _ => ChannelKind::Public,
        }
    }

    fn send(&mut self, sender: &str, receiver: &str, kind: MessageKind, payload: Vec<u8>) -> Result<(), SimError> {
        let channel = Self::channel_kind(kind);
        let mut wire = match channel {
            ChannelKind::Public => payload.clone(),
            ChannelKind::Secure => {
                if self.config.include_secure_plaintext {
                    self.transcript.push(Event::SecurePlaintext {
                        step: self.step,
                        sender: sender.to_owned(),
                        receiver: receiver.to_owned(),
                        kind,
                        plaintext: hex::encode(&payload),
                    });
                }
                self.secure_channel(sender, receiver).seal(&payload)
            }
        };
        let before = wire.clone();
        if let Some(step) = self.step {
            let suite = self.suite.clone();
            for tap in self.taps.iter_mut().filter(|t| t.step == step) {
                let hit =
                    tap.sender == sender && tap.kind == kind && tap.receiver.as_deref().is_none_or(|r| r == receiver);
                if !hit {
                    continue;
                }
                tap.matches += 1;
                if tap.matches > 1 {
                    return Err(SimError::TapSelector { step, matches: tap.matches });
                }
                adversary_tap(&suite, channel, &tap.mutation, &mut wire)?;
            }
        }
        self.transcript.push(Event::Message {
            step: self.step,
            sender: sender.to_owned(),
            receiver: receiver.to_owned(),
            channel,
            kind,
            payload: hex::encode(&wire),
            tampered: wire != before,
        });
        self.queue.push_back(Envelope {
            sender: sender.to_owned(),
            receiver: receiver.to_owned(),
            channel,
            kind,
            wire,
        });
        Ok(())
    }

    fn secure_channel(&mut self, a: &str, b: &str) -> &mut SecureChannel {
        let key = if a <= b { (a.to_owned(), b.to_owned()) } else { (b.to_owned(), a.to_owned()) };
        let seed = self.scenario.seed;
        self.channels.entry(key).or_insert_with(|| {
            SecureChannel::new(Box::new(KeyedStreamCipher), SecureChannel::derive_key(seed, a, b), a, b)
        })
    }

    fn pump(&mut self) -> Result<(), SimError> {
        while let Some(env) = self.queue.pop_front() {
            self.deliveries += 1;
            if self.deliveries > self.config.max_deliveries {
                return Err(SimError::Livelock(self.config.max_deliveries));
            }
            let payload = match env.channel {
                ChannelKind::Public => env.wire.clone(),
                ChannelKind::Secure => {
                    let opened = self.secure_channel(&env.sender, &env.receiver).open(&env.wire);
                    match opened {
                        Ok(p) => p,
                        Err(_) => {
                            self.transcript.push(Event::IntegrityFailure {
                                step: self.step,
                                sender: env.sender.clone(),
                                receiver: env.receiver.clone(),
                                kind: env.kind,
                            });
                            continue;
                        }
                    }
                }
            };
            self.deliver(&env, &payload)?;
        }
        Ok(())
    }

    fn deliver(&mut self, env: &Envelope, payload: &[u8]) -> Result<(), SimError> {
        match (parse_entity(&env.receiver), env.kind) {
            (Entity::Member(name), MessageKind::Credential) => {
                if let (Some(node), Ok(cred)) = (self.members.get_mut(&name), MemberCredential::from_bytes(payload)) {
                    node.cred = Some(cred);
                    node.pending.clear();
                    node.confirmed.clear();
                }
            }
            (Entity::Member(name), MessageKind::HandoverCredential) => {
                if let (Some(node), Ok(cred)) =
                    (self.members.get_mut(&name), HandoverCredential::decode(&self.suite, payload))
                {
                    node.handover_cred = Some(cred);
                }
            }
            (Entity::Gm(g), MessageKind::HandoverCredential) => {
                if let Ok(cred) = HandoverCredential::decode(&self.suite, payload) {
                    self.gms.get_mut(&g).expect("known gm").received.insert(cred.issuer, cred);
                }
            }
            (Entity::Gm(g), MessageKind::HandoverNotice) => {
                if let Ok(notice) = HandoverNotice::decode(payload) {
                    self.gms.get_mut(&g).expect("known gm").notices.push(notice);
                }
            }
            (Entity::Gm(g), MessageKind::HandoverPresentation) => self.on_presentation(g, &env.sender, payload)?,
            (Entity::Broadcast, MessageKind::Commitment) => {
                let sender = &self.members[&env.sender];
                let group = sender.group;
                let sender_id = sender.id;
                let decoded = Commitment::decode(&self.suite, payload)
                    .map_err(|e| format!("malformed commitment from {}: {e}", env.sender));
                let gm = self.gms.get_mut(&group).expect("known gm");
                gm.round.push(decoded.clone());
                if let Ok(c) = decoded {
                    for node in self.members.values_mut().filter(|m| m.group == group && m.id != sender_id) {
                        node.pending.insert(c.member, c);
                    }
                }
            }
            (Entity::Broadcast, MessageKind::AuthVerdict) => {
                if payload.len() == 13 {
                    let group = u64::from_be_bytes(payload[..8].try_into().expect("8"));
                    let epoch = u32::from_be_bytes(payload[8..12].try_into().expect("4"));
                    let accepted = payload[12] == 1;
                    for node in self.members.values_mut().filter(|m| m.group == group) {
                        let pending = std::mem::take(&mut node.pending);
                        if accepted && node.cred.as_ref().is_some_and(|c| c.epoch == epoch) {
                            node.confirmed.extend(pending);
                        }
                    }
                }
            }
            (Entity::Broadcast, MessageKind::HarnShare) => {
                let group = self.members[&env.sender].group;
                if payload.len() == 40 {
                    let x = u64::from_be_bytes(payload[24..32].try_into().expect("8"));
                    let y = u64::from_be_bytes(payload[32..40].try_into().expect("8"));
                    self.gms.get_mut(&group).expect("known gm").harn_round.push((x, y));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn on_presentation(&mut self, g: GroupId, sender: &str, payload: &[u8]) -> Result<(), SimError> {
        let step = self.step.unwrap_or_default();
        let msg = match HandoverMessage::decode(&self.suite, payload) {
            Ok(m) => m,
            Err(e) => {
                self.verdict(step, g, "handover", "rejected", vec![sender.to_owned()], Some(e.to_string()));
                return Ok(());
            }
        };
        let gm = self.gms.get_mut(&g).expect("known gm");
        match handover_verify(&mut gm.state, &msg) {
            Ok(outcome) => {
                let detail = outcome.notice.is_some().then(|| format!("admitted at index {}", msg.index));
                self.verdict(step, g, "handover", outcome.verdict.as_str(), vec![sender.to_owned()], detail);
                if let Some(notice) = outcome.notice {
                    let peers: Vec<GroupId> = self.gms.keys().copied().filter(|&p| p != g).collect();
                    for p in peers {
                        self.send(&gm_label(g), &gm_label(p), MessageKind::HandoverNotice, notice.encode())?;
                    }
                }
                // refresh whatever the verdict
                let gm = self.gms.get_mut(&g).expect("known gm");
                let holder = gm.standing.iter().find(|(_, c)| c.index == msg.index).map(|(&p, &c)| (p, c));
                if let Some((peer, previous)) = holder {
                    match handover_refresh(&mut gm.state, &previous) {
                        Ok(next) => {
                            gm.standing.insert(peer, next);
                            let bytes = next.encode(&self.suite);
                            self.send(&gm_label(g), &gm_label(peer), MessageKind::HandoverCredential, bytes)?;
                        }
                        Err(e) => {
                            gm.standing.remove(&peer);
                            self.verdict(step, g, "handover_refresh", "error", vec![], Some(e.to_string()));
                        }
                    }
                }
            }
            Err(e) => {
                let result = handover_error_label(&e);
                self.verdict(step, g, "handover", result, vec![sender.to_owned()], Some(e.to_string()));
            }
        }
        Ok(())
    }
}

fn handover_error_label(e: &HandoverError) -> &'static str {
    match e {
        HandoverError::Replay(_) => "replay",
        HandoverError::CapacityExhausted(_) => "capacity",
        _ => "error",
    }
}

/// Applies `mutation` to a message in flight. Public payloads are rewritten
/// as asked; any non-trivial change to a secure envelope is a ciphertext
/// flip and will fail integrity on delivery.
pub fn adversary_tap(
    suite: &GroupSuite,
    channel: ChannelKind,
    mutation: &Mutation,
    wire: &mut [u8],
) -> Result<(), SimError> {
    match (channel, mutation) {
        (_, Mutation::Noop) => Ok(()),
        (_, Mutation::FlipByte { byte, mask }) => {
            let len = wire.len();
            let b = wire.get_mut(*byte).ok_or_else(|| SimError::Tap(format!("byte {byte} beyond payload of {len}")))?;
            *b ^= mask;
            Ok(())
        }
        (ChannelKind::Secure, Mutation::AddMultiple { .. }) => {
            if let Some(b) = wire.get_mut(8) {
                *b ^= 0x80;
            }
            Ok(())
        }
        (ChannelKind::Public, Mutation::AddMultiple { d }) => {
            let len = suite.element_len();
            if wire.len() < len {
                return Err(SimError::Tap("payload carries no point".into()));
            }
            let tail = wire.len() - len;
            let point = suite
                .decode_element(&wire[tail..])
                .map_err(|e| SimError::Tap(format!("payload carries no point: {e}")))?;
            let delta = suite.mul_generator(*d, &mut OpCounter::default());
            let moved = suite.add(&point, &delta).map_err(|e| SimError::Tap(e.to_string()))?;
            wire[tail..].copy_from_slice(&suite.encode_element(&moved));
            Ok(())
        }
    }
}
