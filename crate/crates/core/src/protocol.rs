//! Group Manager and member logic for initialization, authentication and
//! pairwise session keys.
//!
//! The GM samples `f` of degree `t-1`, hands member `i` the share
//! `(x_i, f(x_i))` and publishes `Q = f(0)·P`. To authenticate, each member
//! releases `f(x_i)·P ∥ ID_i`; the GM weights every commitment by its Lagrange
//! coefficient over the participant set and accepts iff the weighted sum is
//! `Q`. Two members `i`, `j` then share `e(y_i·y_j·P, Q)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::algebra::{lagrange_coefficients_at_zero, AlgebraError, Polynomial};
use crate::groups::{GroupElement, GroupError, GroupSuite, OpCounter, TargetElement};

pub type GroupId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid policy (t={t}, m={m}, n={n}): need 1 <= t < m < n")]
    Policy { t: usize, m: usize, n: usize },
    #[error("expected {expected} member ids, got {got}")]
    MemberCount { expected: usize, got: usize },
    #[error("duplicate member id {0}")]
    DuplicateMember(MemberId),
    #[error("member id {0} is not registered in this group")]
    UnknownMember(MemberId),
    #[error("commitment addressed to group {got}, expected {expected}")]
    WrongGroup { expected: GroupId, got: GroupId },
    #[error("insufficient quorum: {got} commitments, threshold {threshold}")]
    InsufficientQuorum { got: usize, threshold: usize },
    #[error("peer commitment is the identity; the session key would be degenerate")]
    DegenerateKey,
    #[error("member name {0:?} does not fit in 16 bytes")]
    MemberName(String),
    #[error("malformed wire message: {0}")]
    Wire(&'static str),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A 16-byte opaque member identifier.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemberId([u8; 16]);

impl MemberId {
    pub const LEN: usize = 16;

    pub const fn from_bytes(bytes: [u8; 16]) -> Self {
        Self(bytes)
    }

    /// Zero-padded UTF-8 name of at most 16 bytes.
    pub fn from_name(name: &str) -> Result<Self, ProtocolError> {
        let raw = name.as_bytes();
        if raw.is_empty() || raw.len() > Self::LEN || raw.contains(&0) {
            return Err(ProtocolError::MemberName(name.to_owned()));
        }
        let mut bytes = [0u8; 16];
        bytes[..raw.len()].copy_from_slice(raw);
        Ok(Self(bytes))
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl fmt::Display for MemberId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = self.0.iter().position(|&b| b == 0).unwrap_or(16);
        let printable =
            self.0[end..].iter().all(|&b| b == 0) && end > 0 && self.0[..end].iter().all(|b| b.is_ascii_graphic());
        if printable {
            f.write_str(std::str::from_utf8(&self.0[..end]).expect("ascii"))
        } else {
            f.write_str(&hex::encode(self.0))
        }
    }
}

impl fmt::Debug for MemberId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MemberId({self})")
    }
}

/// The `(t, m, n)` schema: threshold, expected participants, enrolled members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupPolicy {
    t: usize,
    m: usize,
    n: usize,
}

impl GroupPolicy {
    pub fn new(t: usize, m: usize, n: usize) -> Result<Self, ProtocolError> {
        if t == 0 || t >= m || m >= n {
            return Err(ProtocolError::Policy { t, m, n });
        }
        Ok(Self { t, m, n })
    }

    pub fn threshold(&self) -> usize {
        self.t
    }

    pub fn participants(&self) -> usize {
        self.m
    }

    pub fn members(&self) -> usize {
        self.n
    }
}

/// What the GM publishes: `P`, `Q = s·P`, the suite and the policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPublicParams {
    pub group: GroupId,
    pub epoch: u32,
    pub suite: GroupSuite,
    pub generator: GroupElement,
    pub public_key: GroupElement,
    pub policy: GroupPolicy,
}

/// A member's share `(x_i, y_i = f(x_i))`.
#[derive(Clone, PartialEq, Eq)]
pub struct MemberCredential {
    pub member: MemberId,
    pub group: GroupId,
    pub epoch: u32,
    pub index: u64,
    pub share: u64,
}

impl fmt::Debug for MemberCredential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MemberCredential")
            .field("member", &self.member)
            .field("group", &self.group)
            .field("epoch", &self.epoch)
            .field("index", &self.index)
            .finish_non_exhaustive()
    }
}

impl MemberCredential {
    pub const WIRE_LEN: usize = 16 + 8 + 4 + 8 + 8;

    /// `[member 16][group 8][epoch 4][index 8][share 8]`, for secure-channel delivery only.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::WIRE_LEN);
        out.extend_from_slice(self.member.as_bytes());
        out.extend_from_slice(&self.group.to_be_bytes());
        out.extend_from_slice(&self.epoch.to_be_bytes());
        out.extend_from_slice(&self.index.to_be_bytes());
        out.extend_from_slice(&self.share.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProtocolError> {
        if bytes.len() != Self::WIRE_LEN {
            return Err(ProtocolError::Wire("credential length"));
        }
        let mut r = Reader(bytes);
        Ok(Self {
            member: MemberId(r.array()),
            group: u64::from_be_bytes(r.array()),
            epoch: u32::from_be_bytes(r.array()),
            index: u64::from_be_bytes(r.array()),
            share: u64::from_be_bytes(r.array()),
        })
    }
}

pub(crate) struct Reader<'a>(pub &'a [u8]);

impl Reader<'_> {
    pub fn array<const N: usize>(&mut self) -> [u8; N] {
        let (head, tail) = self.0.split_at(N);
        self.0 = tail;
        head.try_into().expect("length checked by caller")
    }

    pub fn rest(&self) -> &[u8] {
        self.0
    }
}

/// `f(x_i)·P ∥ ID_i`, released on the public channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Commitment {
    pub group: GroupId,
    pub member: MemberId,
    pub point: GroupElement,
}

impl Commitment {
    /// `[group id 8][ID_i 16][point]`.
    pub fn encode(&self, suite: &GroupSuite) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + suite.element_len());
        out.extend_from_slice(&self.group.to_be_bytes());
        out.extend_from_slice(self.member.as_bytes());
        out.extend_from_slice(&suite.encode_element(&self.point));
        out
    }

    pub fn decode(suite: &GroupSuite, bytes: &[u8]) -> Result<Self, ProtocolError> {
        if bytes.len() != 24 + suite.element_len() {
            return Err(ProtocolError::Wire("commitment length"));
        }
        let mut r = Reader(bytes);
        let group = u64::from_be_bytes(r.array());
        let member = MemberId(r.array());
        let point = suite.decode_element(r.rest())?;
        Ok(Self { group, member, point })
    }
}

/// Registry entry for one share index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareSlot {
    pub member: Option<MemberId>,
    pub used_for_auth: bool,
    pub handover: HandoverStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandoverStatus {
    Unused,
    Issued,
    Consumed,
}

/// The participant set and commitments of the last accepted round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptedRound {
    pub commitments: Vec<(u64, GroupElement)>,
    pub members: Vec<MemberId>,
}

/// Everything the Group Manager keeps between calls.
#[derive(Clone, PartialEq, Eq)]
pub struct GmState {
    pub(crate) polynomial: Polynomial,
    pub(crate) params: GroupPublicParams,
    pub(crate) member_ids: Vec<MemberId>,
    pub(crate) registry: BTreeMap<u64, ShareSlot>,
    pub(crate) last_accepted: Option<AcceptedRound>,
    pub(crate) admitted: Vec<(MemberId, u64)>,
    pub(crate) epoch: u32,
}

impl fmt::Debug for GmState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GmState")
            .field("params", &self.params)
            .field("registry", &self.registry)
            .field("last_accepted", &self.last_accepted)
            .field("epoch", &self.epoch)
            .finish_non_exhaustive()
    }
}

impl GmState {
    pub fn params(&self) -> &GroupPublicParams {
        &self.params
    }

    pub fn group(&self) -> GroupId {
        self.params.group
    }

    pub fn suite(&self) -> &GroupSuite {
        &self.params.suite
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn registry(&self) -> &BTreeMap<u64, ShareSlot> {
        &self.registry
    }

    pub fn last_accepted(&self) -> Option<&AcceptedRound> {
        self.last_accepted.as_ref()
    }

    /// Members admitted by hand-over in this epoch, with their credential index.
    pub fn admitted(&self) -> &[(MemberId, u64)] {
        &self.admitted
    }

    pub fn index_of(&self, member: &MemberId) -> Option<u64> {
        self.registry.iter().find(|(_, slot)| slot.member.as_ref() == Some(member)).map(|(&x, _)| x)
    }

    /// The secret polynomial. Exposed for oracle checks and the simulator's GM.
    pub fn polynomial(&self) -> &Polynomial {
        &self.polynomial
    }

    /// `f(x)·P`, computed by the GM for hand-over credentials.
    pub(crate) fn masked_share(&self, x: u64) -> GroupElement {
        self.params.suite.mul_generator(self.polynomial.eval(x), &mut OpCounter::default())
    }
}

/// Accept/reject verdict of a verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accepted,
    Rejected,
}

impl Verdict {
    pub fn is_accepted(self) -> bool {
        self == Verdict::Accepted
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Accepted => "accepted",
            Verdict::Rejected => "rejected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthResult {
    pub verdict: Verdict,
    /// Participant indices in the order the commitments arrived.
    pub participants: Vec<u64>,
    /// Members whose commitment was the identity element.
    pub suspicious_zero: Vec<MemberId>,
}

/// A pairwise key in `G_T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionKey {
    pub value: TargetElement,
    pub sender: MemberId,
    pub receiver: MemberId,
}

/// Samples `f` and issues credentials for `member_ids`, indexed `1..=n` in
/// the given order.
pub fn gm_init<R: Rng + ?Sized>(
    group: GroupId,
    policy: GroupPolicy,
    suite: &GroupSuite,
    member_ids: &[MemberId],
    rng: &mut R,
) -> Result<(GmState, GroupPublicParams, Vec<MemberCredential>), ProtocolError> {
    let polynomial = sample_nonzero_secret(suite, policy, rng)?;
    gm_init_with_polynomial(group, policy, suite, member_ids, polynomial)
}

/// `s = 0` would publish the identity as `Q` and make every session key
/// trivial, so it is resampled.
fn sample_nonzero_secret<R: Rng + ?Sized>(
    suite: &GroupSuite,
    policy: GroupPolicy,
    rng: &mut R,
) -> Result<Polynomial, ProtocolError> {
    loop {
        let polynomial = Polynomial::sample(suite.field(), policy.threshold(), rng)?;
        if polynomial.secret() != 0 {
            return Ok(polynomial);
        }
    }
}

/// [`gm_init`] with a caller-chosen polynomial.
pub fn gm_init_with_polynomial(
    group: GroupId,
    policy: GroupPolicy,
    suite: &GroupSuite,
    member_ids: &[MemberId],
    polynomial: Polynomial,
) -> Result<(GmState, GroupPublicParams, Vec<MemberCredential>), ProtocolError> {
    if member_ids.len() != policy.members() {
        return Err(ProtocolError::MemberCount { expected: policy.members(), got: member_ids.len() });
    }
    let mut seen = BTreeSet::new();
    for id in member_ids {
        if !seen.insert(*id) {
            return Err(ProtocolError::DuplicateMember(*id));
        }
    }
    if polynomial.field() != suite.field() || polynomial.threshold() != policy.threshold() {
        return Err(ProtocolError::Policy { t: polynomial.threshold(), m: policy.participants(), n: policy.members() });
    }
    let mut state = GmState {
        params: publish(group, 0, suite, policy, &polynomial),
        polynomial,
        member_ids: member_ids.to_vec(),
        registry: BTreeMap::new(),
        last_accepted: None,
        admitted: Vec::new(),
        epoch: 0,
    };
    let creds = enroll(&mut state);
    let params = state.params.clone();
    Ok((state, params, creds))
}

fn publish(
    group: GroupId,
    epoch: u32,
    suite: &GroupSuite,
    policy: GroupPolicy,
    polynomial: &Polynomial,
) -> GroupPublicParams {
    GroupPublicParams {
        group,
        epoch,
        suite: suite.clone(),
        generator: suite.generator(),
        public_key: suite.mul_generator(polynomial.secret(), &mut OpCounter::default()),
        policy,
    }
}

fn enroll(state: &mut GmState) -> Vec<MemberCredential> {
    state.registry.clear();
    state
        .member_ids
        .iter()
        .zip(1u64..)
        .map(|(&member, index)| {
            state.registry.insert(
                index,
                ShareSlot { member: Some(member), used_for_auth: false, handover: HandoverStatus::Unused },
            );
            MemberCredential {
                member,
                group: state.params.group,
                epoch: state.epoch,
                index,
                share: state.polynomial.eval(index),
            }
        })
        .collect()
}

/// The member's only computation: one scalar multiplication `f(x_i)·P`.
pub fn member_commit(cred: &MemberCredential, suite: &GroupSuite) -> Commitment {
    member_commit_counted(cred, suite, &mut OpCounter::default())
}

pub fn member_commit_counted(cred: &MemberCredential, suite: &GroupSuite, ops: &mut OpCounter) -> Commitment {
    Commitment { group: cred.group, member: cred.member, point: suite.mul_generator(cred.share, ops) }
}

/// Computes `c_i = λ_i·(f(x_i)·P)` over the participant set and checks
/// `Σ c_i = Q`. On acceptance the round is cached for hand-over.
pub fn gm_collect_and_verify(state: &mut GmState, commitments: &[Commitment]) -> Result<AuthResult, ProtocolError> {
    let suite = state.params.suite.clone();
    let mut indices = Vec::with_capacity(commitments.len());
    let mut members = Vec::with_capacity(commitments.len());
    let mut suspicious_zero = Vec::new();
    for c in commitments {
        if c.group != state.params.group {
            return Err(ProtocolError::WrongGroup { expected: state.params.group, got: c.group });
        }
        if members.contains(&c.member) {
            return Err(ProtocolError::DuplicateMember(c.member));
        }
        let x = state.index_of(&c.member).ok_or(ProtocolError::UnknownMember(c.member))?;
        if !suite.contains(&c.point) {
            return Err(GroupError::NotInSubgroup.into());
        }
        if suite.is_identity(&c.point) {
            suspicious_zero.push(c.member);
        }
        indices.push(x);
        members.push(c.member);
    }
    let threshold = state.params.policy.threshold();
    if commitments.len() < threshold {
        return Err(ProtocolError::InsufficientQuorum { got: commitments.len(), threshold });
    }

    let points: Vec<_> = indices.iter().copied().zip(commitments.iter().map(|c| c.point)).collect();
    let verdict =
        if weighted_sum(&suite, &points)? == state.params.public_key { Verdict::Accepted } else { Verdict::Rejected };
    if verdict.is_accepted() {
        for x in &indices {
            if let Some(slot) = state.registry.get_mut(x) {
                slot.used_for_auth = true;
            }
        }
        state.last_accepted = Some(AcceptedRound { commitments: points, members });
    }
    Ok(AuthResult { verdict, participants: indices, suspicious_zero })
}

/// `Σ λ_i·g_i` with `λ` taken over the x-coordinates of `points`.
pub(crate) fn weighted_sum(suite: &GroupSuite, points: &[(u64, GroupElement)]) -> Result<GroupElement, ProtocolError> {
    let xs: Vec<u64> = points.iter().map(|p| p.0).collect();
    let lambdas = lagrange_coefficients_at_zero(&suite.field(), &xs)?;
    let mut acc = suite.identity();
    for ((_, g), l) in points.iter().zip(lambdas) {
        acc = suite.add(&acc, &suite.scalar_mul(l, g)?)?;
    }
    Ok(acc)
}

/// Rekeys the whole group after a failed verification: a fresh polynomial,
/// fresh shares for all `n` members and a new epoch.
pub fn gm_reinitialize<R: Rng + ?Sized>(
    state: &mut GmState,
    rng: &mut R,
) -> Result<(GroupPublicParams, Vec<MemberCredential>), ProtocolError> {
    let suite = state.params.suite.clone();
    let policy = state.params.policy;
    state.polynomial = sample_nonzero_secret(&suite, policy, rng)?;
    state.epoch += 1;
    state.params = publish(state.params.group, state.epoch, &suite, policy, &state.polynomial);
    state.last_accepted = None;
    state.admitted.clear();
    let creds = enroll(state);
    Ok((state.params.clone(), creds))
}

/// `e(y_own·(y_peer·P), Q)`. Both ends of a pair derive the same value.
pub fn derive_session_key(
    own: &MemberCredential,
    peer: &Commitment,
    params: &GroupPublicParams,
) -> Result<SessionKey, ProtocolError> {
    let suite = &params.suite;
    if suite.is_identity(&peer.point) || own.share == 0 {
        return Err(ProtocolError::DegenerateKey);
    }
    let combined = suite.scalar_mul(own.share, &peer.point)?;
    let value = suite.pairing(&combined, &params.public_key)?;
    if value == suite.target_identity() {
        return Err(ProtocolError::DegenerateKey);
    }
    Ok(SessionKey { value, sender: own.member, receiver: peer.member })
}
