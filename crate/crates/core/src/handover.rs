//! Inter-group hand-over.
//!
//! The target GM takes a share index that did not take part in its last
//! accepted round, computes `f(x_k)·P` and hands it to peer GMs over a secure
//! channel. A roaming member presents that point to the target GM, which
//! recomputes the Lagrange weights over the enlarged set `X ∪ {x_k}` and
//! accepts iff the weighted sum of its cached commitments plus the newcomer's
//! point equals `Q`. Every attempt, accepted or not, is followed by a refresh
//! to the next unused index; credentials are single-use and epoch-bound.

use thiserror::Error;

use crate::groups::{GroupElement, GroupSuite};
use crate::protocol::{weighted_sum, GmState, GroupId, HandoverStatus, MemberId, ProtocolError, Reader, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HandoverError {
    #[error("no accepted authentication round to anchor the hand-over")]
    NoAcceptedRound,
    #[error("no unused share index left in group {0}")]
    CapacityExhausted(GroupId),
    #[error("credential issued by group {got}, presented to group {expected}")]
    WrongIssuer { expected: GroupId, got: GroupId },
    #[error("credential epoch {got} does not match current epoch {current}")]
    UnknownEpoch { got: u32, current: u32 },
    #[error("index {0} was never issued as a hand-over credential")]
    NotIssued(u64),
    #[error("index {0} collides with the cached participant set")]
    IndexCollision(u64),
    #[error("credential at index {0} was already consumed")]
    Replay(u64),
    #[error("malformed hand-over message: {0}")]
    Wire(&'static str),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl From<crate::groups::GroupError> for HandoverError {
    fn from(e: crate::groups::GroupError) -> Self {
        HandoverError::Protocol(e.into())
    }
}

/// `f(x_k)·P` for an unused index `x_k` of the issuing group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HandoverCredential {
    pub issuer: GroupId,
    pub epoch: u32,
    pub index: u64,
    pub point: GroupElement,
}

/// What the roaming member sends to the target GM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HandoverMessage {
    pub issuer: GroupId,
    pub epoch: u32,
    pub index: u64,
    pub member: MemberId,
    pub point: GroupElement,
}

impl HandoverMessage {
    pub const HEADER_LEN: usize = 8 + 4 + 8 + 16;

    /// `[issuer 8][epoch 4][index 8][member 16][point]`, big-endian.
    pub fn encode(&self, suite: &GroupSuite) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::HEADER_LEN + suite.element_len());
        out.extend_from_slice(&self.issuer.to_be_bytes());
        out.extend_from_slice(&self.epoch.to_be_bytes());
        out.extend_from_slice(&self.index.to_be_bytes());
        out.extend_from_slice(self.member.as_bytes());
        out.extend_from_slice(&suite.encode_element(&self.point));
        out
    }

    pub fn decode(suite: &GroupSuite, bytes: &[u8]) -> Result<Self, HandoverError> {
        if bytes.len() != Self::HEADER_LEN + suite.element_len() {
            return Err(HandoverError::Wire("length"));
        }
        let mut r = Reader(bytes);
        let issuer = u64::from_be_bytes(r.array());
        let epoch = u32::from_be_bytes(r.array());
        let index = u64::from_be_bytes(r.array());
        let member = MemberId::from_bytes(r.array());
        let point = suite.decode_element(r.rest())?;
        Ok(Self { issuer, epoch, index, member, point })
    }
}

impl HandoverCredential {
    /// GM-to-GM distribution uses the message layout with a zero member id.
    pub fn encode(&self, suite: &GroupSuite) -> Vec<u8> {
        handover_present(MemberId::from_bytes([0; 16]), self).encode(suite)
    }

    pub fn decode(suite: &GroupSuite, bytes: &[u8]) -> Result<Self, HandoverError> {
        let msg = HandoverMessage::decode(suite, bytes)?;
        Ok(Self { issuer: msg.issuer, epoch: msg.epoch, index: msg.index, point: msg.point })
    }
}

/// Notice sent to peer GMs after a successful hand-over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandoverNotice {
    pub group: GroupId,
    pub epoch: u32,
    pub index: u64,
    pub member: MemberId,
}

impl HandoverNotice {
    pub const WIRE_LEN: usize = 8 + 4 + 8 + 16;

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::WIRE_LEN);
        out.extend_from_slice(&self.group.to_be_bytes());
        out.extend_from_slice(&self.epoch.to_be_bytes());
        out.extend_from_slice(&self.index.to_be_bytes());
        out.extend_from_slice(self.member.as_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, HandoverError> {
        if bytes.len() != Self::WIRE_LEN {
            return Err(HandoverError::Wire("notice length"));
        }
        let mut r = Reader(bytes);
        Ok(Self {
            group: u64::from_be_bytes(r.array()),
            epoch: u32::from_be_bytes(r.array()),
            index: u64::from_be_bytes(r.array()),
            member: MemberId::from_bytes(r.array()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandoverOutcome {
    pub verdict: Verdict,
    /// Present iff accepted.
    pub notice: Option<HandoverNotice>,
}

/// Issues `f(x_k)·P` for the lowest index that neither took part in an
/// accepted round nor was handed out before.
pub fn handover_issue(state: &mut GmState) -> Result<HandoverCredential, HandoverError> {
    if state.last_accepted.is_none() {
        return Err(HandoverError::NoAcceptedRound);
    }
    let index = state
        .registry
        .iter()
        .find(|(_, slot)| !slot.used_for_auth && slot.handover == HandoverStatus::Unused)
        .map(|(&x, _)| x)
        .ok_or(HandoverError::CapacityExhausted(state.group()))?;
    state.registry.get_mut(&index).expect("present").handover = HandoverStatus::Issued;
    Ok(HandoverCredential { issuer: state.group(), epoch: state.epoch, index, point: state.masked_share(index) })
}

/// Wraps a credential obtained from the member's home GM for presentation.
pub fn handover_present(member: MemberId, cred: &HandoverCredential) -> HandoverMessage {
    HandoverMessage { issuer: cred.issuer, epoch: cred.epoch, index: cred.index, member, point: cred.point }
}

/// Checks a presented credential against the cached commitments of the last
/// accepted round. The credential is consumed whatever the verdict.
pub fn handover_verify(state: &mut GmState, msg: &HandoverMessage) -> Result<HandoverOutcome, HandoverError> {
    if msg.issuer != state.group() {
        return Err(HandoverError::WrongIssuer { expected: state.group(), got: msg.issuer });
    }
    if msg.epoch != state.epoch {
        return Err(HandoverError::UnknownEpoch { got: msg.epoch, current: state.epoch });
    }
    let status = state.registry.get(&msg.index).map(|slot| slot.handover);
    match status {
        Some(HandoverStatus::Consumed) => return Err(HandoverError::Replay(msg.index)),
        Some(HandoverStatus::Issued) => {}
        _ => return Err(HandoverError::NotIssued(msg.index)),
    }
    let round = state.last_accepted.as_ref().ok_or(HandoverError::NoAcceptedRound)?;
    if round.commitments.iter().any(|(x, _)| *x == msg.index) {
        return Err(HandoverError::IndexCollision(msg.index));
    }
    let suite = state.suite().clone();
    if !suite.contains(&msg.point) {
        return Err(crate::groups::GroupError::NotInSubgroup.into());
    }
    let mut points = round.commitments.clone();
    points.push((msg.index, msg.point));
    let accepted = weighted_sum(&suite, &points)? == state.params().public_key;

    state.registry.get_mut(&msg.index).expect("present").handover = HandoverStatus::Consumed;
    if !accepted {
        return Ok(HandoverOutcome { verdict: Verdict::Rejected, notice: None });
    }
    state.admitted.push((msg.member, msg.index));
    Ok(HandoverOutcome {
        verdict: Verdict::Accepted,
        notice: Some(HandoverNotice { group: state.group(), epoch: state.epoch, index: msg.index, member: msg.member }),
    })
}

/// Retires `previous` and issues the next standing credential. Runs after
/// every attempt, whether it was accepted or not.
pub fn handover_refresh(
    state: &mut GmState,
    previous: &HandoverCredential,
) -> Result<HandoverCredential, HandoverError> {
    if previous.issuer == state.group() && previous.epoch == state.epoch {
        if let Some(slot) = state.registry.get_mut(&previous.index) {
            slot.handover = HandoverStatus::Consumed;
        }
    }
    handover_issue(state)
}
