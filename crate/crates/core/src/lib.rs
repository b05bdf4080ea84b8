//! Group authentication for IoT groups: Shamir sharing lifted into a
//! pairing-friendly group, pairwise session keys, inter-group hand-over,
//! a Harn-scheme baseline and a deterministic protocol simulator.

pub mod algebra;
pub mod baselines;
#[doc(hidden)]
pub mod fuzzing;
pub mod groups;
pub mod handover;
pub mod protocol;
pub mod simnet;
