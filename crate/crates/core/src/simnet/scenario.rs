//! Scenario files: TOML documents with top-level `seed`, `suite`, `groups`
//! and `script`. See `docs/scenario.md` for the schema.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::groups::GroupSuite;
use crate::protocol::{GroupId, GroupPolicy, MemberId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    #[serde(default = "default_suite")]
    pub suite: String,
    pub groups: Vec<GroupDef>,
    #[serde(default)]
    pub script: Vec<Step>,
}

fn default_suite() -> String {
    "mock".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDef {
    pub id: GroupId,
    pub t: usize,
    pub m: usize,
    /// `n` is the length of this list.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Authenticate {
        group: GroupId,
        participants: Vec<String>,
        #[serde(default)]
        expect: Option<String>,
    },
    /// Harn-style round: participants release cleartext shares.
    HarnRound {
        group: GroupId,
        participants: Vec<String>,
        #[serde(default)]
        expect: Option<String>,
    },
    Handover {
        member: String,
        from: GroupId,
        to: GroupId,
        #[serde(default)]
        expect: Option<String>,
    },
    /// Re-sends the member's last hand-over presentation.
    Replay {
        member: String,
        #[serde(default)]
        expect: Option<String>,
    },
    DeriveKey {
        group: GroupId,
        a: String,
        b: String,
        #[serde(default)]
        expect: Option<String>,
    },
    Reinit {
        group: GroupId,
    },
    /// Arms the adversary tap for the next non-tamper step.
    Tamper {
        sender: String,
        kind: MessageKind,
        #[serde(default)]
        receiver: Option<String>,
        mutation: Mutation,
    },
}

impl Step {
    pub fn expect(&self) -> Option<&str> {
        match self {
            Step::Authenticate { expect, .. }
            | Step::HarnRound { expect, .. }
            | Step::Handover { expect, .. }
            | Step::Replay { expect, .. }
            | Step::DeriveKey { expect, .. } => expect.as_deref(),
            Step::Reinit { .. } | Step::Tamper { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Credential,
    Commitment,
    AuthVerdict,
    HarnShare,
    HandoverCredential,
    HandoverPresentation,
    HandoverNotice,
}

impl MessageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::Credential => "credential",
            MessageKind::Commitment => "commitment",
            MessageKind::AuthVerdict => "auth_verdict",
            MessageKind::HarnShare => "harn_share",
            MessageKind::HandoverCredential => "handover_credential",
            MessageKind::HandoverPresentation => "handover_presentation",
            MessageKind::HandoverNotice => "handover_notice",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mutation {
    Noop,
    /// XOR `mask` into payload byte `byte`.
    FlipByte {
        byte: usize,
        mask: u8,
    },
    /// Replace the carried point `g` by `g + d·P`.
    AddMultiple {
        d: u64,
    },
}

/// Named suite choices accepted by scenarios and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteChoice {
    /// Mock backend with `q = 13`.
    Mock,
    /// Mock backend with any prime `q`.
    MockQ(u64),
    Curve43,
    CurveLarge,
}

impl SuiteChoice {
    pub fn build(self) -> Result<GroupSuite, SimError> {
        Ok(match self {
            SuiteChoice::Mock => GroupSuite::mock13(),
            SuiteChoice::MockQ(q) => GroupSuite::mock(q).map_err(|e| SimError::Validation(e.to_string()))?,
            SuiteChoice::Curve43 => GroupSuite::curve43(),
            SuiteChoice::CurveLarge => GroupSuite::curve_large(),
        })
    }
}

impl FromStr for SuiteChoice {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock" => Ok(SuiteChoice::Mock),
            "mock61" => Ok(SuiteChoice::MockQ(crate::algebra::PrimeField::MERSENNE_61)),
            "curve43" => Ok(SuiteChoice::Curve43),
            "curve-large" => Ok(SuiteChoice::CurveLarge),
            other => other
                .strip_prefix("mock:")
                .and_then(|q| q.parse().ok())
                .map(SuiteChoice::MockQ)
                .ok_or_else(|| SimError::Validation(format!("unknown suite {other:?}"))),
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Checks every reference before anything runs.
    pub fn validate(&self) -> Result<ValidScenario, SimError> {
        let bad = |msg: String| Err(SimError::Validation(msg));
        let suite: SuiteChoice = self.suite.parse()?;
        suite.build()?;
        let mut groups = BTreeMap::new();
        let mut home = BTreeMap::new();
        for g in &self.groups {
            let policy = GroupPolicy::new(g.t, g.m, g.members.len())
                .map_err(|e| SimError::Validation(format!("group {}: {e}", g.id)))?;
            if groups.insert(g.id, policy).is_some() {
                return bad(format!("duplicate group id {}", g.id));
            }
            for name in &g.members {
                MemberId::from_name(name).map_err(|e| SimError::Validation(e.to_string()))?;
                if home.insert(name.clone(), g.id).is_some() {
                    return bad(format!("member {name:?} appears twice"));
                }
            }
        }
        let in_group = |name: &str, group: GroupId| -> Result<(), SimError> {
            match home.get(name) {
                Some(&g) if g == group => Ok(()),
                Some(&g) => Err(SimError::Validation(format!("member {name:?} belongs to group {g}, not {group}"))),
                None => Err(SimError::Validation(format!("unknown member {name:?}"))),
            }
        };
        let known_group = |g: GroupId| -> Result<(), SimError> {
            if groups.contains_key(&g) {
                Ok(())
            } else {
                Err(SimError::Validation(format!("unknown group {g}")))
            }
        };
        let known_entity = |name: &str| {
            home.contains_key(name)
                || name == "*"
                || name
                    .strip_prefix("gm:")
                    .and_then(|g| g.parse::<GroupId>().ok())
                    .is_some_and(|g| groups.contains_key(&g))
        };
        for (i, step) in self.script.iter().enumerate() {
            match step {
                Step::Authenticate { group, participants, .. } | Step::HarnRound { group, participants, .. } => {
                    known_group(*group)?;
                    let mut seen = BTreeSet::new();
                    for p in participants {
                        in_group(p, *group)?;
                        if !seen.insert(p) {
                            return bad(format!("step {i}: participant {p:?} listed twice"));
                        }
                    }
                }
                Step::Handover { member, from, to, .. } => {
                    known_group(*to)?;
                    in_group(member, *from)?;
                    if from == to {
                        return bad(format!("step {i}: hand-over within one group"));
                    }
                }
                Step::Replay { member, .. } => {
                    if !home.contains_key(member) {
                        return bad(format!("step {i}: unknown member {member:?}"));
                    }
                }
                Step::DeriveKey { group, a, b, .. } => {
                    in_group(a, *group)?;
                    in_group(b, *group)?;
                    if a == b {
                        return bad(format!("step {i}: key with oneself"));
                    }
                }
                Step::Reinit { group } => known_group(*group)?,
                Step::Tamper { sender, receiver, .. } => {
                    if !known_entity(sender) || receiver.as_deref().is_some_and(|r| !known_entity(r)) {
                        return bad(format!("step {i}: tamper selector names an unknown entity"));
                    }
                    if !self.script[i + 1..].iter().any(|s| !matches!(s, Step::Tamper { .. })) {
                        return bad(format!("step {i}: tamper has no following step"));
                    }
                }
            }
        }
        Ok(ValidScenario { suite, policies: groups, home })
    }
}

/// Facts established by [`Scenario::validate`].
#[derive(Debug, Clone)]
pub struct ValidScenario {
    pub suite: SuiteChoice,
    pub policies: BTreeMap<GroupId, GroupPolicy>,
    pub home: BTreeMap<String, GroupId>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
seed = 7
suite = "mock"

[[groups]]
id = 1
t = 2
m = 3
members = ["A", "B", "C", "D"]

[[script]]
op = "tamper"
sender = "B"
kind = "commitment"
mutation = { kind = "add_multiple", d = 1 }

[[script]]
op = "authenticate"
group = 1
participants = ["A", "B", "C"]
expect = "rejected"
"#;

    #[test]
    fn parses_and_validates() {
        let s = Scenario::from_toml(BASIC).unwrap();
        assert_eq!(s.script.len(), 2);
        assert!(matches!(s.script[0], Step::Tamper { kind: MessageKind::Commitment, .. }));
        let v = s.validate().unwrap();
        assert_eq!(v.suite, SuiteChoice::Mock);
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Scenario::from_toml("seed = 7\ngroups = [\n").unwrap_err();
        let SimError::Parse(msg) = err else { panic!() };
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn validation_failures() {
        let mut s = Scenario::from_toml(BASIC).unwrap();
        s.script.push(Step::Authenticate { group: 9, participants: vec![], expect: None });
        assert!(s.validate().is_err());

        let mut s = Scenario::from_toml(BASIC).unwrap();
        s.script.push(Step::DeriveKey { group: 1, a: "A".into(), b: "Z".into(), expect: None });
        assert!(s.validate().is_err());

        let mut s = Scenario::from_toml(BASIC).unwrap();
        s.script.pop();
        assert!(s.validate().is_err(), "dangling tamper");

        let mut s = Scenario::from_toml(BASIC).unwrap();
        s.groups[0].m = 4;
        assert!(s.validate().is_err(), "policy");

        let mut s = Scenario::from_toml(BASIC).unwrap();
        s.suite = "mock:12".into();
        assert!(s.validate().is_err());
    }

    #[test]
    fn suite_names() {
        assert_eq!("curve43".parse::<SuiteChoice>().unwrap(), SuiteChoice::Curve43);
        assert_eq!("mock:101".parse::<SuiteChoice>().unwrap(), SuiteChoice::MockQ(101));
        assert!("ed25519".parse::<SuiteChoice>().is_err());
    }
}
