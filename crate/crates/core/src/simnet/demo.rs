//! Passive eavesdropper demo: replay a recorded round through the share
//! recovery attack against both schemes.

use std::fmt;

use super::{MessageKind, Scenario, SimConfig, SimError, Simulation, Step};
use crate::baselines::{chien_attack_harn, chien_attack_proposed, DEFAULT_DL_BOUND};
use crate::protocol::Commitment;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackReport {
    pub seed: u64,
    pub harn_suite: String,
    pub harn_secret: u64,
    pub harn_recovered: Option<u64>,
    pub proposed_suite: String,
    pub proposed_order: u64,
    /// `Err` carries the refusal message.
    pub proposed_outcome: Result<u64, String>,
    pub toy_suite: String,
    pub toy_secret: u64,
    pub toy_recovered: Option<u64>,
}

impl AttackReport {
    pub fn harn_broken(&self) -> bool {
        self.harn_recovered == Some(self.harn_secret)
    }

    pub fn proposed_refused(&self) -> bool {
        self.proposed_outcome.is_err()
    }

    pub fn toy_broken(&self) -> bool {
        self.toy_recovered == Some(self.toy_secret)
    }
}

impl fmt::Display for AttackReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<u64>| v.map_or("none".to_owned(), |v| v.to_string());
        writeln!(f, "seed {}", self.seed)?;
        writeln!(
            f,
            "[harn] suite {} secret {} recovered {}",
            self.harn_suite,
            self.harn_secret,
            show(self.harn_recovered)
        )?;
        writeln!(f, "[harn] recovered == actual: {}", self.harn_broken())?;
        match &self.proposed_outcome {
            Ok(s) => {
                writeln!(f, "[proposed] suite {} order {} recovered {s}", self.proposed_suite, self.proposed_order)?
            }
            Err(e) => {
                writeln!(f, "[proposed] suite {} order {} refused: {e}", self.proposed_suite, self.proposed_order)?
            }
        }
        writeln!(
            f,
            "[proposed] toy suite {} secret {} recovered {} (discrete logs by exhaustion)",
            self.toy_suite,
            self.toy_secret,
            show(self.toy_recovered)
        )
    }
}

fn demo_scenario(seed: u64, suite: &str, harn: bool) -> Scenario {
    let members: Vec<String> = ["A", "B", "C", "D", "E"].map(String::from).to_vec();
    let participants = members[..4].to_vec();
    let step = if harn {
        Step::HarnRound { group: 1, participants, expect: Some("accepted".into()) }
    } else {
        Step::Authenticate { group: 1, participants, expect: Some("accepted".into()) }
    };
    Scenario {
        seed,
        suite: suite.into(),
        groups: vec![super::GroupDef { id: 1, t: 3, m: 4, members }],
        script: vec![step],
    }
}

/// Recovers the secret from recorded public commitments, or the refusal.
fn attack_commitments(scenario: &Scenario) -> Result<(u64, String, u64, Result<u64, String>), SimError> {
    let sim = Simulation::run_to_end(scenario, SimConfig::default())?;
    let suite = sim.suite().clone();
    let state = sim.gm_state(1).expect("group 1");
    let t = state.params().policy.threshold();
    let observed: Vec<_> = sim
        .transcript()
        .public_payloads(MessageKind::Commitment)
        .into_iter()
        .filter_map(|(_, bytes)| Commitment::decode(&suite, &bytes).ok())
        .filter_map(|c| Some((state.index_of(&c.member)?, c.point)))
        .collect();
    let outcome = chien_attack_proposed(&suite, t, &observed, DEFAULT_DL_BOUND)
        .map(|poly| poly.secret())
        .map_err(|e| e.to_string());
    Ok((state.polynomial().secret(), suite.name().to_owned(), suite.order(), outcome))
}

/// Runs the three demonstrations for one seed.
pub fn attack_demo(seed: u64) -> Result<AttackReport, SimError> {
    let harn = demo_scenario(seed, "mock61", true);
    let sim = Simulation::run_to_end(&harn, SimConfig::default())?;
    let field = sim.suite().field();
    let state = sim.gm_state(1).expect("group 1");
    let released: Vec<(u64, u64)> = sim
        .transcript()
        .public_payloads(MessageKind::HarnShare)
        .into_iter()
        .filter(|(_, p)| p.len() == 40)
        .map(|(_, p)| {
            let word = |r: std::ops::Range<usize>| u64::from_be_bytes(p[r].try_into().expect("8 bytes"));
            (word(24..32), word(32..40))
        })
        .collect();
    let harn_recovered =
        chien_attack_harn(&field, state.params().policy.threshold(), &released).ok().map(|p| p.secret());

    let (_, proposed_suite, proposed_order, proposed_outcome) =
        attack_commitments(&demo_scenario(seed, "mock61", false))?;
    let (toy_secret, toy_suite, _, toy_outcome) = attack_commitments(&demo_scenario(seed, "mock", false))?;

    Ok(AttackReport {
        seed,
        harn_suite: sim.suite().name().to_owned(),
        harn_secret: state.polynomial().secret(),
        harn_recovered,
        proposed_suite,
        proposed_order,
        proposed_outcome,
        toy_suite,
        toy_secret,
        toy_recovered: toy_outcome.ok(),
    })
}
