//! Comparison baselines: Harn's cleartext-share group authentication, the
//! k-share attack that breaks it, and the closed-form cost model.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::algebra::{interpolate_polynomial, interpolate_secret, AlgebraError, Polynomial, PrimeField};
use crate::groups::{GroupElement, GroupSuite, OpCounter};
use crate::protocol::{member_commit_counted, GroupId, MemberCredential, MemberId, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("threshold {t} exceeds member count {n}")]
    ThresholdTooLarge { t: usize, n: usize },
    #[error("need at least {needed} shares, got {got}")]
    InsufficientShares { needed: usize, got: usize },
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
    #[error("participant count must be at least 1")]
    EmptyRange,
    #[error("invalid range {min}..={max}")]
    InvalidRange { min: u64, max: u64 },
    #[error(
        "discrete-log work bound exceeded: group order {order} > bound {bound}; \
         observed values are group elements, not shares"
    )]
    DlBoundExceeded { order: u64, bound: u64 },
    #[error("no discrete log found for an observed element")]
    NoDiscreteLog,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Output of Harn's dealer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarnDealing {
    pub field: PrimeField,
    pub threshold: usize,
    pub polynomial: Polynomial,
    /// Cleartext `(x_i, f(x_i))`, `x_i = 1..=n`.
    pub shares: Vec<(u64, u64)>,
}

impl HarnDealing {
    pub fn secret(&self) -> u64 {
        self.polynomial.secret()
    }
}

pub fn harn_init<R: Rng + ?Sized>(
    t: usize,
    n: usize,
    field: PrimeField,
    rng: &mut R,
) -> Result<HarnDealing, BaselineError> {
    if t > n {
        return Err(BaselineError::ThresholdTooLarge { t, n });
    }
    let polynomial = Polynomial::sample(field, t, rng)?;
    Ok(harn_deal(polynomial, n))
}

/// Deals `n` shares of a given polynomial.
pub fn harn_deal(polynomial: Polynomial, n: usize) -> HarnDealing {
    let shares = (1..=n as u64).map(|x| (x, polynomial.eval(x))).collect();
    HarnDealing { field: polynomial.field(), threshold: polynomial.threshold(), polynomial, shares }
}

/// Interpolates the released shares and compares with the dealer's secret.
pub fn harn_authenticate(dealing: &HarnDealing, released: &[(u64, u64)]) -> Result<Verdict, BaselineError> {
    if released.len() < dealing.threshold {
        return Err(BaselineError::InsufficientShares { needed: dealing.threshold, got: released.len() });
    }
    let token = interpolate_secret(&dealing.field, released)?;
    Ok(if token == dealing.secret() { Verdict::Accepted } else { Verdict::Rejected })
}

/// Recovers the full dealer polynomial from `t` observed cleartext shares.
pub fn chien_attack_harn(field: &PrimeField, t: usize, observed: &[(u64, u64)]) -> Result<Polynomial, BaselineError> {
    if observed.len() < t || t == 0 {
        return Err(BaselineError::InsufficientShares { needed: t.max(1), got: observed.len() });
    }
    Ok(interpolate_polynomial(field, &observed[..t])?)
}

/// Work bound for brute-force discrete logs: `2^20` group operations.
pub const DEFAULT_DL_BOUND: u64 = 1 << 20;

/// Exhaustive discrete log of `target` to base `P`, at most `suite.order()` steps.
pub fn discrete_log_bruteforce(suite: &GroupSuite, target: &GroupElement, bound: u64) -> Result<u64, BaselineError> {
    if suite.order() > bound {
        return Err(BaselineError::DlBoundExceeded { order: suite.order(), bound });
    }
    let p = suite.generator();
    let mut acc = suite.identity();
    for k in 0..suite.order() {
        if acc == *target {
            return Ok(k);
        }
        acc = suite.add(&acc, &p).map_err(|_| BaselineError::NoDiscreteLog)?;
    }
    Err(BaselineError::NoDiscreteLog)
}

/// The same attack aimed at the masked shares `f(x_i)·P` of the proposed
/// scheme: it needs one discrete log per observed element and refuses to
/// start when the group order exceeds `dl_bound`.
pub fn chien_attack_proposed(
    suite: &GroupSuite,
    t: usize,
    observed: &[(u64, GroupElement)],
    dl_bound: u64,
) -> Result<Polynomial, BaselineError> {
    if observed.len() < t || t == 0 {
        return Err(BaselineError::InsufficientShares { needed: t.max(1), got: observed.len() });
    }
    if suite.order() > dl_bound {
        return Err(BaselineError::DlBoundExceeded { order: suite.order(), bound: dl_bound });
    }
    let shares = observed[..t]
        .iter()
        .map(|(x, g)| Ok((*x, discrete_log_bruteforce(suite, g, dl_bound)?)))
        .collect::<Result<Vec<_>, BaselineError>>()?;
    chien_attack_harn(&suite.field(), t, &shares)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Harn,
    Chien,
    Proposed,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Harn, Scheme::Chien, Scheme::Proposed];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Harn => "harn",
            Scheme::Chien => "chien",
            Scheme::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "harn" => Ok(Scheme::Harn),
            "chien" => Ok(Scheme::Chien),
            "proposed" => Ok(Scheme::Proposed),
            other => Err(BaselineError::UnknownScheme(other.to_owned())),
        }
    }
}

/// Per-member cost in field multiplications `T_mul,q` for `m` participants.
pub fn cost_model(scheme: Scheme, m: u64) -> Result<u64, BaselineError> {
    if m == 0 {
        return Err(BaselineError::EmptyRange);
    }
    Ok(match scheme {
        Scheme::Harn => 45 * m + 1418,
        Scheme::Chien => 7 * m + 6785,
        // one EC scalar multiplication, independent of m
        Scheme::Proposed => 1189,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostRow {
    pub scheme: Scheme,
    pub m: u64,
    pub cost: u64,
}

/// Rows for every scheme at every `m` in `m_min..=m_max`, grouped by `m`.
pub fn cost_rows(m_min: u64, m_max: u64) -> Result<Vec<CostRow>, BaselineError> {
    if m_min == 0 || m_min > m_max {
        return Err(BaselineError::InvalidRange { min: m_min, max: m_max });
    }
    let mut rows = Vec::with_capacity(3 * (m_max - m_min + 1) as usize);
    for m in m_min..=m_max {
        for scheme in Scheme::ALL {
            rows.push(CostRow { scheme, m, cost: cost_model(scheme, m)? });
        }
    }
    Ok(rows)
}

/// CSV with header `scheme,m,cost`, one newline-terminated row per entry.
pub fn write_cost_csv<W: std::io::Write>(out: &mut W, rows: &[CostRow]) -> std::io::Result<()> {
    writeln!(out, "scheme,m,cost")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.scheme, r.m, r.cost)?;
    }
    Ok(())
}

/// Measured work of one `member_commit`, next to the model constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemberCost {
    pub ops: OpCounter,
    pub scalar_bits: u32,
    pub model: u64,
}

pub fn measured_member_cost(suite: &GroupSuite, share: u64) -> MemberCost {
    let cred = MemberCredential {
        member: MemberId::from_bytes([0; 16]),
        group: GroupId::default(),
        epoch: 0,
        index: 1,
        share: suite.field().reduce(share),
    };
    let mut ops = OpCounter::default();
    member_commit_counted(&cred, suite, &mut ops);
    MemberCost {
        ops,
        scalar_bits: 64 - cred.share.leading_zeros(),
        model: cost_model(Scheme::Proposed, 1).expect("m = 1"),
    }
}
