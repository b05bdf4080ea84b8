//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

#[path = "../../core/tests/support/toy_curve.rs"]
mod toy_curve;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use grpauth::algebra::{interpolate_secret, Polynomial, PrimeField};
use grpauth::baselines::{chien_attack_harn, harn_init, measured_member_cost};
use grpauth::groups::{GroupElement, GroupSuite};
use grpauth::handover::{handover_issue, handover_present, handover_refresh, handover_verify, HandoverError};
use grpauth::protocol::{
    derive_session_key, gm_collect_and_verify, gm_init, gm_init_with_polynomial, member_commit, Commitment,
    GroupPolicy, MemberId,
};
use grpauth::simnet::demo::attack_demo;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_grpauth")
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn ids(n: usize) -> Vec<MemberId> {
    (0..n).map(|i| MemberId::from_name(&format!("m{i}")).unwrap()).collect()
}

fn f61() -> PrimeField {
    PrimeField::new(PrimeField::MERSENNE_61).unwrap()
}

fn cost_reproduction() -> Check {
    let out = Command::new(bin()).args(["costs"]).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("exit {:?}", out.status))?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    ensure(lines.next() == Some("scheme,m,cost"), || "header".into())?;
    let mut rows = 0;
    for m in 1..=300u64 {
        for (scheme, cost) in [("harn", 45 * m + 1418), ("chien", 7 * m + 6785), ("proposed", 1189)] {
            let want = format!("{scheme},{m},{cost}");
            let got = lines.next().unwrap_or_default();
            ensure(got == want, || format!("expected {want}, got {got}"))?;
            rows += 1;
        }
    }
    ensure(lines.next().is_none(), || "trailing rows".into())?;
    ensure(text.contains("harn,100,5918\nchien,100,7485\nproposed,100,1189\n"), || "m=100 rows".into())?;
    Ok(format!("{rows} rows exact, m=100 -> 5918/7485/1189"))
}

fn completeness() -> Check {
    let suite = GroupSuite::mock61();
    let mut rng = ChaCha20Rng::seed_from_u64(0xC0);
    let mut accepted = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(3..=12);
        let m = rng.gen_range(2..n);
        let t = rng.gen_range(1..m);
        let (mut state, _, creds) = gm_init(1, GroupPolicy::new(t, m, n).unwrap(), &suite, &ids(n), &mut rng).unwrap();
        let k = rng.gen_range(t..=n);
        let quorum: Vec<Commitment> = creds.choose_multiple(&mut rng, k).map(|c| member_commit(c, &suite)).collect();
        accepted += usize::from(gm_collect_and_verify(&mut state, &quorum).unwrap().verdict.is_accepted());
    }
    ensure(accepted == 1000, || format!("{accepted}/1000 accepted"))?;
    Ok("1000/1000 accepted at 61-bit q".into())
}

fn soundness() -> Check {
    let suite = GroupSuite::mock13();
    let f = Polynomial::new(suite.field(), vec![5, 3]).unwrap();
    let (state, _, creds) = gm_init_with_polynomial(1, GroupPolicy::new(2, 3, 4).unwrap(), &suite, &ids(4), f).unwrap();
    let mut per_position = Vec::new();
    for set in [&creds[..2], &creds[..3]] {
        let honest: Vec<Commitment> = set.iter().map(|c| member_commit(c, &suite)).collect();
        ensure(gm_collect_and_verify(&mut state.clone(), &honest).unwrap().verdict.is_accepted(), || {
            "honest worked example rejected".into()
        })?;
        for pos in 0..set.len() {
            let mut rejected = 0;
            for d in 1..13 {
                let mut forged = honest.clone();
                let delta = suite.scalar_mul(d, &suite.generator()).unwrap();
                forged[pos].point = suite.add(&forged[pos].point, &delta).unwrap();
                rejected +=
                    usize::from(!gm_collect_and_verify(&mut state.clone(), &forged).unwrap().verdict.is_accepted());
            }
            ensure(rejected == 12, || format!("position {pos}: {rejected}/12 rejected"))?;
            per_position.push(rejected);
        }
    }

    let suite = GroupSuite::mock61();
    let mut rng = ChaCha20Rng::seed_from_u64(0x50);
    let mut rejected = 0;
    for _ in 0..1000 {
        let (mut state, _, creds) = gm_init(1, GroupPolicy::new(3, 5, 7).unwrap(), &suite, &ids(7), &mut rng).unwrap();
        let mut quorum: Vec<Commitment> = creds[..5].iter().map(|c| member_commit(c, &suite)).collect();
        let pos = rng.gen_range(0..quorum.len());
        let d = suite.field().random_nonzero(&mut rng);
        quorum[pos].point = suite.add(&quorum[pos].point, &suite.scalar_mul(d, &suite.generator()).unwrap()).unwrap();
        rejected += usize::from(!gm_collect_and_verify(&mut state, &quorum).unwrap().verdict.is_accepted());
    }
    ensure(rejected == 1000, || format!("{rejected}/1000 random tampers rejected"))?;
    Ok(format!("q=13 per position {per_position:?}/12; 61-bit 1000/1000 rejected"))
}

fn oracle_equivalence() -> Check {
    let suite = GroupSuite::mock61();
    let field = suite.field();
    let mut rng = ChaCha20Rng::seed_from_u64(0x0E);
    let (mut agree, mut accepted) = (0, 0);
    for _ in 0..200 {
        let n = rng.gen_range(3..=10);
        let m = rng.gen_range(2..n);
        let t = rng.gen_range(1..m);
        let (mut state, _, creds) = gm_init(1, GroupPolicy::new(t, m, n).unwrap(), &suite, &ids(n), &mut rng).unwrap();
        let k = rng.gen_range(t..=n);
        let mut shares: Vec<(u64, u64, MemberId)> =
            creds.choose_multiple(&mut rng, k).map(|c| (c.index, c.share, c.member)).collect();
        if rng.gen_bool(0.5) {
            let pos = rng.gen_range(0..k);
            shares[pos].1 = field.add(shares[pos].1, field.random_nonzero(&mut rng));
        }
        let commitments: Vec<Commitment> = shares
            .iter()
            .map(|&(_, y, member)| Commitment { group: 1, member, point: GroupElement::Mock(y) })
            .collect();
        let exponent_side = gm_collect_and_verify(&mut state, &commitments).unwrap().verdict.is_accepted();
        let points: Vec<(u64, u64)> = shares.iter().map(|&(x, y, _)| (x, y)).collect();
        let scalar_side = interpolate_secret(&field, &points).unwrap() == state.polynomial().secret();
        agree += usize::from(exponent_side == scalar_side);
        accepted += usize::from(scalar_side);
    }
    ensure(agree == 200, || format!("{agree}/200 agree"))?;
    Ok(format!("200/200 agree ({accepted} accepted, {} rejected)", 200 - accepted))
}

fn pairing_backend() -> Check {
    let suite = GroupSuite::curve43();
    let gen = suite.generator();
    let g = toy_curve::to_pt(&gen);
    let base = toy_curve::naive_pairing(g, g);
    ensure(base != (1, 0), || "degenerate pairing".into())?;
    let q = toy_curve::Q;
    for a in 0..q {
        for b in 0..q {
            let pa = suite.scalar_mul(a as u64, &gen).unwrap();
            let pb = suite.scalar_mul(b as u64, &gen).unwrap();
            let ours = toy_curve::to_e(&suite.pairing(&pa, &pb).unwrap());
            let oracle = toy_curve::naive_pairing(toy_curve::times(a, g), toy_curve::times(b, g));
            ensure(ours == oracle, || format!("e({a}P,{b}P): {ours:?} vs oracle {oracle:?}"))?;
            ensure(ours == toy_curve::epow(base, a * b % q), || format!("bilinearity at ({a},{b})"))?;
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(0x43);
    let (mut pairs, mut groups) = (0, 0);
    for _ in 0..20 {
        let (_, params, creds) = gm_init(1, GroupPolicy::new(2, 3, 4).unwrap(), &suite, &ids(4), &mut rng).unwrap();
        let commits: Vec<Commitment> = creds.iter().map(|c| member_commit(c, &suite)).collect();
        if creds.iter().any(|c| c.share == 0) {
            continue;
        }
        groups += 1;
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let ab = derive_session_key(&creds[i], &commits[j], &params).map_err(|e| e.to_string())?;
                let ba = derive_session_key(&creds[j], &commits[i], &params).map_err(|e| e.to_string())?;
                ensure(ab.value == ba.value, || format!("key asymmetry for ({i},{j})"))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("121/121 pairs match oracle; {pairs} ordered key pairs symmetric over {groups} groups"))
}

fn handover_end_to_end() -> Check {
    let suite = GroupSuite::mock13();
    let f = Polynomial::new(suite.field(), vec![5, 3]).unwrap();
    let (mut state, _, creds) =
        gm_init_with_polynomial(2, GroupPolicy::new(2, 3, 4).unwrap(), &suite, &ids(4), f).unwrap();
    let round: Vec<Commitment> = creds[..2].iter().map(|c| member_commit(c, &suite)).collect();
    ensure(gm_collect_and_verify(&mut state, &round).unwrap().verdict.is_accepted(), || "round".into())?;
    let cred = handover_issue(&mut state).map_err(|e| e.to_string())?;
    ensure(cred.index == 3 && cred.point == GroupElement::Mock(1), || format!("issued {cred:?}"))?;

    let newcomer = MemberId::from_name("visitor").unwrap();
    let mut hits = Vec::new();
    for k in 0..13 {
        let mut forged = cred;
        forged.point = GroupElement::Mock(k);
        let out =
            handover_verify(&mut state.clone(), &handover_present(newcomer, &forged)).map_err(|e| e.to_string())?;
        if out.verdict.is_accepted() {
            hits.push(k);
        }
    }
    ensure(hits == [1], || format!("accepted candidates {hits:?}"))?;

    let msg = handover_present(newcomer, &cred);
    let out = handover_verify(&mut state, &msg).map_err(|e| e.to_string())?;
    ensure(out.verdict.is_accepted(), || "worked example rejected".into())?;
    let next = handover_refresh(&mut state, &cred).map_err(|e| e.to_string())?;
    let replay = handover_verify(&mut state, &msg);
    ensure(replay == Err(HandoverError::Replay(3)), || format!("replay gave {replay:?}"))?;
    Ok(format!("(3, 1·P) accepted; 1/13 candidates accepted; replay refused; refreshed to index {}", next.index))
}

fn attack_demo_check() -> Check {
    let field = f61();
    let mut rng = ChaCha20Rng::seed_from_u64(0xA7);
    let mut recovered = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=12);
        let t = rng.gen_range(1..=n);
        let dealing = harn_init(t, n, field, &mut rng).unwrap();
        let observed: Vec<(u64, u64)> = dealing.shares.choose_multiple(&mut rng, t).copied().collect();
        let poly = chien_attack_harn(&field, t, &observed).unwrap();
        recovered +=
            usize::from(poly.secret() == dealing.secret() && poly.coefficients() == dealing.polynomial.coefficients());
    }
    ensure(recovered == 1000, || format!("{recovered}/1000 recovered"))?;

    let report = attack_demo(1).map_err(|e| e.to_string())?;
    ensure(report.harn_broken(), || "demo: harn not broken".into())?;
    ensure(report.proposed_refused() && report.proposed_order > 1 << 60, || "demo: no DL refusal at 61-bit".into())?;
    ensure(report.toy_broken(), || "demo: toy-scale brute force failed".into())?;
    let out = Command::new(bin()).args(["demo-attack", "--seed", "1"]).output().map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(text.contains("recovered == actual: true") && text.contains("refused"), || text.to_string())?;
    Ok("1000/1000 Harn secrets recovered; proposed scheme refused by DL guard at 61-bit q".into())
}

fn member_cost() -> Check {
    let suite = GroupSuite::curve_large();
    let mut rng = ChaCha20Rng::seed_from_u64(0xCC);
    let mut sample = None;
    for _ in 0..50 {
        let share = suite.field().random_nonzero(&mut rng);
        let cost = measured_member_cost(&suite, share);
        ensure(cost.ops.scalar_mul == 1 && cost.ops.pairing == 0, || format!("{:?}", cost.ops))?;
        sample.get_or_insert(cost);
    }
    let c = sample.expect("sampled");
    Ok(format!(
        "1 scalar multiplication per commit; measured {} field mul + {} inv ({}-bit scalar) vs model 1189",
        c.ops.field_mul, c.ops.field_inv, c.scalar_bits
    ))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    ensure(!paths.is_empty(), || "no bundled scenarios".into())?;
    for path in &paths {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("run{run}.ndjson"));
            let status = Command::new(bin())
                .args(["run", "--scenario"])
                .arg(path)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || format!("{}: {status}", path.display()))?;
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || format!("{} differs between runs", path.display()))?;
    }
    Ok(format!("{} bundled scenarios byte-identical across runs", paths.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("cost model reproduction", Some(Duration::from_secs(1)), cost_reproduction),
        ("completeness", Some(Duration::from_secs(10)), completeness),
        ("soundness", None, soundness),
        ("oracle equivalence", None, oracle_equivalence),
        ("pairing backend", None, pairing_backend),
        ("hand-over end to end", Some(Duration::from_secs(1)), handover_end_to_end),
        ("attack demo", None, attack_demo_check),
        ("member cost", None, member_cost),
        ("determinism", None, determinism),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match (result, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS  {name:<26} {:>9.2?}  {detail}", elapsed),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<26} {:>9.2?}  {why}", elapsed);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
