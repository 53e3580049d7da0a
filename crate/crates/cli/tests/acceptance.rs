//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;

use causabound::asymptotics::{limits, plan_single_observation, profile};
use causabound::baselines::{covariate_construction, CovariateKind};
use causabound::bounds::{evidence_bounds, simple_bounds};
use causabound::extremal::{extremal_table, worst_case_mixed, Extreme, MixedMethod, Regime, Side};
use causabound::oracle::{sharpness_check, simulate, SlackAssignment};
use causabound::{Decomposition, EvidencePattern, Mark, TransitionMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn tm(t: f64, r: f64) -> TransitionMatrix {
    TransitionMatrix::new(t, r).unwrap()
}

/// tau in {0.1, 0.2, 0.4}, rho in {-0.5, -0.2, 0, 0.2, 0.5}, feasible cells.
fn grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for t in [0.1, 0.2, 0.4] {
        for r in [-0.5, -0.2, 0.0, 0.2, 0.5] {
            if t + f64::abs(r) <= 1.0 {
                g.push((t, r));
            }
        }
    }
    g
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn ac1() -> Check {
    let p = TransitionMatrix::from_conditionals(1.0 / 3.0, 2.0 / 3.0).map_err(|e| e.to_string())?;
    let b = simple_bounds(&p, true, true).map_err(|e| e.to_string())?;
    if !close(b.lo, 0.5, 1e-12) || !close(b.hi, 1.0, 1e-12) {
        return Err(format!("simple bounds [{}, {}]", b.lo, b.hi));
    }
    let l = limits(&tm(1.0 / 3.0, 0.0)).map_err(|e| e.to_string())?;
    let target = 3f64.powf(-0.5);
    if !close(l.o_lb, target, 1e-6) || !close(l.o_ub, 1.0, 1e-12) {
        return Err(format!("oLB_inf {} oUB_inf {}", l.o_lb, l.o_ub));
    }
    Ok(format!("[{}, {}]; limit [{:.6}, {}]", b.lo, b.hi, l.o_lb, l.o_ub))
}

fn ac2() -> Check {
    let p = tm(1.0 / 3.0, 0.0);
    let t = extremal_table(&p).map_err(|e| e.to_string())?;
    let c = t.get(Regime::AllPositive, Extreme::Largest, Side::Lower);
    let e: EvidencePattern = "111".parse().unwrap();
    let via_engine = evidence_bounds(&c.witness, &e).map_err(|e| e.to_string())?.lo;
    if c.evidence != e || !close(c.value, 2.0 / 3.0, 1e-12) || !close(via_engine, 2.0 / 3.0, 1e-12) {
        return Err(format!("value {} engine {} evidence {}", c.value, via_engine, c.evidence));
    }
    Ok(format!("max oLB = {via_engine:.12} on 111"))
}

fn ac3() -> Check {
    let step = tm(0.99, 0.0);
    let whole = step.power(120);
    let plan = plan_single_observation(&whole, 120).map_err(|e| e.to_string())?;
    let mid = plan.row(60).lb_if_one;
    let first = plan.row(1).lb_if_one;
    let mut bad = Vec::new();
    if !close(plan.baseline_lb, 0.461, 0.001) {
        bad.push(format!("baseline {}", plan.baseline_lb));
    }
    if !(mid > 0.5 && close(mid, 0.501, 0.002)) {
        bad.push(format!("midpoint {mid}"));
    }
    if !close(first, 0.463, 0.002) {
        bad.push(format!("node 1 {first}"));
    }
    if let Some(r) = plan.rows.iter().find(|r| !close(r.expected_lb, plan.baseline_lb, 1e-12)) {
        bad.push(format!("expected LB at k={} is {}", r.k, r.expected_lb));
    }
    if plan.best != vec![60] {
        bad.push(format!("best {:?}", plan.best));
    }
    if bad.is_empty() {
        Ok(format!("baseline {:.6}, midpoint {mid:.6}, node 1 {first:.6}", plan.baseline_lb))
    } else {
        Err(bad.join("; "))
    }
}

/// Table of largest/smallest bounds written out independently of the library.
fn table_closed_forms(t: f64, r: f64) -> Vec<(Regime, Extreme, Side, f64, bool)> {
    use Extreme::*;
    use Regime::*;
    use Side::*;
    let s = 2.0 * t / (1.0 + t + r);
    vec![
        (Unobserved, Largest, Upper, (1.0 + t - r.abs()) / (1.0 + t + r), false),
        (Unobserved, Largest, Lower, s, false),
        (Unobserved, Smallest, Upper, s, true),
        (Unobserved, Smallest, Lower, s, false),
        (AllPositive, Largest, Upper, f64::min(1.0, 1.0 - r), false),
        (AllPositive, Largest, Lower, (1.0 + t - r) / 2.0, false),
        (AllPositive, Smallest, Upper, s, true),
        (AllPositive, Smallest, Lower, s, false),
        (Mixed, Largest, Upper, 1.0, false),
        (Mixed, Largest, Lower, 0.0, false),
        (Mixed, Smallest, Upper, 0.0, true),
        (Mixed, Smallest, Lower, 0.0, false),
    ]
}

fn ac4() -> Check {
    let mut checked = 0;
    for (t, r) in grid() {
        let rep = extremal_table(&tm(t, r)).map_err(|e| format!("({t}, {r}): {e}"))?;
        for (regime, extreme, side, want, starred) in table_closed_forms(t, r) {
            let c = rep.get(regime, extreme, side);
            let regime_ok = match regime {
                Regime::Unobserved => c.evidence.marks()[1..c.evidence.n_steps()].iter().all(|m| *m == Mark::Unobserved),
                Regime::AllPositive => c.evidence.marks().iter().all(|m| *m == Mark::One),
                Regime::Mixed => c.evidence.marks().contains(&Mark::Zero),
            };
            let b = evidence_bounds(&c.witness, &c.evidence).map_err(|e| e.to_string())?;
            let got = match side {
                Side::Upper => b.hi,
                Side::Lower => b.lo,
            };
            let composed = c.witness.composed();
            if !regime_ok
                || c.witness.len() > 2
                || !close(composed.tau(), t, 1e-12)
                || !close(composed.rho(), r, 1e-12)
                || !close(c.value, want, 1e-12)
                || !close(got, want, 1e-10)
                || (starred && !b.identified)
            {
                return Err(format!(
                    "({t}, {r}) {}: closed form {want}, witness gives {got} on {} (identified {})",
                    c.label(),
                    c.evidence,
                    b.identified
                ));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} cells"))
}

fn random_step(rng: &mut ChaCha8Rng) -> TransitionMatrix {
    let t: f64 = rng.random_range(-0.95..0.95);
    let room = 1.0 - t.abs();
    let r = rng.random_range(-0.95 * room..0.95 * room);
    tm(t, r)
}

fn ac5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut cases, mut signs_mixed) = (0, 0);
    for case in 0..200u64 {
        let n = rng.random_range(1..=4);
        let steps: Vec<_> = (0..n).map(|_| random_step(&mut rng)).collect();
        if steps.iter().any(|s| s.tau() < 0.0) && steps.iter().any(|s| s.tau() > 0.0) {
            signs_mixed += 1;
        }
        let d = Decomposition::new(steps).unwrap();
        for e in EvidencePattern::enumerate(n) {
            let r = sharpness_check(&d, &e, 1000, case).map_err(|err| format!("case {case} {e}: {err}"))?;
            if !r.passed {
                return Err(format!(
                    "case {case} {e}: corners [{}, {}] vs bounds [{}, {}], {} interior violations",
                    r.endpoint_min,
                    r.endpoint_max,
                    r.bounds.lo,
                    r.bounds.hi,
                    r.interior_violations.len()
                ));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (chain, pattern) cases, {signs_mixed} chains with mixed step signs"))
}

fn ac6() -> Check {
    let laws = [(0.5, 0.2), (0.5, -0.2), (0.3, 0.4), (0.8, 0.1), (0.4, -0.3), (0.6, -0.3)];
    let mut checked = 0;
    for (t, r) in laws {
        let step = tm(t, r);
        let m = step.measures().map_err(|e| e.to_string())?;
        if m.gamma >= m.delta * m.delta {
            return Err(format!("step ({t}, {r}) does not satisfy gamma < delta^2"));
        }
        for n in 4..=16usize {
            let d = Decomposition::homogeneous(step, n).unwrap();
            let (_, searched) = worst_case_mixed(&d, MixedMethod::Search).map_err(|e| e.to_string())?;
            let (w, closed) = worst_case_mixed(&d, MixedMethod::ClosedForm).map_err(|e| e.to_string())?;
            let formula = if n % 2 == 0 {
                m.gamma.powi(n as i32 / 2)
            } else {
                m.gamma.powi((n as i32 - 1) / 2) * m.delta
            };
            let engine = evidence_bounds(&d, &w).map_err(|e| e.to_string())?.hi;
            let repeats = w.marks().windows(2).filter(|p| p[0] == p[1]).count();
            let observed = w.marks().iter().all(|m| *m != Mark::Unobserved);
            if !close(searched, formula, 1e-12)
                || !close(closed, formula, 1e-12)
                || !close(engine, formula, 1e-12)
                || !observed
                || repeats != n % 2
            {
                return Err(format!(
                    "({t}, {r}) n={n}: search {searched}, closed form {formula}, witness {w} gives {engine}"
                ));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (law, n) pairs"))
}

fn ac7() -> Check {
    let mut worst: f64 = 0.0;
    for (t, r) in grid() {
        let p = tm(t, r);
        if p.is_degenerate() {
            continue;
        }
        let far = profile(&p, 100_000).map_err(|e| e.to_string())?;
        let l = limits(&p).map_err(|e| e.to_string())?;
        let mut pairs = vec![(far.u_lb, l.u_lb), (far.u_ub, l.u_ub), (far.o_lb, l.o_lb), (far.o_ub, l.o_ub)];
        for (a, b) in [(far.m_lb, l.m_lb), (far.m_ub, l.m_ub)] {
            match (a, b) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                _ => return Err(format!("({t}, {r}): mixed column missing")),
            }
        }
        for (a, b) in pairs {
            worst = worst.max((a - b).abs());
            if (a - b).abs() > 1e-3 {
                return Err(format!("({t}, {r}): profile {a} vs limit {b}"));
            }
        }
        let at_1000 = profile(&p, 1000).map_err(|e| e.to_string())?.m_ub.unwrap();
        if r != 0.0 && at_1000 > 1e-6 {
            return Err(format!("({t}, {r}): mUB_1000 = {at_1000}"));
        }
        if r == 0.0 {
            for n in (2..=1000).chain([100_000]) {
                let v = profile(&p, n).map_err(|e| e.to_string())?.m_ub.unwrap();
                if !close(v, 1.0, 1e-12) {
                    return Err(format!("({t}, 0): mUB_{n} = {v}"));
                }
            }
        }
    }
    Ok(format!("largest gap at n = 1e5 is {worst:.2e}"))
}

fn ac8() -> Check {
    let mut failures = Vec::new();
    let mut comparisons = 0;
    for (t, r) in grid() {
        let p = tm(t, r);
        for n in [1u32, 2, 4, 8, 16] {
            let a = profile(&p, n).map_err(|e| e.to_string())?;
            let b = profile(&p, 2 * n).map_err(|e| e.to_string())?;
            let mut check = |ok: bool, what: &str, x: f64, y: f64| {
                comparisons += 1;
                if !ok {
                    failures.push(format!("({t}, {r}) n={n} {what}: {x} vs {y}"));
                }
            };
            check(b.u_ub < a.u_ub, "uUB_2n < uUB_n", b.u_ub, a.u_ub);
            check(b.o_lb > a.o_lb, "oLB_2n > oLB_n", b.o_lb, a.o_lb);
            if r > 0.0 {
                check(b.o_ub < a.o_ub, "oUB_2n < oUB_n", b.o_ub, a.o_ub);
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{comparisons} strict comparisons"))
    } else {
        let cells: std::collections::BTreeSet<String> =
            failures.iter().map(|f| f.split(" n=").next().unwrap().to_string()).collect();
        Err(format!(
            "{} of {comparisons} comparisons fail, all in cells {:?}; first: {}",
            failures.len(),
            cells,
            failures[0]
        ))
    }
}

fn ac9() -> Check {
    let mut tested = 0;
    for scenario in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + scenario);
        let n = rng.random_range(1..=4);
        let steps: Vec<_> = (0..n).map(|_| random_step(&mut rng)).collect();
        let d = Decomposition::new(steps).unwrap();
        let us: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
        let a = SlackAssignment::interpolated(&d, &us);
        let sim = simulate(&d, &a, 100_000, scenario, 0.5).map_err(|e| e.to_string())?;
        let g = sim.general_causation().ok_or("no units")?;
        if !g.within(a.composed(), 3.0) {
            return Err(format!("scenario {scenario}: Pr(Y0 != Y1) {} vs prod xi {}", g.value, a.composed()));
        }
        for e in EvidencePattern::enumerate(n) {
            let Some(pc) = sim.empirical_pc(&e) else { continue };
            if pc.support < 100 {
                continue;
            }
            let b = evidence_bounds(&d, &e).map_err(|err| err.to_string())?;
            let slack = 3.0 * pc.standard_error.max(1.0 / pc.support as f64);
            if pc.value < b.lo - slack || pc.value > b.hi + slack {
                return Err(format!(
                    "scenario {scenario} {e}: empirical {} (se {}) outside [{}, {}]",
                    pc.value, pc.standard_error, b.lo, b.hi
                ));
            }
            tested += 1;
        }
    }
    Ok(format!("{tested} conditioned estimates across 20 scenarios"))
}

fn ac10() -> Check {
    let mut checked = 0;
    for i in 1..20 {
        let t = i as f64 / 20.0;
        for j in -9..=9 {
            let p = tm(t, j as f64 / 10.0 * (1.0 - t));
            let s = simple_bounds(&p, true, true).map_err(|e| e.to_string())?;
            let u = covariate_construction(&p, CovariateKind::UnobservedExtremal).map_err(|e| e.to_string())?;
            let o = covariate_construction(&p, CovariateKind::ObservedIdentifiesOne).map_err(|e| e.to_string())?;
            for (name, m) in [("unobserved", &u.model), ("observed", &o.model)] {
                let mix = m.mixture();
                let q = p.matrix();
                let gap = (0..4).map(|k| (mix[k / 2][k % 2] - q[k / 2][k % 2]).abs()).fold(0.0, f64::max);
                if gap > 1e-12 {
                    return Err(format!("{p} {name}: mixture gap {gap}"));
                }
            }
            let c1 = o.pc_given_c1.ok_or("PC given C = 1 undefined")?;
            if !close(u.pc_marginal.lo, s.hi, 1e-12) || !close(u.pc_marginal.hi, s.hi, 1e-12) {
                return Err(format!("{p}: unobserved covariate PC {:?} vs simple UB {}", u.pc_marginal, s.hi));
            }
            if !close(c1.lo, 1.0, 1e-12) || !close(c1.hi, 1.0, 1e-12) {
                return Err(format!("{p}: PC given C = 1 is [{}, {}]", c1.lo, c1.hi));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} laws"))
}

fn cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_causabound"))
        .args(args)
        .env_remove("CAUSABOUND_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn read_profile(path: &Path) -> Result<Vec<Vec<Option<f64>>>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    if lines.next() != Some("n,uLB,uUB,oLB,oUB,mLB,mUB") || !text.ends_with('\n') {
        return Err(format!("{}: bad header or missing final newline", path.display()));
    }
    lines
        .map(|l| {
            l.split(',')
                .map(|c| if c.is_empty() { Ok(None) } else { c.parse().map(Some).map_err(|_| format!("bad cell `{c}`")) })
                .collect()
        })
        .collect()
}

fn ac11() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().to_str().unwrap();
    let rhos = [-0.4, -0.2, 0.0, 0.2, 0.4, 0.6];
    cli(&["figures", "--tau", "0.2", "--rho=-0.4,-0.2,0,0.2,0.4,0.6", "--n-max", "30", "--out-dir", out])?;
    for r in rhos {
        let stem = format!("bands_tau_0.2_rho_{r}");
        let svg = fs::read_to_string(dir.path().join(format!("{stem}.svg"))).map_err(|e| e.to_string())?;
        for color in ["blue", "red", "green"] {
            if !svg.contains(&format!("stroke=\"{color}\"")) {
                return Err(format!("{stem}.svg has no {color} band"));
            }
        }
        let rows = read_profile(&dir.path().join(format!("{stem}.csv")))?;
        if rows.len() != 30 {
            return Err(format!("{stem}: {} rows", rows.len()));
        }
        let col = |k: usize| rows.iter().filter_map(|row| row[k]).collect::<Vec<f64>>();
        let (u_lb, o_lb, o_ub, m_ub) = (col(1), col(3), col(4), col(6));
        if u_lb.iter().any(|&v| v != u_lb[0]) {
            return Err(format!("{stem}: blue lower not constant"));
        }
        if o_lb.windows(2).any(|w| w[1] <= w[0]) {
            return Err(format!("{stem}: red lower not increasing"));
        }
        if r > 0.0 && o_ub.windows(2).any(|w| w[1] >= w[0]) {
            return Err(format!("{stem}: red upper not decreasing"));
        }
        if m_ub.len() != 29 {
            return Err(format!("{stem}: green upper has {} points", m_ub.len()));
        }
        let last = *m_ub.last().unwrap();
        if r != 0.0 {
            if m_ub.windows(2).any(|w| w[1] > w[0]) || last > 1e-2 {
                return Err(format!("{stem}: green upper not going to 0 (ends at {last})"));
            }
        } else if m_ub.iter().any(|&v| v != 1.0) {
            return Err(format!("{stem}: green upper should stay at 1"));
        }
    }
    Ok(format!("{} panels", rhos.len()))
}

fn cli_suite(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let d = dir.to_str().unwrap();
    let chain = "# two steps\nstep = 0.5,0.1\nstep = 0.6,-0.2\nevidence = 1?1\n";
    let bounds_conf = dir.join("bounds.conf");
    let oracle_conf = dir.join("oracle.conf");
    fs::write(&bounds_conf, chain).map_err(|e| e.to_string())?;
    fs::write(&oracle_conf, format!("{chain}seed = 11\n")).map_err(|e| e.to_string())?;
    let mut stdout = Vec::new();
    stdout.push(cli(&["figures", "--out-dir", &format!("{d}/fig")])?.replace(d, "<dir>"));
    stdout.push(cli(&["compare", "--points", "21", "--out-dir", &format!("{d}/cmp")])?.replace(d, "<dir>"));
    stdout.push(cli(&["profile", "--tau", "0.2", "--rho", "0.3", "--n-max", "50", "--out", &format!("{d}/p.csv"),
        "--svg", &format!("{d}/p.svg")])?);
    stdout.push(cli(&["bounds", "--config", bounds_conf.to_str().unwrap()])?);
    stdout.push(cli(&["extremal", "--tau", "0.3", "--rho", "-0.2"])?);
    stdout.push(cli(&["limits", "--tau", "0.3", "--rho", "-0.2"])?);
    stdout.push(cli(&["plan", "--step-tau", "0.99", "--step-rho", "0", "--n", "120"])?);
    stdout.push(cli(&["oracle", "--config", oracle_conf.to_str().unwrap(), "--samples", "50000", "--interior", "200"])?);
    fs::write(dir.join("stdout.txt"), stdout.concat()).map_err(|e| e.to_string())?;

    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for entry in fs::read_dir(&p).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, fs::read(&path).map_err(|e| e.to_string())?));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn ac12() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fa = cli_suite(a.path())?;
    let fb = cli_suite(b.path())?;
    if fa.len() != fb.len() {
        return Err(format!("{} files vs {}", fa.len(), fb.len()));
    }
    for ((na, ba), (nb, bb)) in fa.iter().zip(&fb) {
        if na != nb || ba != bb {
            return Err(format!("{na} differs from {nb}"));
        }
    }
    let bytes: usize = fa.iter().map(|f| f.1.len()).sum();
    Ok(format!("{} files, {bytes} bytes identical", fa.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("medicine example", ac1),
        ("prescription example", ac2),
        ("domino example", ac3),
        ("extremal table attainment", ac4),
        ("sharpness oracle", ac5),
        ("mixed-evidence worst case", ac6),
        ("homogeneous limits", ac7),
        ("doubling inequalities", ac8),
        ("Monte Carlo containment", ac9),
        ("covariate baselines", ac10),
        ("figure regeneration", ac11),
        ("determinism", ac12),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS AC{} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL AC{} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
