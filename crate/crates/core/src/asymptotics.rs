//! Homogeneous chains: bounds as functions of the number of steps, their
//! limits, monotonicity checks and the single-observation planner.
//!
//! A homogeneous `n`-step decomposition of `P(tau, rho)` has steps
//! `tau' = tau^(1/n)`, `rho' = sigma (1 - tau')`. Everything that depends on
//! `n` is evaluated through `ln(tau) / n`, `expm1` and `log1p`, since
//! `1 - tau'` is `O(1/n)` and naive powers lose the limit.

use rayon::prelude::*;

use crate::bounds::{evidence_bounds, simple_bounds};
use crate::chain::{Decomposition, EvidencePattern, Mark};
use crate::extremal::{worst_case_mixed, worst_case_mixed_trellis, MixedMethod, MAX_SEARCH_STEPS};
use crate::{Error, Result, TransitionMatrix};

/// Bounds on PC for the `n`-step homogeneous decomposition, with `X = Y = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub n: u32,
    pub u_lb: f64,
    pub u_ub: f64,
    pub o_lb: f64,
    pub o_ub: f64,
    /// `None` for `n = 1`, where no mediator exists, and for degenerate laws,
    /// where mixed evidence has probability zero.
    pub m_lb: Option<f64>,
    pub m_ub: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousProfile {
    pub base: TransitionMatrix,
    pub rows: Vec<ProfileRow>,
}

fn check_base(p: &TransitionMatrix) -> Result<f64> {
    if !(p.tau() > 0.0 && p.tau() < 1.0) {
        return Err(Error::Unsupported(format!(
            "homogeneous chains need tau in (0, 1), got {}",
            p.tau()
        )));
    }
    Ok(p.measures()?.sigma)
}

/// `1 - tau^(1/n)` without cancellation.
fn one_minus_root(tau: f64, n: u32) -> f64 {
    -(tau.ln() / n as f64).exp_m1()
}

/// Bounds for the `n`-step homogeneous decomposition of `p`.
pub fn profile(p: &TransitionMatrix, n: u32) -> Result<ProfileRow> {
    let mut row = profile_unmixed(p, n)?;
    if n >= 2 && !p.is_degenerate() {
        row.m_lb = Some(0.0);
        row.m_ub = Some(mixed_upper(&p.homogeneous_step(n)?, n as usize)?);
    }
    Ok(row)
}

/// [`profile`] without the mixed-evidence columns.
fn profile_unmixed(p: &TransitionMatrix, n: u32) -> Result<ProfileRow> {
    let sigma = check_base(p)?;
    p.homogeneous_step(n)?;
    let (t, r) = (p.tau(), p.rho());
    let om = one_minus_root(t, n);
    let rho_s = sigma * om;
    let nf = n as f64;
    let denom = 1.0 + t + r;

    let u_lb = 2.0 * t / denom;
    let u_ub = (t + (nf * (-rho_s.abs()).ln_1p()).exp()) / denom;
    // 1 + tau' + rho' = 2 - (1 - tau')(1 - sigma)
    let o_lb = t * (-nf * (-om * (1.0 - sigma) / 2.0).ln_1p()).exp();
    let o_ub = if r >= 0.0 {
        // delta' = 1 - 2 rho' / (1 + tau' + rho')
        (nf * (-2.0 * rho_s / (2.0 - om * (1.0 - sigma))).ln_1p()).exp()
    } else {
        1.0
    };
    Ok(ProfileRow {
        n,
        u_lb: u_lb.clamp(0.0, 1.0),
        u_ub: u_ub.clamp(0.0, 1.0),
        o_lb: o_lb.clamp(0.0, 1.0),
        o_ub: o_ub.clamp(0.0, 1.0),
        m_lb: None,
        m_ub: None,
    })
}

/// Worst-case mixed upper bound: closed form where it applies, otherwise the
/// exhaustive search, otherwise the trellis for long chains.
fn mixed_upper(step: &TransitionMatrix, n: usize) -> Result<f64> {
    let d = Decomposition::homogeneous(*step, n)?;
    match worst_case_mixed(&d, MixedMethod::ClosedForm) {
        Ok((_, v)) => Ok(v),
        Err(Error::Precondition(_)) if n <= MAX_SEARCH_STEPS => {
            Ok(worst_case_mixed(&d, MixedMethod::Search)?.1)
        }
        Err(Error::Precondition(_)) => worst_case_mixed_trellis(step, n),
        Err(e) => Err(e),
    }
}

/// Rows for `n = 1..=n_max`.
pub fn profile_range(p: &TransitionMatrix, n_max: u32) -> Result<HomogeneousProfile> {
    let rows = (1..=n_max)
        .into_par_iter()
        .map(|n| profile(p, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(HomogeneousProfile { base: *p, rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    pub u_lb: f64,
    pub u_ub: f64,
    pub o_lb: f64,
    pub o_ub: f64,
    pub m_lb: Option<f64>,
    pub m_ub: Option<f64>,
    /// The law is degenerate, so PC is identified and every mediator is
    /// irrelevant.
    pub degenerate: bool,
}

/// Limits of the homogeneous bounds as the number of steps grows.
pub fn limits(p: &TransitionMatrix) -> Result<LimitReport> {
    let sigma = check_base(p)?;
    let (t, r) = (p.tau(), p.rho());
    let denom = 1.0 + t + r;
    if p.is_degenerate() {
        let pc = simple_bounds(p, true, true)?.lo;
        return Ok(LimitReport {
            u_lb: pc,
            u_ub: pc,
            o_lb: pc,
            o_ub: pc,
            m_lb: None,
            m_ub: None,
            degenerate: true,
        });
    }
    Ok(LimitReport {
        u_lb: 2.0 * t / denom,
        u_ub: (t + t.powf(sigma.abs())) / denom,
        o_lb: t.powf((1.0 + sigma) / 2.0),
        o_ub: t.powf(sigma).min(1.0),
        m_lb: Some(0.0),
        m_ub: Some(if r != 0.0 { 0.0 } else { 1.0 }),
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityCheck {
    pub name: &'static str,
    /// Nothing to check, e.g. the `oUB` checks when `rho <= 0`.
    pub vacuous: bool,
    /// First `n` at which the check fails, with a description.
    pub violation: Option<(u32, String)>,
}

impl MonotonicityCheck {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// Degenerate laws are outside the claim; no checks are run.
    pub skipped_degenerate: bool,
    pub checks: Vec<MonotonicityCheck>,
}

impl MonotonicityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn check(&self, name: &str) -> Option<&MonotonicityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn scale_tol(a: f64, b: f64, c: f64) -> f64 {
    1e-12 * a.abs().max(b.abs()).max(c.abs()).max(1.0)
}

fn strict_trend(name: &'static str, xs: &[f64], increasing: bool, vacuous: bool) -> MonotonicityCheck {
    let mut violation = None;
    if !vacuous {
        for (i, w) in xs.windows(2).enumerate() {
            let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
            if !ok {
                violation = Some((i as u32 + 2, format!("value {} after {}", w[1], w[0])));
                break;
            }
        }
    }
    MonotonicityCheck { name, vacuous, violation }
}

fn curvature(name: &'static str, xs: &[f64], convex: bool, vacuous: bool) -> MonotonicityCheck {
    let mut violation = None;
    if !vacuous {
        for (i, w) in xs.windows(3).enumerate() {
            let second = w[2] - 2.0 * w[1] + w[0];
            let tol = scale_tol(w[0], w[1], w[2]);
            let ok = if convex { second >= -tol } else { second <= tol };
            if !ok {
                violation = Some((i as u32 + 2, format!("second difference {second}")));
                break;
            }
        }
    }
    MonotonicityCheck { name, vacuous, violation }
}

fn doubling(
    name: &'static str,
    p: &TransitionMatrix,
    n_max: u32,
    pick: impl Fn(&ProfileRow) -> f64,
    increasing: bool,
    vacuous: bool,
) -> Result<MonotonicityCheck> {
    let mut violation = None;
    if !vacuous {
        let mut n = 1;
        while 2 * n <= n_max.max(2) {
            let a = pick(&profile_unmixed(p, n)?);
            let b = pick(&profile_unmixed(p, 2 * n)?);
            let ok = if increasing { b > a } else { b < a };
            if !ok {
                violation = Some((n, format!("n = {n}: {a}, 2n = {}: {b}", 2 * n)));
                break;
            }
            n *= 2;
        }
    }
    Ok(MonotonicityCheck { name, vacuous, violation })
}

/// Numeric checks of the monotonicity, curvature and doubling claims for
/// `n = 1..=n_max`. Violations are findings, not errors.
pub fn monotonicity_report(p: &TransitionMatrix, n_max: u32) -> Result<MonotonicityReport> {
    check_base(p)?;
    if p.is_degenerate() {
        return Ok(MonotonicityReport { skipped_degenerate: true, checks: Vec::new() });
    }
    // the mixed columns are not part of these claims
    let prof = (1..=n_max)
        .into_par_iter()
        .map(|n| profile_unmixed(p, n))
        .collect::<Result<Vec<_>>>()?;
    let o_lb: Vec<f64> = prof.iter().map(|r| r.o_lb).collect();
    let u_ub: Vec<f64> = prof.iter().map(|r| r.u_ub).collect();
    let o_ub: Vec<f64> = prof.iter().map(|r| r.o_ub).collect();
    let no_oub = p.rho() <= 0.0;
    Ok(MonotonicityReport {
        skipped_degenerate: false,
        checks: vec![
            strict_trend("oLB increasing", &o_lb, true, false),
            curvature("oLB concave", &o_lb, false, false),
            strict_trend("uUB decreasing", &u_ub, false, false),
            curvature("uUB convex", &u_ub, true, false),
            strict_trend("oUB decreasing", &o_ub, false, no_oub),
            curvature("oUB convex", &o_ub, true, no_oub),
            doubling("uUB doubling", p, n_max, |r| r.u_ub, false, false)?,
            doubling("oLB doubling", p, n_max, |r| r.o_lb, true, false)?,
            doubling("oUB doubling", p, n_max, |r| r.o_ub, false, no_oub)?,
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanRow {
    /// Index of the observed mediator.
    pub k: usize,
    /// Lower bound on PC if `M_k = 1` is observed.
    pub lb_if_one: f64,
    /// `Pr(M_k = 1 | X = 1, Y = 1)`.
    pub posterior_one: f64,
    /// `posterior_one * lb_if_one`; observing `M_k = 0` gives lower bound 0.
    pub expected_lb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPlan {
    pub n: usize,
    /// Lower bound with no mediator observed.
    pub baseline_lb: f64,
    pub rows: Vec<PlanRow>,
    /// Mediator indices maximizing `lb_if_one`: the middle node, or both
    /// middle nodes when `n` is odd.
    pub best: Vec<usize>,
}

impl ObservationPlan {
    pub fn row(&self, k: usize) -> &PlanRow {
        &self.rows[k - 1]
    }
}

/// Which single mediator of the `n`-step homogeneous decomposition of `p`
/// to observe, assuming `X = Y = 1`.
pub fn plan_single_observation(p: &TransitionMatrix, n: usize) -> Result<ObservationPlan> {
    check_base(p)?;
    if n < 2 {
        return Err(Error::Precondition(format!(
            "planning needs at least one mediator, got n = {n}"
        )));
    }
    let nu = u32::try_from(n).map_err(|_| Error::Domain(format!("n = {n} too large")))?;
    let step = p.homogeneous_step(nu)?;
    let whole = p.entry(true, true);
    let slb = |q: &TransitionMatrix| q.tau().max(0.0) / q.entry(true, true);
    let rows = (1..n)
        .map(|k| {
            let a = step.power(k as u32);
            let b = step.power((n - k) as u32);
            let lb_if_one = slb(&a) * slb(&b);
            let posterior_one = a.entry(true, true) * b.entry(true, true) / whole;
            PlanRow { k, lb_if_one, posterior_one, expected_lb: posterior_one * lb_if_one }
        })
        .collect();
    let best = if n.is_multiple_of(2) { vec![n / 2] } else { vec![n / 2, n / 2 + 1] };
    Ok(ObservationPlan { n, baseline_lb: slb(p), rows, best })
}

/// Planner for an arbitrary decomposition, evaluated through the bounds
/// engine for each candidate mediator.
pub fn plan_single_observation_general(d: &Decomposition) -> Result<ObservationPlan> {
    let n = d.len();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "planning needs at least one mediator, got n = {n}"
        )));
    }
    let hidden = EvidencePattern::endpoints(n, true, true);
    let baseline_lb = evidence_bounds(d, &hidden)?.lo;
    let whole = d.composed().entry(true, true);
    let mut rows = Vec::with_capacity(n - 1);
    for k in 1..n {
        let e = hidden.with_mark(k, Mark::One)?;
        let head = Decomposition::new(d.steps()[..k].to_vec())?.composed();
        let tail = Decomposition::new(d.steps()[k..].to_vec())?.composed();
        let posterior_one = head.entry(true, true) * tail.entry(true, true) / whole;
        let lb_if_one = if posterior_one > 0.0 { evidence_bounds(d, &e)?.lo } else { 0.0 };
        rows.push(PlanRow { k, lb_if_one, posterior_one, expected_lb: posterior_one * lb_if_one });
    }
    let top = rows.iter().map(|r| r.lb_if_one).fold(f64::NEG_INFINITY, f64::max);
    let best = rows
        .iter()
        .filter(|r| r.lb_if_one >= top - 1e-12 * top.abs())
        .map(|r| r.k)
        .collect();
    Ok(ObservationPlan { n, baseline_lb, rows, best })
}
