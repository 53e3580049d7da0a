//! Extremal bounds over all decompositions of a fixed law.
//!
//! For a target `P(tau, rho)` with `tau > 0` and `|rho| < 1 - tau`, the
//! largest and smallest achievable upper and lower bounds, under each
//! evidence regime, are attained by decompositions of length one or two.
//! [`construct`] builds the two-step witnesses and [`extremal_table`]
//! checks every closed form against its witness through the bounds engine.

use rayon::prelude::*;

use crate::bounds::{evidence_bounds, simple_bounds, BoundsResult};
use crate::chain::{Decomposition, EvidencePattern, Mark};
use crate::{Error, Result, TransitionMatrix, EPS};

/// Two-step witness constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    /// Sufficient first step, necessary second step; identifies PC at the
    /// simple lower bound.
    SufficientThenNecessary,
    /// Largest upper bound with all mediators positive. Needs `rho > 0`.
    MaxObservedUpper,
    /// Necessary first step, sufficient second step; largest lower bound with
    /// all mediators positive, and `[0, 0]` when the mediator is seen at 0.
    NecessaryThenSufficient,
    /// Upper bound 1 under mixed evidence, for `rho <= 0`.
    MaxMixedUpperNonpositive,
    /// Upper bound 1 under mixed evidence, for `rho >= 0`.
    MaxMixedUpperNonnegative,
}

impl Construction {
    pub const ALL: [Construction; 5] = [
        Construction::SufficientThenNecessary,
        Construction::MaxObservedUpper,
        Construction::NecessaryThenSufficient,
        Construction::MaxMixedUpperNonpositive,
        Construction::MaxMixedUpperNonnegative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Construction::SufficientThenNecessary => "suff_then_nec",
            Construction::MaxObservedUpper => "max_oUB",
            Construction::NecessaryThenSufficient => "nec_then_suff",
            Construction::MaxMixedUpperNonpositive => "max_mUB_nonpos",
            Construction::MaxMixedUpperNonnegative => "max_mUB_nonneg",
        }
    }
}

fn check_interior(p: &TransitionMatrix) -> Result<()> {
    if p.tau() <= 0.0 {
        return Err(Error::Precondition(format!(
            "extremal constructions need tau > 0, got {}",
            p.tau()
        )));
    }
    if p.tau() + p.rho().abs() >= 1.0 - EPS {
        return Err(Error::Unsupported(format!(
            "extremal constructions need |rho| < 1 - tau; {p} is degenerate"
        )));
    }
    Ok(())
}

/// Builds the two-step decomposition `kind` of `p`.
pub fn construct(kind: Construction, p: &TransitionMatrix) -> Result<Decomposition> {
    check_interior(p)?;
    let (t, r) = (p.tau(), p.rho());
    let (first, second) = match kind {
        Construction::SufficientThenNecessary => {
            // tau1 + rho1 = 1, tau1 - rho1 = 4 tau / (1 + tau + rho) - 1
            let t1 = 2.0 * t / (1.0 + t + r);
            ((t1, 1.0 - t1), ((1.0 + t + r) / 2.0, (t + r - 1.0) / 2.0))
        }
        Construction::MaxObservedUpper => {
            if r <= 0.0 {
                return Err(Error::Precondition(format!("{} needs rho > 0, got {r}", kind.name())));
            }
            ((t / (1.0 - r), 0.0), (1.0 - r, r))
        }
        Construction::NecessaryThenSufficient => {
            // tau1 - rho1 = 1, tau1 + rho1 = (3 tau - 1 + rho) / (1 + tau - rho)
            let t1 = 2.0 * t / (1.0 + t - r);
            ((t1, t1 - 1.0), ((1.0 + t - r) / 2.0, (1.0 - t + r) / 2.0))
        }
        Construction::MaxMixedUpperNonpositive => {
            if r > 0.0 {
                return Err(Error::Precondition(format!("{} needs rho <= 0, got {r}", kind.name())));
            }
            ((2.0 * t / (1.0 + t + r), 0.0), ((1.0 + t + r) / 2.0, r))
        }
        Construction::MaxMixedUpperNonnegative => {
            if r < 0.0 {
                return Err(Error::Precondition(format!("{} needs rho >= 0, got {r}", kind.name())));
            }
            let scale = (1.0 + r + t) / (2.0 * (t + r));
            ((t * scale, r * scale), (2.0 * (t + r) / (1.0 + t + r), 0.0))
        }
    };
    let d = Decomposition::new(vec![
        TransitionMatrix::new(first.0, first.1)?,
        TransitionMatrix::new(second.0, second.1)?,
    ])?;
    let c = d.composed();
    debug_assert!((c.tau() - t).abs() < 1e-12 && (c.rho() - r).abs() < 1e-12, "{c} vs {p}");
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// No mediator observed.
    Unobserved,
    /// Every mediator observed at 1.
    AllPositive,
    /// At least one mediator observed at 0.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extreme {
    Largest,
    Smallest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalCell {
    pub regime: Regime,
    pub extreme: Extreme,
    pub side: Side,
    /// Closed-form value.
    pub value: f64,
    /// PC is identified by the witness.
    pub starred: bool,
    pub witness: Decomposition,
    pub evidence: EvidencePattern,
    pub construction: Option<Construction>,
    /// The witness run through the bounds engine.
    pub bounds: BoundsResult,
}

impl ExtremalCell {
    pub fn label(&self) -> String {
        let bar = match self.extreme {
            Extreme::Largest => "max",
            Extreme::Smallest => "min",
        };
        let r = match self.regime {
            Regime::Unobserved => 'u',
            Regime::AllPositive => 'o',
            Regime::Mixed => 'm',
        };
        let s = match self.side {
            Side::Upper => "UB",
            Side::Lower => "LB",
        };
        format!("{bar} {r}{s}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalReport {
    pub base: TransitionMatrix,
    pub cells: Vec<ExtremalCell>,
}

impl ExtremalReport {
    pub fn get(&self, regime: Regime, extreme: Extreme, side: Side) -> &ExtremalCell {
        self.cells
            .iter()
            .find(|c| c.regime == regime && c.extreme == extreme && c.side == side)
            .expect("report holds all twelve cells")
    }

    pub fn value(&self, regime: Regime, extreme: Extreme, side: Side) -> f64 {
        self.get(regime, extreme, side).value
    }
}

/// Closed-form extremal values with validated witnesses.
pub fn extremal_table(p: &TransitionMatrix) -> Result<ExtremalReport> {
    check_interior(p)?;
    let (t, r) = (p.tau(), p.rho());
    let s_lb = 2.0 * t / (1.0 + t + r);
    let single = Decomposition::single(*p);
    let ones1 = EvidencePattern::all_ones(1);
    let ones2 = EvidencePattern::all_ones(2);
    let hidden2 = EvidencePattern::endpoints(2, true, true);
    let mixed2 = ones2.with_mark(1, Mark::Zero)?;

    let stn = construct(Construction::SufficientThenNecessary, p)?;
    let nts = construct(Construction::NecessaryThenSufficient, p)?;
    let (max_o_ub, max_o_ub_kind) = if r > 0.0 {
        (construct(Construction::MaxObservedUpper, p)?, Some(Construction::MaxObservedUpper))
    } else {
        (single.clone(), None)
    };
    let (max_m, max_m_kind) = if r <= 0.0 {
        let k = Construction::MaxMixedUpperNonpositive;
        (construct(k, p)?, k)
    } else {
        let k = Construction::MaxMixedUpperNonnegative;
        (construct(k, p)?, k)
    };

    use Extreme::*;
    use Regime::*;
    use Side::*;
    type Spec = (Regime, Extreme, Side, f64, bool, Decomposition, EvidencePattern, Option<Construction>);
    let specs: Vec<Spec> = vec![
        (Unobserved, Largest, Upper, (1.0 + t - r.abs()) / (1.0 + t + r), false, single.clone(), ones1.clone(), None),
        (Unobserved, Largest, Lower, s_lb, false, single.clone(), ones1.clone(), None),
        (Unobserved, Smallest, Upper, s_lb, true, stn.clone(), hidden2, Some(Construction::SufficientThenNecessary)),
        (Unobserved, Smallest, Lower, s_lb, false, single.clone(), ones1.clone(), None),
        (AllPositive, Largest, Upper, (1.0 - r).min(1.0), false, max_o_ub.clone(),
            EvidencePattern::all_ones(max_o_ub.len()), max_o_ub_kind),
        (AllPositive, Largest, Lower, (1.0 + t - r) / 2.0, false, nts.clone(), ones2.clone(),
            Some(Construction::NecessaryThenSufficient)),
        (AllPositive, Smallest, Upper, s_lb, true, stn.clone(), ones2.clone(), Some(Construction::SufficientThenNecessary)),
        (AllPositive, Smallest, Lower, s_lb, false, stn, ones2, Some(Construction::SufficientThenNecessary)),
        (Mixed, Largest, Upper, 1.0, false, max_m.clone(), mixed2.clone(), Some(max_m_kind)),
        (Mixed, Largest, Lower, 0.0, false, max_m, mixed2.clone(), Some(max_m_kind)),
        (Mixed, Smallest, Upper, 0.0, true, nts.clone(), mixed2.clone(), Some(Construction::NecessaryThenSufficient)),
        (Mixed, Smallest, Lower, 0.0, false, nts, mixed2, Some(Construction::NecessaryThenSufficient)),
    ];

    let mut cells = Vec::with_capacity(specs.len());
    for (regime, extreme, side, value, starred, witness, evidence, construction) in specs {
        let bounds = evidence_bounds(&witness, &evidence)?;
        let attained = match side {
            Upper => bounds.hi,
            Lower => bounds.lo,
        };
        let mut cell = ExtremalCell {
            regime,
            extreme,
            side,
            value,
            starred,
            witness,
            evidence,
            construction,
            bounds,
        };
        if (attained - value).abs() > 1e-10 {
            return Err(Error::WitnessMismatch {
                what: cell.label(),
                expected: value,
                actual: attained,
            });
        }
        if starred && !bounds.identified {
            return Err(Error::WitnessMismatch {
                what: format!("{} identification", cell.label()),
                expected: 0.0,
                actual: bounds.width(),
            });
        }
        cell.value = value;
        cells.push(cell);
    }
    Ok(ExtremalReport { base: *p, cells })
}

/// How [`worst_case_mixed`] computes its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixedMethod {
    Search,
    ClosedForm,
}

/// Largest chain length the exhaustive search accepts.
pub const MAX_SEARCH_STEPS: usize = 24;

fn common_step(d: &Decomposition) -> Result<TransitionMatrix> {
    let step = d.steps()[0];
    if d.steps().iter().any(|s| s != &step) {
        return Err(Error::Precondition("worst_case_mixed needs identical steps".into()));
    }
    if !(step.tau() > 0.0 && step.tau() < 1.0) {
        return Err(Error::Precondition(format!(
            "worst_case_mixed needs per-step tau in (0, 1), got {}",
            step.tau()
        )));
    }
    if d.len() < 2 {
        return Err(Error::Precondition(
            "mixed evidence needs at least one mediator".into(),
        ));
    }
    Ok(step)
}

/// Per-step simple upper bound, `None` where the transition is impossible.
fn step_upper_table(step: &TransitionMatrix) -> [[Option<f64>; 2]; 2] {
    let ub = |a: bool, b: bool| simple_bounds(step, a, b).ok().map(|r| r.hi);
    [[ub(false, false), ub(false, true)], [ub(true, false), ub(true, true)]]
}

/// Node `i` of an inner-node mask, node 1 in the most significant bit.
fn node_value(mask: u32, inner: usize, i: usize) -> bool {
    if i == 0 || i == inner + 1 {
        return true;
    }
    (mask >> (inner - i)) & 1 == 1
}

fn full_pattern(mask: u32, n: usize) -> EvidencePattern {
    let values: Vec<bool> = (0..=n).map(|i| node_value(mask, n - 1, i)).collect();
    EvidencePattern::full(&values).expect("endpoints observed")
}

fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - 1e-12 * incumbent.abs()
}

/// Smallest upper bound over fully observed mixed patterns with both ends 1.
pub fn worst_case_mixed(d: &Decomposition, want: MixedMethod) -> Result<(EvidencePattern, f64)> {
    let step = common_step(d)?;
    match want {
        MixedMethod::Search => search_mixed(&step, d.len()),
        MixedMethod::ClosedForm => closed_form_mixed(&step, d.len()),
    }
}

fn search_mixed(step: &TransitionMatrix, n: usize) -> Result<(EvidencePattern, f64)> {
    if n > MAX_SEARCH_STEPS {
        return Err(Error::SearchTooLarge { n, max: MAX_SEARCH_STEPS });
    }
    let table = step_upper_table(step);
    let inner = n - 1;
    let all_ones = (1u32 << inner) - 1;
    let eval = |mask: u32| -> Option<f64> {
        let mut v = 1.0;
        let mut prev = true;
        for i in 1..=n {
            let cur = node_value(mask, inner, i);
            v *= table[prev as usize][cur as usize]?;
            prev = cur;
        }
        Some(v)
    };

    // chunks by prefix, each scanned in increasing order; merged in order
    let chunk_bits = inner.min(8);
    let chunks = 1u32 << chunk_bits;
    let per_chunk = 1u32 << (inner - chunk_bits);
    let partial: Vec<Option<(f64, u32)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut best: Option<(f64, u32)> = None;
            for mask in c * per_chunk..(c + 1) * per_chunk {
                if mask == all_ones {
                    continue;
                }
                if let Some(v) = eval(mask) {
                    if best.is_none_or(|(b, _)| strictly_better(v, b)) {
                        best = Some((v, mask));
                    }
                }
            }
            best
        })
        .collect();
    let mut best: Option<(f64, u32)> = None;
    for (v, mask) in partial.into_iter().flatten() {
        if best.is_none_or(|(b, _)| strictly_better(v, b)) {
            best = Some((v, mask));
        }
    }
    let (v, mask) = best.ok_or_else(|| {
        Error::Infeasible(format!("no mixed pattern is possible under {step} with {n} steps"))
    })?;
    Ok((full_pattern(mask, n), v))
}

fn closed_form_mixed(step: &TransitionMatrix, n: usize) -> Result<(EvidencePattern, f64)> {
    let m = step.measures()?;
    let (gamma, delta) = (m.gamma, m.delta);
    if step.is_degenerate() {
        return Err(Error::Infeasible(format!(
            "mixed evidence has probability zero under the degenerate step {step}"
        )));
    }
    let neutral = step.rho() == 0.0;
    if !neutral && gamma >= delta * delta {
        return Err(Error::Precondition(format!(
            "closed form needs gamma < delta^2, got gamma = {gamma}, delta^2 = {}",
            delta * delta
        )));
    }
    let mut values: Vec<bool> = (0..=n).map(|i| i % 2 == 0).collect();
    let value = if n.is_multiple_of(2) {
        gamma.powi((n / 2) as i32)
    } else {
        if step.rho() < 0.0 {
            // end on 0 -> 0 -> 1 instead of 1 -> 1
            values[n - 1] = false;
        }
        values[n] = true;
        gamma.powi(((n - 1) / 2) as i32) * delta
    };
    let value = if neutral { 1.0 } else { value };
    Ok((EvidencePattern::full(&values)?, value))
}

/// Exact minimum over the same patterns as the search, in `O(n)`.
///
/// Dynamic programming over (current node value, a zero seen yet).
pub fn worst_case_mixed_trellis(step: &TransitionMatrix, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("mixed evidence needs at least one mediator".into()));
    }
    let table = step_upper_table(step);
    // best[value][seen_zero]
    let mut best = [[None::<f64>; 2]; 2];
    best[1][0] = Some(1.0);
    for i in 1..=n {
        let mut next = [[None::<f64>; 2]; 2];
        for prev in 0..2 {
            for seen in 0..2 {
                let Some(v) = best[prev][seen] else { continue };
                let choices: &[usize] = if i == n { &[1] } else { &[0, 1] };
                for &cur in choices {
                    let Some(ub) = table[prev][cur] else { continue };
                    let s = seen | (cur == 0) as usize;
                    let w = v * ub;
                    let slot = &mut next[cur][s];
                    if slot.is_none_or(|x| w < x) {
                        *slot = Some(w);
                    }
                }
            }
        }
        best = next;
    }
    best[1][1].ok_or_else(|| {
        Error::Infeasible(format!("no mixed pattern is possible under {step} with {n} steps"))
    })
}
