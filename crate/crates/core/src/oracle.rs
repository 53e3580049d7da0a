//! Independent checks of the bounds engine.
//!
//! Three routes that share no code with [`crate::bounds`]: evaluating PC at an
//! explicit per-step slack assignment, enumerating slack endpoints to find
//! the extremes, and simulating the structural model unit by unit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bounds::{evidence_bounds, BoundsResult};
use crate::chain::{Decomposition, EvidencePattern};
use crate::counterfactual::{response_distribution, xi_bounds, ResponseDistribution};
use crate::{Error, Result, TransitionMatrix, EPS};

/// One slack `xi_i` per step of a decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackAssignment {
    xis: Vec<f64>,
}

impl SlackAssignment {
    pub fn new(d: &Decomposition, xis: Vec<f64>) -> Result<Self> {
        if xis.len() != d.len() {
            return Err(Error::Structural(format!(
                "{} slacks for {} steps",
                xis.len(),
                d.len()
            )));
        }
        let xis = xis
            .into_iter()
            .zip(d.steps())
            .map(|(xi, s)| {
                let r = xi_bounds(s);
                if !(xi >= r.lo - EPS && xi <= r.hi + EPS) {
                    let cell = if xi < r.lo { "p(1,0)" } else { "p(0,0)" };
                    return Err(Error::InfeasibleSlack { xi, lo: r.lo, hi: r.hi, cell });
                }
                Ok(xi.clamp(r.lo, r.hi))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { xis })
    }

    /// Every slack at its lower (`false`) or upper (`true`) end.
    pub fn corner(d: &Decomposition, upper: &[bool]) -> Self {
        let xis = d
            .steps()
            .iter()
            .zip(upper)
            .map(|(s, &u)| {
                let r = xi_bounds(s);
                if u { r.hi } else { r.lo }
            })
            .collect();
        Self { xis }
    }

    pub fn lower(d: &Decomposition) -> Self {
        Self::corner(d, &vec![false; d.len()])
    }

    pub fn upper(d: &Decomposition) -> Self {
        Self::corner(d, &vec![true; d.len()])
    }

    /// Each slack a fraction `u_i` of the way through its range.
    pub fn interpolated(d: &Decomposition, us: &[f64]) -> Self {
        let xis = d.steps().iter().zip(us).map(|(s, &u)| xi_bounds(s).lerp(u)).collect();
        Self { xis }
    }

    pub fn xis(&self) -> &[f64] {
        &self.xis
    }

    /// Slack of the end-to-end law, `prod xi_i`.
    pub fn composed(&self) -> f64 {
        self.xis.iter().product()
    }
}

/// PC given the evidence when each step's potential outcomes have slack
/// `a.xis()[i]`.
pub fn pc_at_assignment(d: &Decomposition, e: &EvidencePattern, a: &SlackAssignment) -> Result<f64> {
    e.check_against(d)?;
    if a.xis.len() != d.len() {
        return Err(Error::Structural(format!("{} slacks for {} steps", a.xis.len(), d.len())));
    }
    let observed: Vec<(usize, bool)> = e.observed().collect();
    let mut pc = 1.0;
    for w in observed.windows(2) {
        let ((i, from), (j, to)) = (w[0], w[1]);
        // matrix product of the segment's steps, written out
        let mut m = [[1.0, 0.0], [0.0, 1.0]];
        for s in &d.steps()[i..j] {
            let q = s.matrix();
            m = [
                [m[0][0] * q[0][0] + m[0][1] * q[1][0], m[0][0] * q[0][1] + m[0][1] * q[1][1]],
                [m[1][0] * q[0][0] + m[1][1] * q[1][0], m[1][0] * q[0][1] + m[1][1] * q[1][1]],
            ];
        }
        let tau = m[1][1] - m[0][1];
        let entry = m[from as usize][to as usize];
        if entry <= 0.0 {
            return Err(Error::NullEvent(format!(
                "Pr(M{j} = {} | M{i} <- {}) = 0",
                to as u8, from as u8
            )));
        }
        let xi: f64 = a.xis[i..j].iter().product();
        let signed = if from == to { tau } else { -tau };
        pc *= (0.5 * (xi + signed) / entry).clamp(0.0, 1.0);
    }
    Ok(pc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessReport {
    pub passed: bool,
    pub bounds: BoundsResult,
    pub endpoint_min: f64,
    pub endpoint_max: f64,
    pub min_witness: SlackAssignment,
    pub max_witness: SlackAssignment,
    pub interior_samples: usize,
    /// Interior assignments whose PC fell outside the bounds.
    pub interior_violations: Vec<(SlackAssignment, f64)>,
}

/// Largest chain [`sharpness_check`] enumerates.
pub const MAX_SHARPNESS_STEPS: usize = 8;

/// Compares the bounds engine with brute force over slack assignments.
///
/// Passes iff the extremes over all `2^n` endpoint assignments equal the
/// bounds to `1e-10` and every random interior assignment lies inside them.
pub fn sharpness_check(
    d: &Decomposition,
    e: &EvidencePattern,
    interior_samples: usize,
    seed: u64,
) -> Result<SharpnessReport> {
    let n = d.len();
    if n > MAX_SHARPNESS_STEPS {
        return Err(Error::Precondition(format!(
            "sharpness check enumerates 2^n corners; n = {n} exceeds {MAX_SHARPNESS_STEPS}"
        )));
    }
    let bounds = evidence_bounds(d, e)?;
    let mut min = (f64::INFINITY, SlackAssignment::lower(d));
    let mut max = (f64::NEG_INFINITY, SlackAssignment::lower(d));
    for mask in 0u32..(1 << n) {
        let upper: Vec<bool> = (0..n).map(|i| (mask >> i) & 1 == 1).collect();
        let a = SlackAssignment::corner(d, &upper);
        let v = pc_at_assignment(d, e, &a)?;
        if v < min.0 {
            min = (v, a.clone());
        }
        if v > max.0 {
            max = (v, a);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interior_violations = Vec::new();
    for _ in 0..interior_samples {
        let us: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let a = SlackAssignment::interpolated(d, &us);
        let v = pc_at_assignment(d, e, &a)?;
        if !bounds.contains(v, 1e-12) {
            interior_violations.push((a, v));
        }
    }
    let passed = (min.0 - bounds.lo).abs() <= 1e-10
        && (max.0 - bounds.hi).abs() <= 1e-10
        && interior_violations.is_empty();
    Ok(SharpnessReport {
        passed,
        bounds,
        endpoint_min: min.0,
        endpoint_max: max.0,
        min_witness: min.1,
        max_witness: max.1,
        interior_samples,
        interior_violations,
    })
}

/// Largest chain [`simulate`] records.
pub const MAX_SIMULATION_STEPS: usize = 16;

/// Counts of simulated units by realized chain and causation indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub n_steps: usize,
    pub seed: u64,
    pub samples: u64,
    /// Indexed by the node values (node `i` in bit `i`) plus the causation
    /// indicator in bit `n_steps + 1`.
    counts: Vec<u64>,
}

/// A proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
    /// Number of units the proportion is taken over.
    pub support: u64,
}

impl Estimate {
    fn from_counts(hits: u64, total: u64) -> Option<Self> {
        if total == 0 {
            return None;
        }
        let p = hits as f64 / total as f64;
        Some(Self {
            value: p,
            standard_error: (p * (1.0 - p) / total as f64).sqrt(),
            support: total,
        })
    }

    /// `|value - target| <= k * standard_error`, with a floor for `p` at 0 or 1.
    pub fn within(&self, target: f64, k: f64) -> bool {
        let floor = 1.0 / self.support as f64;
        (self.value - target).abs() <= k * self.standard_error.max(floor)
    }
}

impl SimulationOutcome {
    /// Builds an outcome from explicit `(node bits, caused)` records.
    pub fn from_records(n_steps: usize, seed: u64, records: impl IntoIterator<Item = (u32, bool)>) -> Result<Self> {
        if n_steps == 0 || n_steps > MAX_SIMULATION_STEPS {
            return Err(Error::Domain(format!(
                "n_steps must be in 1..={MAX_SIMULATION_STEPS}, got {n_steps}"
            )));
        }
        let mut counts = vec![0u64; 1 << (n_steps + 2)];
        let mut samples = 0;
        for (nodes, caused) in records {
            if nodes >> (n_steps + 1) != 0 {
                return Err(Error::Structural(format!("node bits {nodes:#b} exceed {n_steps} steps")));
            }
            counts[(nodes | (caused as u32) << (n_steps + 1)) as usize] += 1;
            samples += 1;
        }
        Ok(Self { n_steps, seed, samples, counts })
    }

    fn cells(&self) -> impl Iterator<Item = (u32, bool, u64)> + '_ {
        let n = self.n_steps;
        let node_mask = (1u32 << (n + 1)) - 1;
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (i as u32 & node_mask, (i >> (n + 1)) & 1 == 1, c))
    }

    /// Units whose realized chain is `nodes` (node `i` in bit `i`).
    pub fn count(&self, nodes: u32, caused: bool) -> u64 {
        self.counts[(nodes | (caused as u32) << (self.n_steps + 1)) as usize]
    }

    fn matches(e: &EvidencePattern, nodes: u32) -> bool {
        e.observed().all(|(i, v)| ((nodes >> i) & 1 == 1) == v)
    }

    /// Fraction of units matching the evidence in which the exposure caused
    /// the outcome.
    pub fn empirical_pc(&self, e: &EvidencePattern) -> Option<Estimate> {
        if e.n_steps() != self.n_steps {
            return None;
        }
        let (mut hits, mut total) = (0, 0);
        for (nodes, caused, c) in self.cells() {
            if Self::matches(e, nodes) {
                total += c;
                if caused {
                    hits += c;
                }
            }
        }
        Estimate::from_counts(hits, total)
    }

    /// Fraction of units where the outcome would differ under the two
    /// exposures, i.e. every step's response is non-constant.
    pub fn general_causation(&self) -> Option<Estimate> {
        let hits = self.cells().filter(|c| c.1).map(|c| c.2).sum();
        Estimate::from_counts(hits, self.samples)
    }

    /// Empirical `Pr(M_{i+1} = 1 | M_i = x)`.
    pub fn step_conditional(&self, i: usize, x: bool) -> Option<Estimate> {
        let (mut hits, mut total) = (0, 0);
        for (nodes, _, c) in self.cells() {
            if ((nodes >> i) & 1 == 1) == x {
                total += c;
                if (nodes >> (i + 1)) & 1 == 1 {
                    hits += c;
                }
            }
        }
        Estimate::from_counts(hits, total)
    }
}

/// Response types in the order `const0, const1, identity, flip`.
fn draw_response(rng: &mut ChaCha8Rng, r: &ResponseDistribution) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, w) in r.as_array().into_iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    // rounding in the cumulative sum; take the last type with positive mass
    r.as_array().iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Draws units from the structural model: exposure, then an independent
/// response function for every step.
///
/// Unit `k` uses its own generator seeded from `(seed, k)`, so the counts do
/// not depend on how units are split across threads.
pub fn simulate(
    d: &Decomposition,
    a: &SlackAssignment,
    samples: u64,
    seed: u64,
    exposure_prob: f64,
) -> Result<SimulationOutcome> {
    let n = d.len();
    if n > MAX_SIMULATION_STEPS {
        return Err(Error::Domain(format!("simulation supports up to {MAX_SIMULATION_STEPS} steps, got {n}")));
    }
    if a.xis.len() != n {
        return Err(Error::Structural(format!("{} slacks for {n} steps", a.xis.len())));
    }
    if !(0.0..=1.0).contains(&exposure_prob) {
        return Err(Error::Domain(format!("exposure probability {exposure_prob} outside [0, 1]")));
    }
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let responses: Vec<ResponseDistribution> = d
        .steps()
        .iter()
        .zip(&a.xis)
        .map(|(s, &xi)| response_distribution(s, xi))
        .collect::<Result<_>>()?;

    const CHUNK: u64 = 1 << 16;
    let size = 1usize << (n + 2);
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; size];
            for k in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k);
                let mut v = rng.random::<f64>() < exposure_prob;
                let mut nodes = v as u32;
                let mut caused = true;
                for (i, r) in responses.iter().enumerate() {
                    v = match draw_response(&mut rng, r) {
                        0 => {
                            caused = false;
                            false
                        }
                        1 => {
                            caused = false;
                            true
                        }
                        2 => v,
                        _ => !v,
                    };
                    nodes |= (v as u32) << (i + 1);
                }
                counts[(nodes | (caused as u32) << (n + 1)) as usize] += 1;
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; size];
    for p in partial {
        for (t, c) in counts.iter_mut().zip(p) {
            *t += c;
        }
    }
    Ok(SimulationOutcome { n_steps: n, seed, samples, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkovDecision {
    Pass,
    Reject,
    /// No node had enough data to test.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeTest {
    /// Tests `M_{node+1}` against `M_0..M_{node-1}` given `M_node`.
    pub node: usize,
    pub statistic: f64,
    pub dof: u64,
    pub p_value: Option<f64>,
    /// History rows left out because some expected count was below 5.
    pub sparse_rows: usize,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovReport {
    pub decision: MarkovDecision,
    pub significance: f64,
    /// Per-node level after the Bonferroni correction.
    pub per_node_level: f64,
    pub nodes: Vec<NodeTest>,
}

const MIN_EXPECTED: f64 = 5.0;

/// Pearson statistic for independence of the columns from the rows of a
/// table with two columns; rows with an expected count below 5 are dropped.
fn independence_statistic(rows: &[[u64; 2]]) -> (f64, u64, usize) {
    let expected_ok = |kept: &[[u64; 2]], r: &[u64; 2]| {
        let total: u64 = kept.iter().map(|k| k[0] + k[1]).sum();
        let cols = [kept.iter().map(|k| k[0]).sum::<u64>(), kept.iter().map(|k| k[1]).sum::<u64>()];
        let rt = (r[0] + r[1]) as f64;
        cols.iter().all(|&c| c == 0 || rt * c as f64 / total as f64 >= MIN_EXPECTED)
    };
    let present: Vec<[u64; 2]> = rows.iter().copied().filter(|r| r[0] + r[1] > 0).collect();
    let kept: Vec<[u64; 2]> = present.iter().copied().filter(|r| expected_ok(&present, r)).collect();
    let sparse = present.len() - kept.len();
    let total: u64 = kept.iter().map(|k| k[0] + k[1]).sum();
    let cols = [kept.iter().map(|k| k[0]).sum::<u64>(), kept.iter().map(|k| k[1]).sum::<u64>()];
    if kept.len() < 2 || cols.contains(&0) {
        return (0.0, 0, sparse);
    }
    let mut stat = 0.0;
    for r in &kept {
        let rt = (r[0] + r[1]) as f64;
        for c in 0..2 {
            let e = rt * cols[c] as f64 / total as f64;
            stat += (r[c] as f64 - e).powi(2) / e;
        }
    }
    (stat, kept.len() as u64 - 1, sparse)
}

/// Tests whether each node depends on earlier nodes only through its
/// immediate predecessor, with a Bonferroni correction across nodes.
pub fn markov_check(outcome: &SimulationOutcome, significance: f64) -> Result<MarkovReport> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::Domain(format!("significance {significance} outside (0, 1)")));
    }
    let n = outcome.n_steps;
    let mut nodes = Vec::new();
    for i in 1..n {
        let mut stat = 0.0;
        let mut dof = 0;
        let mut sparse_rows = 0;
        for mid in [false, true] {
            // rows: history M_0..M_{i-1}; columns: M_{i+1}
            let mut rows = vec![[0u64; 2]; 1 << i];
            for (bits, _, c) in outcome.cells() {
                if ((bits >> i) & 1 == 1) != mid {
                    continue;
                }
                let history = (bits & ((1 << i) - 1)) as usize;
                rows[history][((bits >> (i + 1)) & 1) as usize] += c;
            }
            let (s, d, sp) = independence_statistic(&rows);
            stat += s;
            dof += d;
            sparse_rows += sp;
        }
        let p_value = if dof > 0 {
            let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
            Some(chi.sf(stat))
        } else {
            None
        };
        nodes.push(NodeTest { node: i, statistic: stat, dof, p_value, sparse_rows, inconclusive: dof == 0 });
    }
    let tested = nodes.iter().filter(|t| !t.inconclusive).count();
    let per_node_level = significance / tested.max(1) as f64;
    let decision = if n == 1 {
        MarkovDecision::Pass
    } else if nodes.iter().any(|t| t.p_value.is_some_and(|p| p < per_node_level)) {
        MarkovDecision::Reject
    } else if tested == 0 {
        MarkovDecision::Inconclusive
    } else {
        MarkovDecision::Pass
    };
    Ok(MarkovReport { decision, significance, per_node_level, nodes })
}

/// Per-step law from a simulation, for comparison with the decomposition.
pub fn empirical_step(outcome: &SimulationOutcome, i: usize) -> Option<TransitionMatrix> {
    let p0 = outcome.step_conditional(i, false)?.value;
    let p1 = outcome.step_conditional(i, true)?.value;
    TransitionMatrix::from_conditionals(p0, p1).ok()
}
