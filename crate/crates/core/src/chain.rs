//! Complete mediation chains and per-node evidence.
//!
//! Nodes are indexed `0..=n` with node 0 the exposure `X`, node `n` the
//! outcome `Y` and nodes in between the mediators. Step `i` (1-based) is the
//! transition from node `i - 1` to node `i`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result, TransitionMatrix};

/// An ordered list of one-step laws `P_1 | P_2 | ... | P_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    steps: Vec<TransitionMatrix>,
}

impl Decomposition {
    pub fn new(steps: Vec<TransitionMatrix>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Structural("a decomposition needs at least one step".into()));
        }
        Ok(Self { steps })
    }

    pub fn single(p: TransitionMatrix) -> Self {
        Self { steps: vec![p] }
    }

    /// `n` copies of `step`.
    pub fn homogeneous(step: TransitionMatrix, n: usize) -> Result<Self> {
        Self::new(vec![step; n])
    }

    /// The `n`-step homogeneous decomposition of `p`.
    pub fn homogeneous_of(p: &TransitionMatrix, n: u32) -> Result<Self> {
        Self::homogeneous(p.homogeneous_step(n)?, n as usize)
    }

    pub fn steps(&self) -> &[TransitionMatrix] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// End-to-end law, folded left to right.
    pub fn composed(&self) -> TransitionMatrix {
        compose_all(&self.steps)
    }

    /// Upper end of the slack range, `prod (1 - |rho_i|)`.
    pub fn xi_upper(&self) -> f64 {
        xi_upper(&self.steps)
    }

    /// Replaces steps `i` and `i + 1` (0-based) by their composition.
    pub fn merge_adjacent(&self, i: usize) -> Result<Self> {
        if i + 1 >= self.steps.len() {
            return Err(Error::Structural(format!(
                "cannot merge steps {i} and {} of a {}-step chain",
                i + 1,
                self.steps.len()
            )));
        }
        let mut steps = self.steps.clone();
        let merged = steps[i].compose(&steps[i + 1]);
        steps.splice(i..=i + 1, [merged]);
        Self::new(steps)
    }
}

pub(crate) fn compose_all(steps: &[TransitionMatrix]) -> TransitionMatrix {
    steps
        .iter()
        .fold(TransitionMatrix::identity(), |acc, s| acc.compose(s))
}

pub(crate) fn xi_upper(steps: &[TransitionMatrix]) -> f64 {
    steps.iter().map(|s| 1.0 - s.rho().abs()).product()
}

/// Observation status of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mark {
    Zero,
    One,
    Unobserved,
}

impl Mark {
    pub fn observed(value: bool) -> Self {
        if value {
            Mark::One
        } else {
            Mark::Zero
        }
    }

    pub fn value(self) -> Option<bool> {
        match self {
            Mark::Zero => Some(false),
            Mark::One => Some(true),
            Mark::Unobserved => None,
        }
    }

    fn toggled(self) -> Self {
        match self {
            Mark::Zero => Mark::One,
            Mark::One => Mark::Zero,
            Mark::Unobserved => Mark::Unobserved,
        }
    }

    fn symbol(self) -> char {
        match self {
            Mark::Zero => '0',
            Mark::One => '1',
            Mark::Unobserved => '?',
        }
    }
}

/// Per-node evidence, written as a string over `{0, 1, ?}` such as `"1?01"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvidencePattern {
    marks: Vec<Mark>,
}

impl EvidencePattern {
    pub fn new(marks: Vec<Mark>) -> Result<Self> {
        if marks.len() < 2 {
            return Err(Error::Structural(format!(
                "an evidence pattern covers at least X and Y, got {} node(s)",
                marks.len()
            )));
        }
        if marks[0] == Mark::Unobserved || marks[marks.len() - 1] == Mark::Unobserved {
            return Err(Error::Structural(
                "the exposure and outcome must both be observed".into(),
            ));
        }
        Ok(Self { marks })
    }

    /// `X = x`, `Y = y`, all `n - 1` mediators unobserved.
    pub fn endpoints(n_steps: usize, x: bool, y: bool) -> Self {
        let mut marks = vec![Mark::Unobserved; n_steps + 1];
        marks[0] = Mark::observed(x);
        marks[n_steps] = Mark::observed(y);
        Self { marks }
    }

    /// Every node observed with the given values.
    pub fn full(values: &[bool]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Mark::observed(v)).collect())
    }

    /// Every node observed at 1.
    pub fn all_ones(n_steps: usize) -> Self {
        Self {
            marks: vec![Mark::One; n_steps + 1],
        }
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    /// Number of steps of a matching chain.
    pub fn n_steps(&self) -> usize {
        self.marks.len() - 1
    }

    pub fn x(&self) -> bool {
        self.marks[0] == Mark::One
    }

    pub fn y(&self) -> bool {
        self.marks[self.marks.len() - 1] == Mark::One
    }

    /// Indices and values of the observed nodes, in chain order.
    pub fn observed(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.marks
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.value().map(|v| (i, v)))
    }

    /// Returns a copy with node `i` set to `mark`.
    pub fn with_mark(&self, i: usize, mark: Mark) -> Result<Self> {
        let mut marks = self.marks.clone();
        *marks
            .get_mut(i)
            .ok_or_else(|| Error::Structural(format!("node {i} out of range")))? = mark;
        Self::new(marks)
    }

    pub fn check_against(&self, d: &Decomposition) -> Result<()> {
        if self.marks.len() != d.len() + 1 {
            return Err(Error::Structural(format!(
                "evidence pattern has {} nodes but the chain has {} steps (expected {} nodes)",
                self.marks.len(),
                d.len(),
                d.len() + 1
            )));
        }
        Ok(())
    }

    /// All patterns over `n_steps + 1` nodes with observed endpoints.
    pub fn enumerate(n_steps: usize) -> Vec<EvidencePattern> {
        let inner = n_steps.saturating_sub(1);
        let mut out = Vec::new();
        for ends in 0..4u32 {
            let count = 3usize.pow(inner as u32);
            for code in 0..count {
                let mut marks = Vec::with_capacity(n_steps + 1);
                marks.push(Mark::observed(ends & 2 != 0));
                let mut c = code;
                for _ in 0..inner {
                    marks.push([Mark::Zero, Mark::One, Mark::Unobserved][c % 3]);
                    c /= 3;
                }
                marks.push(Mark::observed(ends & 1 != 0));
                out.push(EvidencePattern { marks });
            }
        }
        out
    }
}

impl fmt::Display for EvidencePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.marks.iter().map(|m| m.symbol()).collect();
        f.write_str(&s)
    }
}

impl FromStr for EvidencePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let marks = s
            .chars()
            .map(|c| match c {
                '0' => Ok(Mark::Zero),
                '1' => Ok(Mark::One),
                '?' => Ok(Mark::Unobserved),
                other => Err(Error::Parse(format!(
                    "evidence pattern {s:?}: unexpected character {other:?} (use 0, 1 or ?)"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(marks)
    }
}

/// The stretch of chain between two consecutive observed nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start_index: usize,
    pub end_index: usize,
    pub start_value: bool,
    pub end_value: bool,
    pub inner_steps: Vec<TransitionMatrix>,
}

impl Segment {
    /// Law from the start node to the end node.
    pub fn composed(&self) -> TransitionMatrix {
        compose_all(&self.inner_steps)
    }

    /// `prod (1 - |rho_i|)` over the segment's steps.
    pub fn xi_upper(&self) -> f64 {
        xi_upper(&self.inner_steps)
    }

    /// `Pr(end = end_value | start <- start_value)`.
    pub fn transition_probability(&self) -> f64 {
        self.composed().entry(self.start_value, self.end_value)
    }
}

pub fn segments(d: &Decomposition, e: &EvidencePattern) -> Result<Vec<Segment>> {
    e.check_against(d)?;
    let observed: Vec<(usize, bool)> = e.observed().collect();
    Ok(observed
        .windows(2)
        .map(|w| {
            let ((a, va), (b, vb)) = (w[0], w[1]);
            Segment {
                start_index: a,
                end_index: b,
                start_value: va,
                end_value: vb,
                inner_steps: d.steps()[a..b].to_vec(),
            }
        })
        .collect())
}

/// A chain and pattern after relabeling some nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Relabeled {
    pub decomposition: Decomposition,
    pub evidence: EvidencePattern,
    /// `flips[i]` is true when node `i`'s labels 0 and 1 were swapped.
    pub flips: Vec<bool>,
}

impl Relabeled {
    pub fn flipped_nodes(&self) -> Vec<usize> {
        self.flips
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
            .collect()
    }
}

/// Swaps the labels of node `i` (0-based, `0..=n`): the output columns of
/// step `i` and the input rows of step `i + 1`.
pub fn flip_node(steps: &mut [TransitionMatrix], marks: &mut [Mark], i: usize) {
    if i > 0 {
        let s = steps[i - 1];
        steps[i - 1] = TransitionMatrix::clamped(-s.tau(), -s.rho());
    }
    if i < steps.len() {
        let s = steps[i];
        steps[i] = TransitionMatrix::clamped(-s.tau(), s.rho());
    }
    marks[i] = marks[i].toggled();
}

/// Relabels nodes so that every step has a positive effect.
///
/// Mediators are flipped left to right; if the last step is still negative
/// the outcome node is flipped too. The exposure is never flipped.
pub fn normalize_labels(d: &Decomposition, e: &EvidencePattern) -> Result<Relabeled> {
    e.check_against(d)?;
    if let Some(i) = d.steps().iter().position(|s| s.tau() == 0.0) {
        return Err(Error::NormalizationImpossible { step: i + 1 });
    }
    let mut steps = d.steps().to_vec();
    let mut marks = e.marks().to_vec();
    let mut flips = vec![false; steps.len() + 1];
    for i in 0..steps.len() {
        if steps[i].tau() < 0.0 {
            flip_node(&mut steps, &mut marks, i + 1);
            flips[i + 1] = true;
        }
    }
    Ok(Relabeled {
        decomposition: Decomposition::new(steps)?,
        evidence: EvidencePattern::new(marks)?,
        flips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn tm(t: f64, r: f64) -> TransitionMatrix {
        TransitionMatrix::new(t, r).unwrap()
    }

    fn pat(s: &str) -> EvidencePattern {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_format() {
        for s in ["11", "1?01", "0??1", "10101"] {
            assert_eq!(pat(s).to_string(), s);
        }
        assert!(matches!("1x1".parse::<EvidencePattern>(), Err(Error::Parse(_))));
        assert!(matches!("?1".parse::<EvidencePattern>(), Err(Error::Structural(_))));
        assert!(matches!("1".parse::<EvidencePattern>(), Err(Error::Structural(_))));
        assert!("".parse::<EvidencePattern>().is_err());
    }

    #[test]
    fn segments_examples() {
        let d2 = Decomposition::new(vec![tm(0.5, 0.1), tm(0.4, -0.2)]).unwrap();
        let s = segments(&d2, &pat("1?1")).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].start_index, s[0].end_index), (0, 2));
        assert_eq!(s[0].inner_steps.len(), 2);

        let s = segments(&d2, &pat("101")).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].start_value, s[0].end_value), (true, false));
        assert_eq!((s[1].start_value, s[1].end_value), (false, true));
        assert!(s.iter().all(|seg| seg.inner_steps.len() == 1));

        let d4 = Decomposition::homogeneous(tm(0.8, 0.1), 4).unwrap();
        let s = segments(&d4, &pat("1?0?1")).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].start_index, s[0].end_index, s[0].inner_steps.len()), (0, 2, 2));
        assert_eq!((s[1].start_value, s[1].end_value), (false, true));

        assert!(matches!(segments(&d4, &pat("1?1")), Err(Error::Structural(_))));
    }

    #[test]
    fn normalize_examples() {
        let d = Decomposition::new(vec![tm(-0.5, 0.2), tm(-0.4, 0.0)]).unwrap();
        let r = normalize_labels(&d, &pat("1?1")).unwrap();
        assert_eq!(r.flipped_nodes(), vec![1]);
        assert_abs_diff_eq!(r.decomposition.steps()[0].tau(), 0.5);
        assert_abs_diff_eq!(r.decomposition.steps()[0].rho(), -0.2);
        assert_abs_diff_eq!(r.decomposition.steps()[1].tau(), 0.4);
        assert_abs_diff_eq!(r.decomposition.steps()[1].rho(), 0.0);
        // end-to-end law unchanged, checked on explicit matrix products
        let before = d.composed().matrix();
        let after = r.decomposition.composed().matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(before[i][j], after[i][j], epsilon = 1e-12);
            }
        }

        let d = Decomposition::new(vec![tm(0.5, 0.2), tm(0.4, 0.0)]).unwrap();
        let r = normalize_labels(&d, &pat("1?1")).unwrap();
        assert!(r.flipped_nodes().is_empty());
        assert_eq!(r.decomposition, d);

        let d = Decomposition::single(tm(0.0, 0.3));
        assert!(matches!(
            normalize_labels(&d, &pat("11")),
            Err(Error::NormalizationImpossible { step: 1 })
        ));
    }

    #[test]
    fn normalize_flips_outcome_for_negative_effect() {
        let d = Decomposition::new(vec![tm(0.5, 0.2), tm(-0.4, 0.1)]).unwrap();
        let r = normalize_labels(&d, &pat("101")).unwrap();
        assert_eq!(r.flipped_nodes(), vec![2]);
        assert_eq!(r.evidence.to_string(), "100");
        assert!(r.decomposition.steps().iter().all(|s| s.tau() > 0.0));
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(EvidencePattern::enumerate(1).len(), 4);
        assert_eq!(EvidencePattern::enumerate(3).len(), 36);
        let all = EvidencePattern::enumerate(4);
        assert_eq!(all.len(), 108);
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 108);
    }

    fn step() -> impl Strategy<Value = TransitionMatrix> {
        (-1.0f64..=1.0, -1.0f64..=1.0).prop_map(|(t, u)| tm(t, u * (1.0 - t.abs())))
    }

    fn marks_strategy() -> impl Strategy<Value = String> {
        proptest::collection::vec(prop_oneof![Just('0'), Just('1'), Just('?')], 2..12).prop_map(
            |mut v| {
                let n = v.len();
                if v[0] == '?' {
                    v[0] = '1';
                }
                if v[n - 1] == '?' {
                    v[n - 1] = '0';
                }
                v.into_iter().collect()
            },
        )
    }

    proptest! {
        #[test]
        fn pattern_round_trip(s in marks_strategy()) {
            prop_assert_eq!(pat(&s).to_string(), s);
        }

        #[test]
        fn composed_matches_matrix_fold(steps in proptest::collection::vec(step(), 1..=10)) {
            let d = Decomposition::new(steps.clone()).unwrap();
            let mut m = [[1.0, 0.0], [0.0, 1.0]];
            for s in &steps {
                let b = s.matrix();
                let mut c = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        c[i][j] = m[i][0] * b[0][j] + m[i][1] * b[1][j];
                    }
                }
                m = c;
            }
            let p = d.composed().matrix();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((p[i][j] - m[i][j]).abs() < 1e-12);
                }
            }
            // closed-form sums
            let tau: f64 = steps.iter().map(|s| s.tau()).product();
            let rho: f64 = (0..steps.len())
                .map(|i| steps[i].rho() * steps[i + 1..].iter().map(|s| s.tau()).product::<f64>())
                .sum();
            prop_assert!((d.composed().tau() - tau).abs() < 1e-12);
            prop_assert!((d.composed().rho() - rho).abs() < 1e-12);
        }

        #[test]
        fn merging_never_lowers_xi_upper(steps in proptest::collection::vec(step(), 2..=8), i in 0usize..7) {
            let d = Decomposition::new(steps).unwrap();
            let i = i % (d.len() - 1);
            let merged = d.merge_adjacent(i).unwrap();
            prop_assert!(merged.xi_upper() >= d.xi_upper() - 1e-12);
        }

        #[test]
        fn segments_partition_chain(steps in proptest::collection::vec(step(), 1..=8), seed in any::<u64>()) {
            let d = Decomposition::new(steps).unwrap();
            let n = d.len();
            let mut marks = vec![Mark::One; n + 1];
            for (i, m) in marks.iter_mut().enumerate().take(n).skip(1) {
                *m = [Mark::Zero, Mark::One, Mark::Unobserved][((seed >> (2 * i)) % 3) as usize];
            }
            let e = EvidencePattern::new(marks).unwrap();
            let segs = segments(&d, &e).unwrap();
            let joined: Vec<TransitionMatrix> = segs.iter().flat_map(|s| s.inner_steps.clone()).collect();
            prop_assert_eq!(joined, d.steps().to_vec());
            for w in segs.windows(2) {
                prop_assert_eq!(w[0].end_index, w[1].start_index);
            }
        }
    }
}
