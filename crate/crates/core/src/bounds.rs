//! Interval bounds on the probability of causation.
//!
//! All three bounds share one shape. For a stretch of chain from an observed
//! node with value `a` to an observed node with value `b`, with end-to-end law
//! `P(tau, rho)` and slack range `[|tau|, U]`:
//!
//! ```text
//! lo = max(0, s * tau) / Pr(b | a)        hi = (U + s * tau) / (2 Pr(b | a))
//! ```
//!
//! where `s = +1` if `a == b` and `-1` otherwise. The simple bound takes
//! `U = 1 - |rho|`; with a known chain `U = prod (1 - |rho_i|)`. With observed
//! mediators the chain splits into segments and the bounds multiply.

use crate::chain::{segments, Decomposition, EvidencePattern, Segment};
use crate::{Error, Result, TransitionMatrix, EPS};

/// Which formula produced a [`BoundsResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Simple,
    Unobserved,
    EvidenceProduct,
    /// Point identification under no prevention.
    Monotonicity,
    /// Stratum-weighted bounds under a covariate model.
    CovariateMixture,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsResult {
    pub lo: f64,
    pub hi: f64,
    /// `hi - lo <= EPS`.
    pub identified: bool,
    pub method: Method,
}

impl BoundsResult {
    pub(crate) fn new(lo: f64, hi: f64, method: Method) -> Self {
        let lo = lo.clamp(0.0, 1.0);
        let hi = hi.clamp(0.0, 1.0).max(lo);
        Self {
            lo,
            hi,
            identified: hi - lo <= EPS,
            method,
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lo - slack && v <= self.hi + slack
    }
}

/// `(lo, hi)` for one stretch of chain; see the module docs.
fn stretch_bounds(
    law: &TransitionMatrix,
    xi_upper: f64,
    from: bool,
    to: bool,
    what: impl FnOnce() -> String,
) -> Result<(f64, f64)> {
    let entry = law.entry(from, to);
    if entry <= 0.0 {
        return Err(Error::NullEvent(format!(
            "{}: Pr({} | {} ) = 0 under {law}",
            what(),
            to as u8,
            from as u8
        )));
    }
    let signed_tau = if from == to { law.tau() } else { -law.tau() };
    let lo = signed_tau.max(0.0) / entry;
    let hi = 0.5 * (xi_upper + signed_tau) / entry;
    Ok((lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)))
}

/// Bounds from the end-to-end law alone.
pub fn simple_bounds(p: &TransitionMatrix, x: bool, y: bool) -> Result<BoundsResult> {
    let (lo, hi) = stretch_bounds(p, 1.0 - p.rho().abs(), x, y, || "X -> Y".to_string())?;
    debug_assert!(gamma_delta_upper(p, x, y).is_none_or(|ub| (ub - hi).abs() < 1e-9));
    Ok(BoundsResult::new(lo, hi, Method::Simple))
}

/// The simple upper bound through `gamma` and `delta`, for `0 <= tau < 1`.
pub fn gamma_delta_upper(p: &TransitionMatrix, x: bool, y: bool) -> Option<f64> {
    let m = p.measures().ok()?;
    let nonneg = p.rho() >= 0.0;
    Some(match (x, y, nonneg) {
        (false, false, true) | (true, false, true) => 1.0,
        (false, true, true) => m.gamma,
        (true, true, true) => m.delta,
        (false, false, false) => m.delta,
        (false, true, false) | (true, true, false) => 1.0,
        (true, false, false) => m.gamma,
    })
}

/// Bounds with every mediator of `d` unobserved.
pub fn unobserved_bounds(d: &Decomposition, x: bool, y: bool) -> Result<BoundsResult> {
    let (lo, hi) = stretch_bounds(&d.composed(), d.xi_upper(), x, y, || "X -> Y".to_string())?;
    Ok(BoundsResult::new(lo, hi, Method::Unobserved))
}

/// Bounds for one segment between consecutive observed nodes.
pub fn segment_bounds(seg: &Segment) -> Result<(f64, f64)> {
    stretch_bounds(&seg.composed(), seg.xi_upper(), seg.start_value, seg.end_value, || {
        format!(
            "segment M{} = {} -> M{} = {}",
            seg.start_index, seg.start_value as u8, seg.end_index, seg.end_value as u8
        )
    })
}

/// Bounds given the observed values in `e`: products of per-segment bounds.
pub fn evidence_bounds(d: &Decomposition, e: &EvidencePattern) -> Result<BoundsResult> {
    let segs = segments(d, e)?;
    let mut lo = 1.0;
    let mut hi = 1.0;
    for seg in &segs {
        let (l, h) = segment_bounds(seg)?;
        lo *= l;
        hi *= h;
    }
    let method = if segs.len() == 1 {
        Method::Unobserved
    } else {
        Method::EvidenceProduct
    };
    Ok(BoundsResult::new(lo, hi, method))
}
