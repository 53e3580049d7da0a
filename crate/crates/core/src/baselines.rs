//! Comparison yardsticks: the monotonicity bound and two binary covariate
//! constructions that are consistent with a given law.

use crate::bounds::{simple_bounds, BoundsResult, Method};
use crate::counterfactual::pc_at;
use crate::{Error, Result, TransitionMatrix};

/// PC under the assumption that the exposure never prevents the outcome,
/// which pins the slack at `tau`.
pub fn monotonicity_bound(p: &TransitionMatrix) -> Result<BoundsResult> {
    if p.tau() < 0.0 {
        return Err(Error::Precondition(format!(
            "monotonicity needs tau >= 0, got {}",
            p.tau()
        )));
    }
    let v = pc_at(p, p.tau(), true, true)?;
    Ok(BoundsResult::new(v, v, Method::Monotonicity))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CovariateKind {
    /// Observing `C = 1` identifies PC at 1.
    ObservedIdentifiesOne,
    /// An unobserved covariate under which PC reaches the simple upper bound.
    UnobservedExtremal,
}

/// A binary covariate `C` with `Pr(C = 1) = pi` and laws `p0`, `p1` within
/// each stratum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateModel {
    pub pi: f64,
    pub p0: TransitionMatrix,
    pub p1: TransitionMatrix,
}

impl CovariateModel {
    /// `pi P1 + (1 - pi) P0`, entrywise.
    pub fn mixture(&self) -> [[f64; 2]; 2] {
        let (a, b) = (self.p1.matrix(), self.p0.matrix());
        let mut m = [[0.0; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                m[x][y] = self.pi * a[x][y] + (1.0 - self.pi) * b[x][y];
            }
        }
        m
    }

    /// Largest entrywise gap between the mixture and `p`.
    pub fn mixture_error(&self, p: &TransitionMatrix) -> f64 {
        let (m, q) = (self.mixture(), p.matrix());
        (0..4).map(|k| (m[k / 2][k % 2] - q[k / 2][k % 2]).abs()).fold(0.0, f64::max)
    }

    fn stratum(&self, c: bool) -> (f64, &TransitionMatrix) {
        if c {
            (self.pi, &self.p1)
        } else {
            (1.0 - self.pi, &self.p0)
        }
    }

    /// Bounds on PC for `X = Y = 1` within stratum `c`; `None` if the
    /// stratum never has `Y = 1` under `X = 1`.
    pub fn pc_given(&self, c: bool) -> Option<BoundsResult> {
        simple_bounds(self.stratum(c).1, true, true).ok()
    }

    /// Bounds on PC for `X = Y = 1` with `C` unobserved: the strata bounds
    /// weighted by `Pr(C = c | X = 1, Y = 1)`.
    pub fn pc_marginal(&self) -> Result<BoundsResult> {
        let mut lo = 0.0;
        let mut hi = 0.0;
        let mut total = 0.0;
        for c in [false, true] {
            let (w, q) = self.stratum(c);
            let mass = w * q.entry(true, true);
            if mass > 0.0 {
                let b = simple_bounds(q, true, true)?;
                lo += mass * b.lo;
                hi += mass * b.hi;
                total += mass;
            }
        }
        if total <= 0.0 {
            return Err(Error::NullEvent("Pr(Y = 1 | X <- 1) = 0 in every stratum".into()));
        }
        Ok(BoundsResult::new(lo / total, hi / total, Method::CovariateMixture))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateResult {
    pub kind: CovariateKind,
    pub model: CovariateModel,
    /// PC for `X = Y = 1` given `C = 1`.
    pub pc_given_c1: Option<BoundsResult>,
    /// PC for `X = Y = 1` with `C` unobserved.
    pub pc_marginal: BoundsResult,
}

impl CovariateResult {
    /// The value the construction is built to reach.
    pub fn headline_pc(&self) -> f64 {
        match self.kind {
            CovariateKind::ObservedIdentifiesOne => self.pc_given_c1.map_or(f64::NAN, |b| b.lo),
            CovariateKind::UnobservedExtremal => self.pc_marginal.lo,
        }
    }
}

fn law(m: [[f64; 2]; 2]) -> Result<TransitionMatrix> {
    if m.iter().flatten().any(|&v| !(-1e-12..=1.0 + 1e-12).contains(&v)) {
        return Err(Error::Infeasible(format!("stratum law {m:?} has entries outside [0, 1]")));
    }
    TransitionMatrix::from_matrix(m)
}

pub fn covariate_construction(p: &TransitionMatrix, kind: CovariateKind) -> Result<CovariateResult> {
    let (t, r) = (p.tau(), p.rho());
    if t <= 0.0 {
        return Err(Error::Precondition(format!("covariate constructions need tau > 0, got {t}")));
    }
    let model = match kind {
        CovariateKind::ObservedIdentifiesOne => {
            let row1 = [(1.0 - t - r) / 2.0, (1.0 + t + r) / 2.0];
            CovariateModel {
                pi: (1.0 + t - r) / 2.0,
                p1: law([[1.0, 0.0], row1])?,
                p0: law([[0.0, 1.0], row1])?,
            }
        }
        CovariateKind::UnobservedExtremal => {
            let pi = (1.0 + t + r) / 2.0;
            if r < 0.0 {
                let d = 1.0 - t - r;
                CovariateModel {
                    pi,
                    p1: TransitionMatrix::identity(),
                    p0: law([[-2.0 * r / d, (1.0 - t + r) / d], [1.0, 0.0]])?,
                }
            } else {
                let s = 1.0 + t + r;
                CovariateModel {
                    pi,
                    p1: law([[(1.0 + t - r) / s, 2.0 * r / s], [0.0, 1.0]])?,
                    p0: law([[0.0, 1.0], [1.0, 0.0]])?,
                }
            }
        }
    };
    let err = model.mixture_error(p);
    if err > 1e-12 {
        return Err(Error::Infeasible(format!(
            "covariate model does not reproduce {p} (gap {err})"
        )));
    }
    Ok(CovariateResult {
        kind,
        model,
        pc_given_c1: model.pc_given(true),
        pc_marginal: model.pc_marginal()?,
    })
}
