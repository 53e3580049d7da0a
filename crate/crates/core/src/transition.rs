//! Binary transition matrices in the `(tau, rho)` parameterization.
//!
//! A law `P(Y = y | X <- x)` is stored as
//!
//! ```text
//!        y = 0              y = 1
//! x = 0  (1 + tau - rho)/2  (1 - tau + rho)/2
//! x = 1  (1 - tau - rho)/2  (1 + tau + rho)/2
//! ```
//!
//! with `tau` the average causal effect and `rho` the prevalence offset. All
//! four entries are nonnegative iff `|tau| + |rho| <= 1`.

use std::fmt;

use crate::{Error, Result, EPS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    tau: f64,
    rho: f64,
}

/// Scalar summaries of a transition with `0 <= tau < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedMeasures {
    /// Relative sufficiency `rho / (1 - tau)`.
    pub sigma: f64,
    /// `(1 - |sigma|) / (1 + |sigma|)`.
    pub gamma: f64,
    /// `(1 + tau - |rho|) / (1 + tau + |rho|)`.
    pub delta: f64,
}

impl TransitionMatrix {
    /// Builds a matrix, clamping violations of `|tau| + |rho| <= 1` that are
    /// within [`EPS`] and rejecting anything larger.
    pub fn new(tau: f64, rho: f64) -> Result<Self> {
        if !tau.is_finite() || !rho.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite transition parameters (tau = {tau}, rho = {rho})"
            )));
        }
        if tau.abs() + rho.abs() > 1.0 + EPS {
            return Err(Error::Domain(format!(
                "|tau| + |rho| = {} exceeds 1 (tau = {tau}, rho = {rho})",
                tau.abs() + rho.abs()
            )));
        }
        Ok(Self::clamped(tau, rho))
    }

    /// Projects `(tau, rho)` onto the valid diamond. Only for values already
    /// known to be valid up to rounding.
    pub(crate) fn clamped(tau: f64, rho: f64) -> Self {
        let tau = tau.clamp(-1.0, 1.0);
        let room = 1.0 - tau.abs();
        let rho = rho.clamp(-room, room);
        Self { tau, rho }
    }

    /// From `Pr(Y = 1 | X <- 0)` and `Pr(Y = 1 | X <- 1)`.
    pub fn from_conditionals(p1_given_do0: f64, p1_given_do1: f64) -> Result<Self> {
        for (name, p) in [("Pr(Y=1|X<-0)", p1_given_do0), ("Pr(Y=1|X<-1)", p1_given_do1)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("{name} = {p} is not a probability")));
            }
        }
        let tau = p1_given_do1 - p1_given_do0;
        let rho = p1_given_do1 - (1.0 - p1_given_do0);
        Ok(Self::clamped(tau, rho))
    }

    /// From a row-stochastic 2x2 matrix indexed `[x][y]`.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Result<Self> {
        for (x, row) in m.iter().enumerate() {
            if row.iter().any(|v| !(-EPS..=1.0 + EPS).contains(v)) {
                return Err(Error::Domain(format!("row {x} has an entry outside [0, 1]: {row:?}")));
            }
            if (row[0] + row[1] - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!("row {x} does not sum to 1: {row:?}")));
            }
        }
        Self::new(m[1][1] - m[0][1], m[1][1] - m[0][0])
    }

    pub fn identity() -> Self {
        Self { tau: 1.0, rho: 0.0 }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `Pr(Y = y | X <- x)`, with bits encoded as `true == 1`.
    pub fn entry(&self, x: bool, y: bool) -> f64 {
        let (t, r) = (self.tau, self.rho);
        let v = match (x, y) {
            (false, false) => 1.0 + t - r,
            (false, true) => 1.0 - t + r,
            (true, false) => 1.0 - t - r,
            (true, true) => 1.0 + t + r,
        };
        (0.5 * v).clamp(0.0, 1.0)
    }

    /// Entries as a row-stochastic matrix indexed `[x][y]`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [
            [self.entry(false, false), self.entry(false, true)],
            [self.entry(true, false), self.entry(true, true)],
        ]
    }

    /// One entry of the law equals 1.
    pub fn is_degenerate(&self) -> bool {
        self.tau.abs() + self.rho.abs() >= 1.0 - EPS
    }

    /// The transition `X -> Z` of the chain `X -> (self) -> Y -> (next) -> Z`.
    pub fn compose(&self, next: &TransitionMatrix) -> TransitionMatrix {
        let out = Self::clamped(self.tau * next.tau, self.rho * next.tau + next.rho);
        debug_assert!({
            let (a, b, c) = (self.matrix(), next.matrix(), out.matrix());
            (0..2).all(|i| {
                (0..2).all(|j| ((a[i][0] * b[0][j] + a[i][1] * b[1][j]) - c[i][j]).abs() < 1e-9)
            })
        });
        out
    }

    /// The `n`-fold self composition, evaluated in closed form.
    pub fn power(&self, n: u32) -> TransitionMatrix {
        if n == 0 {
            return Self::identity();
        }
        let nf = n as f64;
        let t = self.tau;
        let tau_n = t.powi(n as i32);
        // rho * (1 + t + ... + t^(n-1))
        let geometric = if t == 1.0 {
            nf
        } else if t > 0.0 {
            // (1 - t^n) / (1 - t), both factors via expm1 to keep precision for t near 1
            let log_t = t.ln();
            (-(nf * log_t).exp_m1()) / (-log_t.exp_m1())
        } else {
            (1.0 - tau_n) / (1.0 - t)
        };
        Self::clamped(tau_n, self.rho * geometric)
    }

    /// The constant one-step law `Q` with `Q^n = self`, for `0 < tau < 1`.
    pub fn homogeneous_step(&self, n: u32) -> Result<TransitionMatrix> {
        if n == 0 {
            return Err(Error::Domain("number of steps must be positive".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Unsupported(format!(
                "homogeneous roots need 0 < tau < 1, got tau = {}",
                self.tau
            )));
        }
        let log_root = self.tau.ln() / n as f64;
        let tau_step = log_root.exp();
        let one_minus_step = -log_root.exp_m1();
        let rho_step = self.rho * one_minus_step / (1.0 - self.tau);
        if tau_step + rho_step.abs() > 1.0 + EPS {
            return Err(Error::Infeasible(format!(
                "homogeneous step (tau' = {tau_step}, rho' = {rho_step}) violates |tau'| + |rho'| <= 1"
            )));
        }
        Ok(Self::clamped(tau_step, rho_step))
    }

    pub fn measures(&self) -> Result<DerivedMeasures> {
        if self.tau >= 1.0 {
            return Err(Error::SigmaUndefined(self.tau));
        }
        if self.tau < 0.0 {
            return Err(Error::Domain(format!(
                "derived measures need tau >= 0, got {}",
                self.tau
            )));
        }
        let sigma = (self.rho / (1.0 - self.tau)).clamp(-1.0, 1.0);
        let a = sigma.abs();
        let r = self.rho.abs();
        Ok(DerivedMeasures {
            sigma,
            gamma: (1.0 - a) / (1.0 + a),
            delta: (1.0 + self.tau - r) / (1.0 + self.tau + r),
        })
    }
}

impl Default for TransitionMatrix {
    fn default() -> Self {
        Self::identity()
    }
}

impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P(tau={}, rho={})", self.tau, self.rho)
    }
}
