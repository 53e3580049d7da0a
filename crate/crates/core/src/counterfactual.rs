//! The joint law of the potential outcomes `(Y0, Y1)`.
//!
//! Given the interventional law `P(tau, rho)` the joint table of `(Y0, Y1)`
//! has one free parameter, the slack `xi = Pr(Y0 != Y1)`:
//!
//! ```text
//!          Y1 = 0           Y1 = 1
//! Y0 = 0   (1 - rho - xi)/2  (xi + tau)/2
//! Y0 = 1   (xi - tau)/2      (1 + rho - xi)/2
//! ```
//!
//! Every cell is nonnegative iff `|tau| <= xi <= 1 - |rho|`.

use crate::chain::Decomposition;
use crate::{Error, Result, TransitionMatrix, EPS};

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lo - slack && v <= self.hi + slack
    }

    /// Linear interpolation, `t = 0` at `lo` and `t = 1` at `hi`.
    pub fn lerp(&self, t: f64) -> f64 {
        self.lo + t * (self.hi - self.lo)
    }
}

/// Feasible slack range `[|tau|, 1 - |rho|]`.
pub fn xi_bounds(p: &TransitionMatrix) -> Interval {
    let lo = p.tau().abs();
    let hi = (1.0 - p.rho().abs()).max(lo);
    Interval::new(lo, hi)
}

/// Feasible slack range of the end-to-end law when the chain is known:
/// `[|tau|, prod (1 - |rho_i|)]`.
pub fn xi_bounds_decomposed(d: &Decomposition) -> Interval {
    let lo = d.composed().tau().abs();
    Interval::new(lo, d.xi_upper().max(lo))
}

/// Cells of the joint table, indexed `[y0][y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialOutcomeTable {
    pub base: TransitionMatrix,
    pub xi: f64,
    pub cells: [[f64; 2]; 2],
}

impl PotentialOutcomeTable {
    pub fn cell(&self, y0: bool, y1: bool) -> f64 {
        self.cells[y0 as usize][y1 as usize]
    }

    /// `Pr(Y0 != Y1)`; equals `xi`.
    pub fn general_causation(&self) -> f64 {
        self.cells[0][1] + self.cells[1][0]
    }
}

const CELL_NAMES: [[&str; 2]; 2] = [["p(0,0)", "p(0,1)"], ["p(1,0)", "p(1,1)"]];

pub fn table_at(p: &TransitionMatrix, xi: f64) -> Result<PotentialOutcomeTable> {
    let (t, r) = (p.tau(), p.rho());
    let raw = [
        [0.5 * (1.0 - r - xi), 0.5 * (xi + t)],
        [0.5 * (xi - t), 0.5 * (1.0 + r - xi)],
    ];
    let feasible = xi_bounds(p);
    for (i, row) in raw.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(v >= -EPS) {
                return Err(Error::InfeasibleSlack {
                    xi,
                    lo: feasible.lo,
                    hi: feasible.hi,
                    cell: CELL_NAMES[i][j],
                });
            }
        }
    }
    Ok(PotentialOutcomeTable {
        base: *p,
        xi,
        cells: raw.map(|row| row.map(|v| v.max(0.0))),
    })
}

/// Probability that `X = x` caused `Y = y` when the slack equals `xi`.
pub fn pc_at(p: &TransitionMatrix, xi: f64, x: bool, y: bool) -> Result<f64> {
    let table = table_at(p, xi)?;
    let entry = p.entry(x, y);
    if entry <= 0.0 {
        return Err(Error::NullEvent(format!(
            "Pr(Y={} | X<-{}) = 0 under {p}",
            y as u8, x as u8
        )));
    }
    // C_xy has probability p(0,1) when x == y and p(1,0) otherwise
    let cause = if x == y { table.cells[0][1] } else { table.cells[1][0] };
    Ok((cause / entry).clamp(0.0, 1.0))
}

/// Distribution over the four deterministic response functions of `Y` to `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseDistribution {
    /// `Y = 0` whatever `X`.
    pub const0: f64,
    /// `Y = 1` whatever `X`.
    pub const1: f64,
    /// `Y = X`.
    pub identity: f64,
    /// `Y = 1 - X`.
    pub flip: f64,
}

impl ResponseDistribution {
    pub fn as_array(&self) -> [f64; 4] {
        [self.const0, self.const1, self.identity, self.flip]
    }

    pub fn p1_given_do1(&self) -> f64 {
        self.identity + self.const1
    }

    pub fn p1_given_do0(&self) -> f64 {
        self.flip + self.const1
    }
}

pub fn response_distribution(p: &TransitionMatrix, xi: f64) -> Result<ResponseDistribution> {
    let t = table_at(p, xi)?;
    Ok(ResponseDistribution {
        const0: t.cells[0][0],
        const1: t.cells[1][1],
        identity: t.cells[0][1],
        flip: t.cells[1][0],
    })
}
