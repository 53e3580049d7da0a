//! Bounds on the probability of causation for binary exposure/outcome pairs.
//!
//! The crate works from a known interventional law `P(Y | X <- x)` stored as
//! an effect size `tau` and a prevalence offset `rho`, optionally refined by a
//! complete mediation chain `X -> M1 -> ... -> Y` and by partial evidence on
//! the mediators of the case at hand. Every closed-form bound in [`bounds`]
//! and [`extremal`] has a brute-force counterpart in [`oracle`].
//!
//! ```
//! use causabound::{bounds, TransitionMatrix};
//!
//! // Health rises from 1/3 to 2/3 under treatment.
//! let p = TransitionMatrix::from_conditionals(1.0 / 3.0, 2.0 / 3.0).unwrap();
//! let b = bounds::simple_bounds(&p, true, true).unwrap();
//! assert!((b.lo - 0.5).abs() < 1e-12 && (b.hi - 1.0).abs() < 1e-12);
//! ```

pub mod asymptotics;
pub mod baselines;
pub mod bounds;
pub mod chain;
pub mod counterfactual;
mod error;
pub mod extremal;
pub mod oracle;
pub mod transition;

pub use bounds::{BoundsResult, Method};
pub use chain::{Decomposition, EvidencePattern, Mark, Segment};
pub use counterfactual::{Interval, PotentialOutcomeTable, ResponseDistribution};
pub use error::{Error, Result};
pub use transition::{DerivedMeasures, TransitionMatrix};

/// Absolute slack used for validity, feasibility and identification checks.
pub const EPS: f64 = 1e-12;
