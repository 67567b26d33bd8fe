//! Recommendation policies.
//!
//! Every policy sees the same protocol: the simulator first plays the
//! spanning items and reports those observations through
//! [`Policy::observe`], then alternates [`Policy::select`] and
//! [`Policy::observe`] for each selection round.

use nalgebra::{DMatrix, DVector};

use crate::environment::Recommendation;
use crate::error::Result;

pub mod baselines;
pub mod linrel;
pub mod linucb;
pub mod thompson;

pub use baselines::{RandomPolicy, Regression};
pub use linrel::{LinRel, LinRelConfig};
pub use linucb::{LinUcb, LinUcbConfig};
pub use thompson::{SampleMode, ThompsonConfig, ThompsonSampling};

pub trait Policy {
    fn name(&self) -> &str;

    /// Chooses the joint recommendation for selection round `round` (1-based)
    /// given the design matrix the policy is allowed to see.
    fn select(&mut self, design: &DMatrix<f64>, round: usize) -> Result<Recommendation>;

    /// Feeds back the rewards obtained for `rec` under `design`.
    fn observe(
        &mut self,
        design: &DMatrix<f64>,
        rec: &Recommendation,
        rewards: &DVector<f64>,
    ) -> Result<()>;
}
