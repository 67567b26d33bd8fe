//! Online recommendation under social influence, cast as a linear bandit.
//!
//! Users hold inherent interest vectors `u_i⁰` that drift toward their
//! neighbours' interests through a row-stochastic influence matrix `P`. After
//! `t` steps the expected profiles are `A(t)U⁰` with
//! `A(t) = α Σ_{k≤t} ((1−α)P)^k`, so the total expected reward of a joint
//! recommendation `V` is the bilinear form `u₀ᵀ L(t) v` with
//! `L(t) = A(t)ᵀ ⊗ I_d`. The crate provides:
//!
//! - [`influence`]: the dynamics, `A(t)`, `A∞` and the implicit `L(t)`;
//! - [`environment`]: rewards, contexts, the clairvoyant oracle and regret;
//! - [`arms`]: finite catalogs, the unit ball and the per-user argmax;
//! - [`estimation`]: the ridge estimate of `u₀` and its precision;
//! - [`policy`]: LinREL, Thompson sampling, SDP-relaxed LinUCB and baselines;
//! - [`sim`]: the shared simulation loop;
//! - [`graph_gen`] and [`data_pipeline`]: synthetic and data-derived inputs;
//! - [`harness`]: configured experiment grids, bounds, CSV and plot output.

pub mod arms;
pub mod data_pipeline;
pub mod environment;
pub mod error;
pub mod estimation;
pub mod graph_gen;
pub mod harness;
pub mod influence;
pub mod linalg;
pub mod policy;
pub mod sim;

pub use arms::Catalog;
pub use environment::{NoiseModel, Recommendation, RoundRecord};
pub use error::{Error, Result};
pub use influence::{InfluenceGraph, ProfileMatrix, SocialState};
pub use sim::{simulate, Dynamics, Scenario};
