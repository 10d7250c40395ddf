//! Blackwell approachability for vector-payoff repeated games.
//!
//! The crate covers the whole pipeline from single-round forcing questions to
//! repeated play:
//!
//! - [`geometry`]: points, halfspaces, compact target sets, projections,
//!   support functions and the Hausdorff metric.
//! - [`lp`]: a dense two-phase simplex solver and matrix-game values.
//! - [`game`]: finite vector-payoff games and their bilinear mixed extensions.
//! - [`forcing`]: 1-/2-forcing oracles with replayable certificates.
//! - [`approach`]: the greedy halfspace-forcing approach strategy and the
//!   round-by-round potential audit.
//! - [`avoid`]: counterexample search, shrinkage, onion peeling, the rind
//!   index and the escaping opponent strategy.
//! - [`stochastic`]: sampled play over mixed games and the Hoeffding horizon.
//! - [`cli`]: scenario registry and the experiment runner behind the binary.

pub mod approach;
pub mod avoid;
pub mod cli;
pub mod error;
pub mod forcing;
pub mod game;
pub mod geometry;
pub mod lp;
pub mod play;
pub mod stochastic;

pub use error::{Error, Result};
pub use game::{Action, Game, GameMode};
pub use geometry::{Halfspace, Point, TargetSet};
