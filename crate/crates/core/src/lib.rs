//! Online learning with hidden, time-varying feedback graphs.
//!
//! The learner never sees the graph: each round it plays an action and gets
//! back the losses of that action's out-neighbourhood. [`graph`] holds the
//! graph model and independence-number routines, [`env`] the sealed
//! environments, [`learners`] the policies, [`harness`] episode execution and
//! regret accounting, and [`verify`] executable checks of the quantitative
//! claims the algorithms rely on.

pub mod env;
pub mod graph;
pub mod learners;
pub mod seed;
pub mod harness;
pub mod verify;
