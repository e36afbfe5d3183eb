//! Spatial voting simulations for plurality and instant-runoff voting with a
//! continuous electorate on [0, 1].

pub mod asymptotics;
pub mod dist;
pub mod error;
pub mod exactk3;
pub mod experiments;
pub mod seeds;
pub mod special;
pub mod stats;
pub mod tabulate;
pub mod zones;

pub use dist::{DistSpec, VoterDistribution};
pub use error::{Error, Result};
pub use tabulate::{Profile, Rule, TabulationOutcome, TieRule};
