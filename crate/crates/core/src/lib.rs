//! Perpetual scheduling of growing items: exact simulation, approximation
//! algorithms for discrete and continuous bamboo trimming, and a brute-force
//! oracle for small instances.

pub mod continuous;
pub mod eight_fifths;
pub mod error;
pub mod gen;
pub mod online;
pub mod oracle;
pub mod pinwheel;
pub mod rates;
pub mod rational;
pub mod schedule;
pub mod sim;

pub use error::{Error, Result};
pub use rates::{InstanceFile, RateVector};
pub use rational::{Frac, Rational};
pub use schedule::{CyclicSchedule, ListSchedule, Residue, ResidueSchedule, ScheduleFile};
pub use sim::{evaluate_cyclic, simulate_discrete, Horizon, SimOptions, SimulationReport};
