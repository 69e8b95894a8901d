//! Plane Cremona transformations: exact polynomial substrate, rational maps,
//! birationality and strata, foliations, dynamics, cubic configurations and
//! flow catalog checks.

pub mod polycore;
pub mod birat;
pub mod cubic;
pub mod cli;
pub mod dynamics;
pub mod expr;
pub mod flows;
pub mod foliation;
pub mod ratmap;
