//! Distance and signed-area formation control for equilateral triangulated
//! formations.

pub mod analysis;
pub mod dynamics;
pub mod geometry;
pub mod graph;
pub mod hierarchy;
pub mod potentials;
pub mod runner;
