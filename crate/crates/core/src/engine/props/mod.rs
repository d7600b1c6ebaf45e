//! Dedicated filtering algorithms.

pub mod alldiff;
pub mod automaton;
pub mod count;
pub mod intension;
pub mod linear;
pub mod order;
pub mod sched;
pub mod table;
