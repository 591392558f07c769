//! Conservative matrix fields for polynomial continued fractions.

pub mod cf;
pub mod constants;
pub mod exact;
pub mod field;
pub mod lattice;
pub mod search;
mod par;

pub use par::set_jobs;
