//! Cooperation of congruence closure and finite-domain propagation for
//! conjunctions over integer arrays.

pub mod bench;
pub mod cc;
pub mod ext;
pub mod fd;
pub mod formula;
pub mod oracle;
pub mod supervisor;
