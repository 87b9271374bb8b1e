//! Finite-domain constraint store: domains, trail, propagators, labelling.

mod domain;
mod encode;
pub mod props;
mod search;
mod store;

pub use domain::Domain;
pub use encode::{EncodeError, Encoding};
pub use props::AllDiffStrength;
pub use search::{is_fd_diff, is_fd_eq, label, select_var, settle, Budget, Hook, NoHook, Outcome, SearchStats};
pub use store::{Array, ArrayId, Fail, PropId, Propagator, Store, VarId, TIER_ELEM, TIER_INDEX, TIER_OTHER};
