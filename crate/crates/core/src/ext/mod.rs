//! Extensions beyond plain fixed-size arrays: uniform arrays, array
//! disequality, arrays of unknown size and maps.

mod diff_array;
mod maps;
mod unclosed;
mod uniform;

pub use diff_array::DiffArray;
pub use maps::{encode_maps, map_array_names};
pub use unclosed::{AccessUnclosed, UpdateUnclosed};
pub use uniform::uniform_rewrite_cc;
