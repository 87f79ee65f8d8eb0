//! Constructive models: finite sets and finite groupoids.

pub mod fingpd;
pub mod finset;
pub mod gpd;
pub mod load;
pub mod universe;

pub use fingpd::FinGpd;
pub use finset::{FinMap, FinSet};
pub use load::load_presentation;
