pub mod ellipsoid;
pub mod error;
pub mod exactref;
pub mod gxy;
pub mod linfty;
pub mod lp;
pub mod model;
pub mod problems;
pub mod saa;

pub use error::{DroError, Result};
pub use model::*;
