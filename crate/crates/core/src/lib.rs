//! Verification and reconstruction of universal deformations for
//! compressible isotropic solids reinforced by inextensible fibers along Z.

pub mod compat;
pub mod constitutive;
pub mod diffgeo;
pub mod domain;
pub mod eigen;
pub mod error;
pub mod families;
pub mod jet;
pub mod mesh;
pub mod metrics;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod tensor;
pub mod universality;

pub use error::{Error, Result};
