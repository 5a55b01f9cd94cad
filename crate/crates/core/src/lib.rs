//! Weierstrass data on branched tori for the tG and rGL families of
//! triply periodic minimal surfaces: period solver, family tracing,
//! asymptotic validators and mesh export.

pub mod asymptotics;
pub mod cli;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod period;
pub mod quadrature;
pub mod validate;
pub mod weierstrass;

pub use elliptic::{EllipticModulus, ReducedTau, Tau};
pub use error::{GyreError, Result};
pub use weierstrass::{Family, WeierstrassData};
