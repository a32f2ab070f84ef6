//! Damped-polariton numerics: model dielectric functions, complex dispersion,
//! velocity sum rules, transient coefficients and spontaneous emission.

pub mod dispersion;
pub mod emission;
pub mod error;
pub mod poly;
pub mod quad;
pub mod response;
pub mod sum_rules;
pub mod transients;

pub use error::{Error, Result};
pub use response::{
    epsilon_from_coupling, imag_eps_identity_check, Cutoff, DielectricModel, LorentzCutoffModel,
    LosslessModel, PointScatterCutoffModel, TabulatedCoupling,
};
