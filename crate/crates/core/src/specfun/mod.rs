//! Special functions used by the closed-form channel expressions.
//!
//! All routines are pure; Gamma products are formed in log domain with sign
//! tracking.

mod gamma;
mod hyp2f1;
mod incbeta;
mod incgamma;
mod meijer;

pub use gamma::{
    beta_fn, digamma, gamma_fn, gamma_ratio, gamma_real, ln_beta, ln_gamma, ln_gamma_complex, ln_gamma_sign,
    rgamma,
};
pub use hyp2f1::gauss_2f1;
pub use incbeta::{beta_inc_reg, beta_inc_reg_ln, beta_inc_reg_split};
pub use incgamma::{gamma_p, gamma_q, upper_incomplete_gamma};
pub use meijer::{meijer_g, MeijerShape, ACCEPT_REL_TOL, CONTOUR_REL_TOL, MIN_POLE_GAP, SUPPORTED_SHAPES};
