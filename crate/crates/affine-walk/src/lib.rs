//! Transition densities of isotropic random walks on affine buildings of type `Ã_r`.
//!
//! Three independent routes to `p_n(λ)`: exact rational dynamic programming
//! on the radial chain ([`radial_dp`]), Fourier inversion on the torus
//! ([`fourier_kernel`]), and closed-form sharp estimates ([`estimates`]).

pub mod bigmath;
pub mod cli;
pub mod error;
pub mod estimates;
pub mod exppoly;
pub mod fourier_kernel;
pub mod phase;
pub mod radial_dp;
pub mod root_system;
pub mod special_fn;

pub use error::{Error, Result};
