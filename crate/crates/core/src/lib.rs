//! Exact Rankin-Selberg gamma factors for simple supercuspidal
//! representations of the split even special orthogonal group SO_{2l} over
//! a p-adic field, twisted by quadratic tamely ramified characters of GL_1.
//!
//! The crate computes the gamma factor two independent ways (closed
//! rational-function forms and truncated p-adic integration), assembles the
//! tame part of the associated Langlands parameter from the pole structure,
//! and exposes a verification suite that cross-checks every closed form
//! against its numeric oracle.

pub mod characters;
pub mod cyclo;
pub mod padic;
pub mod ratfunc;
