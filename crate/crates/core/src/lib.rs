//! Exact-arithmetic certification of the constructive geometry of quartic K3
//! surfaces: the chart atlas and holomorphic symplectic form, a parametrized
//! hyperkähler structure, Kähler-angle identities, triholomorphy conditions,
//! and Bézout-based finiteness of curve intersections.

pub mod algebra;
pub mod atlas;
pub mod bezout;
pub mod error;
pub mod hyperkahler;
pub mod modp;
pub mod par;
pub mod parse;
pub mod poly;
pub mod projective;
pub mod roots;
pub mod scalar;
pub mod suite;
pub mod surface;

pub use error::{Error, Result};
pub use poly::MultiPoly;
pub use scalar::{ComplexF, GaussRat};
