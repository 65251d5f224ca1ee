//! Quantum circuits embedded in products of boundary-driven XXZ steady states.

pub mod aux_algebra;
pub mod circuit;
pub mod contraction;
pub mod encoder;
pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod mpo;
pub mod pauli;
pub mod sampler;
pub mod statevector;

pub use aux_algebra::{AuxPolynomial, AuxSite, Coupling, DoubledAuxSite, Encoding, EMBEDDING};
pub use circuit::{Circuit, Gate, GateKind};
pub use encoder::{check_normal, Encoder, EncoderTerm, SiteRef};
pub use error::{Error, Result};
pub use pauli::PauliLabel;
