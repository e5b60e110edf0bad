//! Fock-space simulation of entanglement concentration by photon
//! subtraction on two-mode squeezed vacua.
//!
//! States live in a truncated multimode Fock space ([`fock`]); optical
//! elements act on them as dense matrices ([`optics`]); closed-form states
//! ([`analytic`]) are checked against brute-force pipelines ([`protocol`]),
//! and entanglement is measured by the negativity ([`entanglement`]).

pub mod analytic;
pub mod appendix;
pub mod entanglement;
mod error;
pub mod fock;
pub mod linalg;
pub mod optics;
pub mod protocol;

pub use num_complex::Complex64 as C64;

pub use analytic::{JointStrategyId, ModeSubtraction, SqueezingParam};
pub use entanglement::Bipartition;
pub use error::{Error, Result};
pub use fock::{DensityOperator, FockCutoff, ModeIndex, PureState};
pub use optics::{BeamSplitterSpec, GaussianProjector, LossSpec};
pub use protocol::{SimpleStrategy, Strategy, SweepRecord, TradeoffCurve};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fock-space.md")]
    mod fock_space {}
    #[doc = include_str!("../../../book/src/optics.md")]
    mod optics {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/negativity.md")]
    mod negativity {}
    #[doc = include_str!("../../../book/src/tradeoffs.md")]
    mod tradeoffs {}
    #[doc = include_str!("../../../book/src/loss.md")]
    mod loss {}
    #[doc = include_str!("../../../book/src/identity.md")]
    mod identity {}
}
