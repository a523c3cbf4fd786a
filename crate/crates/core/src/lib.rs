//! Sequential measurements of conjugate observables on finite abelian groups.
//!
//! The crate models a finite abelian group `G`, its Weyl system `(U, V)` on
//! `ℓ²(G)`, and the W-covariant instruments that measure a smeared position
//! observable while disturbing a later momentum measurement as little as the
//! symmetry allows. Every covariant instrument is the mixture of translated
//! von Neumann measurements parametrised by a positive operator density on
//! `G`; measuring momentum afterwards yields a covariant phase-space
//! observable `C_S`, and every `C_S` arises this way.
//!
//! All numerical code is generic over [`Real`] (`f64` and `f32`). The
//! `*64` and `*32` aliases below fix the scalar type.
//!
//! ```
//! use seqconj::{Group, State64, WeylSystem64};
//! use seqconj::instruments::{covariant_instrument, CovariantMeasure};
//! use seqconj::sequential::{joint_observable, noise_measures};
//!
//! let ws = WeylSystem64::new(Group::cyclic(2).unwrap());
//! let probe = State64::basis(2, 0);
//! let mm = CovariantMeasure::delta(ws.group().clone(), &probe).unwrap();
//! let joint = joint_observable(&ws, &covariant_instrument(&ws, &mm).unwrap()).unwrap();
//! assert_eq!(joint.len(), 4);
//! let (sigma, _tau) = noise_measures(&ws, &mm).unwrap();
//! assert_eq!(sigma.weights, vec![1.0, 0.0]);
//! ```

pub mod algebra;
pub mod cli;
pub mod error;
pub mod group;
pub mod instruments;
pub mod observables;
pub mod random;
pub mod scalar;
pub mod sequential;
pub mod spin;
pub mod verify;
pub mod weyl;

pub use algebra::{CMatrix, Tolerance};
pub use error::{Error, Result};
pub use group::{DualElement, Group, GroupElement};
pub use instruments::{CovariantMeasure, CpMap, Instrument};
pub use observables::{Outcome, Povm, ProbVector, State};
pub use scalar::{Real, C};
pub use sequential::SequentialResult;
pub use spin::SpinFrame;
pub use weyl::{PhasePoint, WeylSystem};

pub type CMatrix64 = CMatrix<f64>;
pub type CMatrix32 = CMatrix<f32>;
pub type State64 = State<f64>;
pub type State32 = State<f32>;
pub type Povm64 = Povm<f64>;
pub type Povm32 = Povm<f32>;
pub type ProbVector64 = ProbVector<f64>;
pub type ProbVector32 = ProbVector<f32>;
pub type CpMap64 = CpMap<f64>;
pub type CpMap32 = CpMap<f32>;
pub type Instrument64 = Instrument<f64>;
pub type Instrument32 = Instrument<f32>;
pub type CovariantMeasure64 = CovariantMeasure<f64>;
pub type CovariantMeasure32 = CovariantMeasure<f32>;
pub type WeylSystem64 = WeylSystem<f64>;
pub type WeylSystem32 = WeylSystem<f32>;
pub type SpinFrame64 = SpinFrame<f64>;
pub type SpinFrame32 = SpinFrame<f32>;
