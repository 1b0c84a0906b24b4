//! Exact manipulation of two-input/two-output non-signaling boxes.
//!
//! The crate models boxes as 16-entry conditional probability tables and
//! provides, on top of them:
//!
//! - constructors for the named boxes (PR, anti-PR, the correlated and
//!   anti-correlated local boxes, the fully mixed box), affine mixtures,
//!   correlators, CHSH values, validity and locality predicates, and the
//!   depolarization protocol ([`boxes`]);
//! - deterministic two-copy wiring strategies with a bijective 15-bit
//!   encoding, and exact composition of two boxes under a strategy pair,
//!   including opposite query orders ([`wiring`]);
//! - the induced distillation maps on the correlated family and on the
//!   PR / anti-PR / Pc section, trajectories, fixed points and their
//!   stability ([`dynamics`]);
//! - exhaustive optimality search over all wiring pairs, classification of
//!   the section by collapse of communication complexity, and figure-data
//!   emitters ([`analysis`]).
//!
//! Everything is deterministic and pure; boxes are immutable values, safe to
//! share across threads.

pub mod analysis;
pub mod boxes;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod wiring;

pub use boxes::{Correlators, Epsilon, NsBox, PlaneCoords, B_CC, B_Q, TOL_EXACT, TOL_FIT};
pub use error::{Error, Result};
pub use wiring::{
    compose, enumerate_party_wirings, estimate_composed, FirstBox, PartyWiring, ProtocolWiring,
    PARTY_WIRING_COUNT,
};
