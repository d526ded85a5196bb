//! Local differential privacy for key-value data.
//!
//! Users hold sparse sets of `(key, value)` pairs with values in `[−1, 1]`.
//! The crate provides the client-side perturbation mechanisms
//! ([`mechanisms`]), the full-record indexing one-hot encoding and its
//! conditional-query algebra ([`conditional`]), and synthetic / ratings
//! datasets with exact ground truth ([`datagen`]).
//!
//! All randomness flows through [`RandomSource`], so any experiment is
//! reproducible from its seed.

pub mod conditional;
pub mod datagen;
pub mod error;
pub mod mechanisms;
pub mod primitives;
pub mod record;
pub mod rng;

pub use error::{Error, Result};
pub use primitives::{DiscretizedState, PrivacyBudget};
pub use record::KeyValueRecord;
pub use rng::RandomSource;
