//! Partial derivatives of chart functions up to order three.
//!
//! Two schemes are available. Forward jets propagate truncated Taylor
//! polynomials exactly; central finite differences (optionally with one
//! Richardson level) estimate the same partials from point evaluations.
//! Either way the result can be embedded as a [`Jet`] over the bundle
//! chart, so all downstream tensor algebra is shared.

mod derive;
mod jet;
mod scalar;
mod space;

pub use derive::{derive, derive_map, DerivativeBundle, DiffScheme, SchemeKind};
pub use jet::Jet;
pub use scalar::{ChartMap, Scalar, ScalarField};
pub use space::{MAX_ORDER, MAX_VARS};
