//! Pointwise slant geometry of submanifolds of flat Kähler space.
//!
//! Immersions are written in a small expression language ([`expr_dsl`]) and
//! evaluated to exact second-order jets. From those, [`tangent_geometry`]
//! splits φ into its tangent and normal blocks and clusters the Wirtinger
//! spectrum into slant distributions, [`connection_geometry`] supplies the
//! second fundamental form and covariant derivatives, and [`theorem_checks`]
//! turns the resulting identities into residual checks at sampled points.

pub mod ambient;
pub mod catalog;
pub mod cli;
pub mod connection_geometry;
pub mod expr_dsl;
pub mod tangent_geometry;
pub mod theorem_checks;
