//! Root-aligned SMILES toolkit.
//!
//! The crate models molecules as attributed graphs ([`molgraph`]), reads and
//! writes SMILES with full control over the traversal root ([`smiles`]), and
//! builds on those two layers to produce aligned source/target string pairs
//! for reaction-prediction models ([`align`], [`augment`]), to aggregate beam
//! search outputs over augmented test inputs ([`scoring`]), and to measure
//! string and accuracy statistics over datasets ([`metrics`], [`dataio`]).
//!
//! The guiding idea is that a SMILES string is one of many equivalent
//! traversals of the molecular graph. Choosing the traversal root on both
//! sides of a reaction so that product and reactant strings start at the same
//! mapped atom makes the two strings nearly identical, which is what the
//! alignment passes here produce.

pub mod align;
pub mod augment;
pub mod dataio;
pub mod metrics;
pub mod molgraph;
pub mod scoring;
pub mod smiles;

#[cfg(test)]
pub(crate) mod testutil;
