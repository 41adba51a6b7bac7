//! Cross-lingual embedding geometry toolkit.
//!
//! Works over a `[layer × concept × language × dim]` embedding tensor
//! ([`store::EmbeddingStore`]) and provides isotropy correction, language
//! centering, PCA and UPGMA clustering ([`geometry`]), the permutation and
//! rank statistics used to test hypotheses about that geometry ([`stats`]),
//! the experiment drivers that produce JSON reports ([`experiments`]) and a
//! planted-structure generator used as a test oracle ([`synth`]).

pub mod cli;
pub mod experiments;
pub mod geometry;
pub mod numeric;
pub mod stats;
pub mod store;
pub mod synth;
