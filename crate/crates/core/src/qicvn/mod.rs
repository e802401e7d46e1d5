//! Quantum-inspired complex-valued classifier: per-feature amplitude/phase
//! embeddings become normalised pure states, windows of states mix into
//! density matrices weighted by the softmax of their amplitude norms, K
//! trainable measurements read each mixture out, and a max-pool over windows
//! feeds a linear softmax head.

mod density;
mod embed;
mod measure;
mod network;

pub use density::{mixture_density, mixture_parts, DensityMatrix};
pub use embed::{
    embed_feature, feature_state, normalize_state, to_complex, ComplexEmbeddingParams,
    ComplexState, FeatureEmbedding, AMP_NORM_EPS,
};
pub use measure::{measure, MeasurementSet};
pub use network::{qicvn_forward, QicvnDiagnostics, QicvnOutput, QicvnParams, WindowSpec};
