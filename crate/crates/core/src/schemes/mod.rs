//! The shipped certification schemes.

pub mod fragments;
pub mod spanning_tree;
pub mod treedepth_cert;

pub use fragments::{depth2_scheme, existential_fo_scheme, Depth2Scheme, ExistentialFoScheme};
pub use spanning_tree::{
    spanning_tree_scheme, vertex_count_scheme, SpanningTreeScheme, VertexCountScheme,
};
pub use treedepth_cert::{reconstruct_forest, td_prover, td_prover_with_model, TreedepthScheme};
