//! Local certification of graph properties: the radius-1 prover/verifier
//! model, certification schemes for spanning trees, counting, FO fragments,
//! treedepth and kernelized FO model checking, tree-automata certification,
//! the exact oracles backing them, and the communication-complexity gadget
//! constructions used for lower-bound gap checks.

pub mod bits;
pub mod cert;
pub mod graph;
pub mod logic;
pub mod sexp;
pub mod treedepth;

pub use cert::{
    adversary_search, all_accept, check_completeness, make_view, measure_size, run_verification,
    run_verification_seq, Assignment, AttackBudget, AttackOutcome, CertError, Certificate,
    Decision, LocalView, Scheme,
};
pub use graph::{
    bfs_distances, bfs_tree, is_ancestor, make_clique, make_cycle, make_path, make_star,
    parse_graph, parse_tree, serialize_graph, serialize_tree, vid, Graph, GraphError, RootedTree,
    VertexId,
};
pub use treedepth::{
    coherent_model, coherentize, cops_robber_number, is_coherent, treedepth_exact, Model,
    OracleConfig, TreedepthError, TreedepthResult,
};
