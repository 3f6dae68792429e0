//! Functional index coding over prime fields.
//!
//! A broadcast source holds `K` messages of `n` symbols each over `F_q`;
//! every receiver knows some functions of the messages (its Has-set) and
//! demands others (its Want-set). Codes are found by coloring the
//! confusion graph on the `q^{nK}` message vectors.
//!
//! ```
//! use ficoder::{build_graph, dsatur, synthesize, verify_fic, FicpInstance};
//!
//! let inst = FicpInstance::from_json(
//!     r#"{"q":2,"n":1,"K":2,"receivers":[
//!         {"has":["x1"],"wants":["x2"]},
//!         {"has":["x2"],"wants":["x1"]}]}"#,
//! ).unwrap();
//! let g = build_graph(&inst, 1 << 10).unwrap();
//! let fic = synthesize(&inst, &g, &dsatur(g.graph()), None).unwrap();
//! assert_eq!(fic.len(), 1);
//! assert!(verify_fic(&inst, &fic).unwrap().passed);
//! ```

pub mod codec;
pub mod coloring;
pub mod confusion;
pub mod ecc;
pub mod error;
pub mod field;
pub mod graph;
pub mod model;

pub use codec::{
    build_decoders, check_linear_map, coset_basis, is_perfect, partitioned_synthesize, synthesize,
    synthesize_default, verify_fic, verify_map, EncodingMap, Fic, MapLinearity, VerifyReport,
};
pub use coloring::{
    clique_of_size, code_size_bounds, dsatur, exact_chromatic, independent_transversal, max_clique,
    max_independent_set, mu_bound, vt_fractional, BoundsReport, Coloring,
};
pub use confusion::{
    build_graph, build_receiver_graph, cayley_from_connection_set, cayley_graph, confusable,
    connection_set_linear, graph_sum, or_power, ConfusionGraph, ConnectionSet,
    DEFAULT_VERTEX_BUDGET,
};
pub use ecc::{
    builtin_code, concatenate, search_codebook, simulate_errors, singleton_bound, verify_delta,
    verify_delta_linear, DeltaFic, LinearBlockCode, SimMode,
};
pub use error::{Error, Result};
pub use field::{Matrix, PrimeField, Symbol, Word};
pub use graph::Graph;
pub use model::{FicpInstance, FuncDef, Receiver};
