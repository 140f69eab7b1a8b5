//! Bratteli graphs: multiplicities, path counts, central chains, Eulerian
//! numbers, edge-label processes, closed-form intrinsic metrics and line
//! embeddings.

mod central;
mod embed;
mod eulerian;
mod graph;
mod labels;
mod multipascal;

pub use central::{
    bernoulli_pascal_chain, central_kernel, check_theta, multinomial_multipascal_chain, symmetric_euler_chain,
    symmetric_euler_forward_kernel, symmetric_euler_marginals, uniform_path_chain, CentralChain, CentralRule,
    MeasureTag,
};
pub use embed::{closed_form_intrinsic, embedding_coordinates, embedding_layers, embedding_svg};
pub use eulerian::{euler_conditional, eulerian, generalized_eulerian_a01};
pub use graph::{
    compositions, euler_graph, multipascal_graph, next_jump_graph, odometer_graph, pascal_graph, path_counts, paths_to,
    BratteliGraph, GraphTag, PathCount,
};
pub use labels::{label_process, LabelProcess, LabelledEdge, LevelLabels};
pub use multipascal::wellordered_coupling_multipascal;
