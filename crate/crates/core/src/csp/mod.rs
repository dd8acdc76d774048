//! Weighted XOR instances, reductions to 2-XOR, and predicate CSP refutation.

mod fourier;
mod gen;
mod instance;
mod reduce;
mod refute;
mod weights;
mod xor;

pub use fourier::{fourier, FourierTable, Predicate};
pub use gen::{clause_count, gen_csp, gen_weighted_xor, ClauseCount, WeightDist, DENSE_GEN_CAP};
pub use instance::{decompose_instance, Clause, CspInstance, Decomposition, PartSummary};
pub use reduce::{flatten_even, lift_odd, reduce_to_2xor, to_graph, FlatGraph, Reduction, ReductionKind};
pub use refute::{
    refute_predicate, refute_xor, ParamRule, PartMethod, PartReport, PredicateRefutation, WeightSummary,
    XorRefutation, ELL_CAP, K_CAP,
};
pub use weights::{sample_w, weight_dist_stats, TailCheck, WeightStats};
pub use xor::{monomial, KeySpace, XorInstance, MAX_KEY_BITS};
