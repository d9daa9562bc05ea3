//! Prefix-reversal triples `{r_n, r_m, r_k}`: deciding whether they generate
//! the symmetric group, and measuring the cubic Cayley graphs they define.

pub mod cayley;
pub mod classifier;
pub mod experiments;
pub mod grouptest;
pub mod perm;

pub use cayley::{CubicPancakeGraph, CycleClass, GraphMetrics, HamiltonicityResult};
pub use classifier::{classify, Certificate, Rule, Triple, Verdict, Witness};
pub use grouptest::{generates_sym, group_order, GeneratorSet};
pub use perm::{Parity, Permutation, ReversalWord};
