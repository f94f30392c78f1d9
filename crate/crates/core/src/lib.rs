//! hashlearn: learn compact binary codes from labeled feature vectors and
//! retrieve with packed-bit Hamming ranking.
//!
//! The pipeline is: load or synthesize a labeled feature [`data::Dataset`],
//! split it into query / retrieval / training sets, train a small tanh hash
//! head ([`trainer::train`]) under a two-part objective (a class-center
//! softmax term plus a pairwise similarity likelihood term), binarize
//! embeddings into packed codes ([`codes`]), and evaluate Hamming-ranked
//! retrieval with AP/MAP ([`eval`]).

pub mod cli;
pub mod codes;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod loss;
pub mod model;
pub mod trainer;

pub use error::{Error, Result};
