//! Maximum-entropy-on-the-mean (MEM) estimation toolbox.

pub mod catalog;
pub mod cli;
pub mod config;
pub mod cramer;
pub mod error;
pub mod expfam;
pub mod kernels;
pub mod linops;
pub mod models;
pub mod oracle;
pub mod prior;
pub mod prox;
pub mod rootfind;
pub mod solvers;
pub mod textio;
mod special;

pub use error::{Error, Result};
pub use expfam::{Family, ReferenceDistribution, Region};
pub use kernels::KernelKind;
pub use prior::Prior;
pub use prox::{bregman_prox, ProxRequest, ProxResult};
