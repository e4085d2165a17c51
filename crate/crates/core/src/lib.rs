//! Feature-subset selection for nearest-neighbour classifiers by genetic search.
//!
//! The pipeline: masked Euclidean k-NN ([`knn`]) scores feature subsets,
//! a generational GA ([`ga`]) maximises `alpha * hits - beta * nf` over
//! binary masks, and two-component PCA ([`pca`]) plus SVG scatterplots
//! ([`plot`]) visualise the result. [`synth`] builds planted-feature
//! datasets with a known optimum.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod ga;
pub mod knn;
pub mod pca;
pub mod plot;
pub mod report;
pub mod synth;

pub use dataset::{Dataset, LabelColumn};
pub use error::{Error, Result};
pub use ga::{Chromosome, Evolution, GaConfig, GenerationStats, Individual};
pub use knn::{FeatureMask, Neighbor, Recognition};
pub use pca::ProjectionModel;
pub use synth::SynthSpec;
