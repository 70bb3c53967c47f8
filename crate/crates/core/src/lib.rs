//! Identification of partial-correlation graphs for multivariate stationary
//! Gaussian time series from a smoothed periodogram.

pub mod bench;
pub mod cohort;
pub mod error;
pub mod fit;
pub mod graph;
pub mod io;
pub mod kl;
pub mod linalg;
pub mod parallel;
pub mod pipeline;
pub mod quantile;
pub mod sample;
pub mod selection;
pub mod spectral;
pub mod var;

pub use error::{Error, ErrorKind, Result};
pub use graph::{Edge, Graph};
pub use pipeline::{run_selection, PipelineConfig};
pub use sample::SampleMatrix;
pub use selection::{MethodRegistry, SelectionMethod, SelectionResult};
pub use spectral::{SpectralField, WindowRegistry, WindowShape, WindowSpec};
pub use var::VarModel;
