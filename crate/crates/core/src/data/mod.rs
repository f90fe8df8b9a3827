//! Longitudinal data representation, standardization and file I/O.

mod dataset;
mod io;
mod standardize;

pub use dataset::{Individual, LongitudinalDataset, Meta};
pub use io::{load_csv, load_meta, meta_path, read_csv, save_csv, save_meta, write_csv};
pub use standardize::{StandardizeScheme, Standardizer};
