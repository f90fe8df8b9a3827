//! ΔMSE Granger test over repeated cross-validation.

mod detect;
mod split;
mod ttest;

pub use detect::{compute_delta_mse, detect_edges, DeltaMseTable, Detection, GcConfig};
pub use split::{make_split_plan, Split, SplitPlan, FOLDS};
pub use ttest::{one_sample_t_test, Alternative, TTest};
