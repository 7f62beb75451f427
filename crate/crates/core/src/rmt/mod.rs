//! Haar-random eigenbases and the random-matrix predictions for Q.

mod haar;
mod moments;
mod weingarten;

pub use haar::{haar_unitary, haar_unitary_with, haar_vector_with, trial_rng};
pub use moments::{
    first_moment_check, four_point_check, plateau_from_mean, two_point_check, verify_moments, FourPointReport,
    MomentReport, PatternResult, RmtPrediction,
};
pub use weingarten::{weingarten, CycleType};
