//! Parameter extraction from transmission data and derived figures of merit.

pub mod fits;
pub mod lsq;
pub mod merit;
pub mod peaks;
pub mod report;

pub use fits::{
    fit_lorentzian, fit_three_mode, fit_two_mode, ridge_from_map, LorentzianParams, RidgeOptions,
    RidgePoint, ThreeModeParams, TwoModeParams,
};
pub use merit::{
    cooperativity, coupling_from_filling, coupling_per_spin, coupling_ratio, photon_number,
    predict_optimized, spin_count, susceptibility, MeasuredSet, Optimization, Prediction,
};
pub use peaks::{find_peaks, Peak};
pub use report::{Estimate, FitReport};
