//! Nonparametric estimation of a cumulative distribution function from
//! left-censored data, such as concentrations reported below one or more
//! limits of detection.
//!
//! ```
//! use lodcdf_core::{Dataset, estimate};
//!
//! let data = Dataset::from_reader("1,0\n1,1\n2,1\n3,0\n3,1\n4,1\n".as_bytes()).unwrap();
//! let table = data.tally();
//! let pl = estimate::product_limit_with_variance(&table).unwrap();
//! let rhr = estimate::rhr_mle_with_variance(&table).unwrap();
//! assert!(rhr.estimate_at(1.0) <= pl.estimate_at(1.0));
//! ```

pub mod baselines;
pub mod data;
pub mod error;
pub mod estimate;
pub mod export;
pub mod rng;
pub mod simulation;

pub use data::{Dataset, ExactTallyTable, Observation, TallyTable};
pub use error::{DataError, Error, EstimateError, Result, SimError};
pub use estimate::{LeftoverPolicy, Method, StepCdf, VarianceEstimate};
