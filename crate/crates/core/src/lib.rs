//! Phase-integral approximations to ψ″ + R(z)ψ = 0 built on the platform
//! function P_s.
//!
//! The numerical types are generic over [`num::Real`] (`f32` or `f64`);
//! the aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use pim_core::{BaseFunction, BaseSpec, ParamSet, Potential};
//!
//! let airy = Potential::builtin("airy", &ParamSet::new()).unwrap();
//! let base = BaseFunction::new(airy, BaseSpec::unmodified()).unwrap();
//! // Y₂ = 5/(32z³) for R = z
//! let y2 = pim_core::platform::y2(&base, 2.0).unwrap();
//! assert!((y2 - 5.0 / 256.0).abs() < 1e-15);
//! ```

// `!(a < b)` is used deliberately so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod error;
pub mod expr;
pub mod num;
pub mod oracle;
pub mod pim;
pub mod platform;
pub mod potential;
pub mod quad;
pub mod quantize;
pub mod verify;

pub use base::Preset;
pub use error::{Error, Result};
pub use expr::{parse, ExprError, ExprNode, ParamSet};
pub use num::{Real, TURNING_POINT_GUARD};
pub use pim::{Branch, ExpansionOrder};
pub use potential::Family;

pub type Interval = num::Interval<f64>;
pub type Potential = potential::Potential<f64>;
pub type BaseSpec = base::BaseSpec<f64>;
pub type BaseFunction = base::BaseFunction<f64>;
pub type LocalBase = base::LocalBase<f64>;
pub type PlatformEval = platform::PlatformEval<f64>;
pub type PlatformOps = platform::PlatformOps<f64>;
pub type PhaseApprox = pim::PhaseApprox<f64>;
pub type QuadResult = quad::QuadResult<f64>;
pub type QuadOptions = quad::QuadOptions<f64>;
pub type OracleSolution = oracle::OracleSolution<f64>;
pub type OrderComparison = oracle::OrderComparison<f64>;
pub type BoundStateProblem = quantize::BoundStateProblem<f64>;
