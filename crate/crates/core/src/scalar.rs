//! Scalar abstraction shared by the numeric kernels.
//!
//! Closed-form formulas that only need field arithmetic (semantic rate, the
//! traditional QoE' rate) are generic over [`num_traits::Num`], so they can be
//! evaluated exactly with a rational type. Everything that needs `exp`/`log`
//! is generic over [`Real`], implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by the channel formulas, the metric layer and
/// the neural-network substrate.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this type (rounding for `f32`).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constants are representable")
    }

    /// Widens to `f64`.
    fn widen(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Floating-point precision selector used in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}
