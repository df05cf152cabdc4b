use std::fmt::{Debug, Display};

use nalgebra::RealField;

use crate::linalg::Field;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar the reconstruction runs on: `f32` or `f64`.
///
/// Grid metadata (frequency step, channel rates) stays in `f64` hertz; only
/// spectrum values and the linear algebra use `Self`.
pub trait Scalar: RealField + Field + Copy + FromPrimitive + ToPrimitive + Debug + Display {
    /// Converts an `f64` constant. Panics only for values the type cannot
    /// represent at all, which never happens for `f32`/`f64`.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
