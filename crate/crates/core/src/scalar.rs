use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar the simulator runs on: `f32` or `f64`.
///
/// All engine math (states, signals, references) is written against this
/// trait; the crate-root aliases pin `f64`, which is what the verification
/// tolerances assume.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + std::fmt::Debug + std::fmt::Display + 'static
{
    /// Lossless-enough conversion for report serialization.
    fn to_f64(self) -> f64;
}

impl Real for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}
