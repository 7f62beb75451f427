use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::Debug;
use std::iter::Sum;

/// Floating-point scalar used by the lattice machinery (`f32` or `f64`).
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Sum + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn two_pi() -> Self {
        Self::lit(std::f64::consts::TAU)
    }

    /// Nearest integer, ties away from zero.
    fn round_to_i64(self) -> i64 {
        self.round().to_i64().expect("rounded value fits in i64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}
