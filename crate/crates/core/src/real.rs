use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the engine and observables are generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Uniform draw from `[0, 1)`.
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from `f64`; used for literals.
    fn lit(v: f64) -> Self;

    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.gen::<$t>()
            }

            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
