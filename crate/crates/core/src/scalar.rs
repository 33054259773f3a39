//! Scalar abstraction for the numerical core.
//!
//! Everything downstream is generic over [`Scalar`], which is `nalgebra`'s
//! `RealField` plus literal conversion and standard-normal sampling. `f32`
//! and `f64` are the two instantiations; the crate root exposes `f64`
//! aliases for the common case.

use nalgebra::RealField;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real scalar usable by all estimators, metrics and operators.
pub trait Scalar: RealField + Copy {
    /// Convert an `f64` literal or parameter into this scalar type.
    fn of(x: f64) -> Self;

    /// Widen to `f64` (exact for `f32`, identity for `f64`).
    fn to_f64(self) -> f64;

    /// Draw one standard-normal variate. Backed by `rand_distr`'s
    /// ziggurat sampler, so streams are reproducible for a fixed seed
    /// within a release.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Positive infinity (used for "no budget" settings such as tau).
    fn inf() -> Self {
        Self::of(f64::INFINITY)
    }
}

impl Scalar for f64 {
    fn of(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }

    fn to_f64(self) -> f64 {
        f64::from(self)
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}
