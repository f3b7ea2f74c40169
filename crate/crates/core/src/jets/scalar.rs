use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::jet::Jet;

/// Numeric type that chart functions are evaluated over: plain `f64` for
/// finite differences, [`Jet`] for exact Taylor propagation.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn recip(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn recip(&self) -> Self {
        f64::recip(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

impl Scalar for Jet {
    fn from_f64(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Self {
        Jet::ln(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn powi(&self, n: i32) -> Self {
        Jet::powi(self, n)
    }
}

/// A smooth scalar function on a chart, evaluable over any [`Scalar`].
pub trait ScalarField: Sync {
    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

/// A smooth vector-valued chart function; used to differentiate several
/// components (for example all metric entries) from shared evaluations.
pub trait ChartMap: Sync {
    fn outputs(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

/// Adapts a [`ScalarField`] to a one-output [`ChartMap`].
pub(crate) struct SingleOutput<'a, F: ?Sized>(pub &'a F);

impl<F: ScalarField + ?Sized> ChartMap for SingleOutput<'_, F> {
    fn outputs(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        vec![self.0.eval(x)]
    }
}
