//! Scalar abstractions shared by every numeric routine in the crate.
//!
//! [`Real`] is the floating-point type a computation is carried out in
//! (`f32` or `f64`). [`Scalar`] is the matrix element type: either a
//! [`Real`] itself or a [`Complex`] over one. Kernels such as the SVD are
//! written once against [`Scalar`] so real data never pays for complex
//! arithmetic.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, One, ToPrimitive, Zero};

/// Real floating-point type: `f32` or `f64`.
pub trait Real:
    Scalar<Real = Self>
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for literals and tolerances.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Matrix element: a real number or a complex number over a [`Real`].
pub trait Scalar:
    Copy + NumAssign + Neg<Output = Self> + Zero + One + Debug + Send + Sync + PartialEq + 'static
{
    type Real: Real;

    /// `true` only for the complex implementation.
    const IS_COMPLEX: bool;

    fn conj(self) -> Self;
    /// Modulus `|z|`.
    fn modulus(self) -> Self::Real;
    /// `|z|^2`, without a square root.
    fn modulus_sq(self) -> Self::Real;
    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;
    fn from_real(r: Self::Real) -> Self;
    fn scale(self, r: Self::Real) -> Self;
    fn finite(self) -> bool;
    fn to_complex(self) -> Complex<Self::Real>;
}

macro_rules! real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            const IS_COMPLEX: bool = false;

            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn modulus(self) -> Self {
                self.abs()
            }
            #[inline]
            fn modulus_sq(self) -> Self {
                self * self
            }
            #[inline]
            fn re(self) -> Self {
                self
            }
            #[inline]
            fn im(self) -> Self {
                0.0
            }
            #[inline]
            fn from_real(r: Self) -> Self {
                r
            }
            #[inline]
            fn scale(self, r: Self) -> Self {
                self * r
            }
            #[inline]
            fn finite(self) -> bool {
                <$t>::is_finite(self)
            }
            #[inline]
            fn to_complex(self) -> Complex<$t> {
                Complex::new(self, 0.0)
            }
        }
    };
}

real_scalar!(f32);
real_scalar!(f64);

impl<T: Real> Scalar for Complex<T> {
    type Real = T;
    const IS_COMPLEX: bool = true;

    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn modulus_sq(self) -> T {
        self.norm_sqr()
    }
    #[inline]
    fn re(self) -> T {
        self.re
    }
    #[inline]
    fn im(self) -> T {
        self.im
    }
    #[inline]
    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    #[inline]
    fn scale(self, r: T) -> Self {
        Complex::new(self.re * r, self.im * r)
    }
    #[inline]
    fn finite(self) -> bool {
        Float::is_finite(self.re) && Float::is_finite(self.im)
    }
    #[inline]
    fn to_complex(self) -> Complex<T> {
        self
    }
}

/// Machine epsilon of the scalar's real type.
#[inline]
pub fn eps<E: Scalar>() -> E::Real {
    <E::Real as Float>::epsilon()
}

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}
