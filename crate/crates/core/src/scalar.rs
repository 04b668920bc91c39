//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn n(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Minimal ring interface used to evaluate polynomial expressions with
/// scalars, dual numbers and truncated power series alike.
pub trait Ring<T: Real>:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(v: T) -> Self;

    fn scale(&self, k: T) -> Self {
        self.clone() * Self::constant(k)
    }
}

impl<T: Real> Ring<T> for T {
    #[inline]
    fn constant(v: T) -> Self {
        v
    }
}

/// Forward-mode dual number `re + eps·ε`, `ε² = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    pub fn var(re: T) -> Self {
        Self { re, eps: T::one() }
    }

    pub fn cst(re: T) -> Self {
        Self { re, eps: T::zero() }
    }

    pub fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        Self::new(r, self.eps / (r + r))
    }

    pub fn recip(self) -> Self {
        Self::new(self.re.recip(), -self.eps / (self.re * self.re))
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Real> Ring<T> for Dual<T> {
    fn constant(v: T) -> Self {
        Self::cst(v)
    }
}

/// Partial derivatives of `f` at `point`, one forward pass per coordinate.
pub fn gradient<T: Real, const N: usize>(
    point: [T; N],
    f: impl Fn(&[Dual<T>; N]) -> Dual<T>,
) -> (T, [T; N]) {
    let mut grad = [T::zero(); N];
    let mut value = T::zero();
    for (k, g) in grad.iter_mut().enumerate() {
        let args: [Dual<T>; N] =
            std::array::from_fn(|j| Dual::new(point[j], if j == k { T::one() } else { T::zero() }));
        let out = f(&args);
        value = out.re;
        *g = out.eps;
    }
    (value, grad)
}
