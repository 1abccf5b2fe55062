//! Forward-mode dual numbers.
//!
//! Lagrangians are written once against the [`Scalar`] trait and evaluated
//! either on plain `f64` or on [`Dual`] to obtain exact partial derivatives.
//! Gradients take one directional pass per coordinate, which is all the
//! dimensionality here calls for.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::lagrangian::{Lagrangian, State};

/// Arithmetic needed to evaluate a Lagrangian.
///
/// Implemented by `f64` and [`Dual`]. Mixed operations with `f64` constants
/// are part of the bound so expressions like `q * 0.5` work for both.
pub trait Scalar:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
{
    fn cst(value: f64) -> Self;
    fn value(self) -> f64;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
    fn sech(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, exponent: f64) -> Self;

    /// Integer power by repeated multiplication, exact in sign for negative bases.
    fn powi(self, exponent: i32) -> Self {
        let mut base = self;
        let mut e = exponent.unsigned_abs();
        let mut acc = Self::cst(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if exponent < 0 {
            Self::cst(1.0) / acc
        } else {
            acc
        }
    }

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        a.iter()
            .zip(b)
            .fold(Self::zero(), |acc, (&x, &y)| acc + x * y)
    }

    fn norm_sq(a: &[Self]) -> Self {
        Self::dot(a, a)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(value: f64) -> Self {
        value
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn sech(self) -> Self {
        1.0 / f64::cosh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, exponent: f64) -> Self {
        f64::powf(self, exponent)
    }
}

/// A value together with its derivative along one direction.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub const fn new(value: f64, deriv: f64) -> Self {
        Self { value, deriv }
    }

    pub const fn constant(value: f64) -> Self {
        Self { value, deriv: 0.0 }
    }

    pub const fn variable(value: f64) -> Self {
        Self { value, deriv: 1.0 }
    }

    #[inline]
    fn chain(self, value: f64, slope: f64) -> Self {
        Self {
            value,
            deriv: slope * self.deriv,
        }
    }
}

impl fmt::Display for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}ε", self.value, self.deriv)
    }
}

impl Add for Dual {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl Sub for Dual {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl Mul for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.value * rhs.deriv + self.deriv * rhs.value,
        )
    }
}

impl Div for Dual {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.value;
        Self::new(
            self.value * inv,
            (self.deriv * rhs.value - self.value * rhs.deriv) * inv * inv,
        )
    }
}

impl Neg for Dual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.value, -self.deriv)
    }
}

impl Add<f64> for Dual {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        Self::new(self.value + rhs, self.deriv)
    }
}

impl Sub<f64> for Dual {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: f64) -> Self {
        Self::new(self.value - rhs, self.deriv)
    }
}

impl Mul<f64> for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.value * rhs, self.deriv * rhs)
    }
}

impl Div<f64> for Dual {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        Self::new(self.value / rhs, self.deriv / rhs)
    }
}

impl AddAssign for Dual {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dual {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Scalar for Dual {
    #[inline]
    fn cst(value: f64) -> Self {
        Dual::constant(value)
    }
    #[inline]
    fn value(self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn tanh(self) -> Self {
        let th = self.value.tanh();
        self.chain(th, 1.0 - th * th)
    }
    fn sech(self) -> Self {
        let s = 1.0 / self.value.cosh();
        self.chain(s, -s * self.value.tanh())
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r)
    }
    fn powf(self, exponent: f64) -> Self {
        let p = self.value.powf(exponent);
        self.chain(p, exponent * self.value.powf(exponent - 1.0))
    }
}

/// Which argument block of `L(t, q, qdot)` to differentiate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Block {
    Position,
    Velocity,
}

fn gradient_block<L: Lagrangian + ?Sized>(
    system: &L,
    t: f64,
    q: &[f64],
    qdot: &[f64],
    block: Block,
) -> Result<Vec<f64>> {
    let n = system.dim();
    if q.len() != n || qdot.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: q.len().max(qdot.len()),
        });
    }
    let mut qd: Vec<Dual> = q.iter().map(|&x| Dual::constant(x)).collect();
    let mut vd: Vec<Dual> = qdot.iter().map(|&x| Dual::constant(x)).collect();
    let td = Dual::constant(t);
    let mut grad = Vec::with_capacity(n);
    for i in 0..n {
        let slot = match block {
            Block::Position => &mut qd[i],
            Block::Velocity => &mut vd[i],
        };
        slot.deriv = 1.0;
        let l = system.lagrangian(td, &qd, &vd);
        if !l.value.is_finite() || !l.deriv.is_finite() {
            return Err(Error::Evaluation {
                what: "Lagrangian gradient",
                state: State::new(t, q.to_vec(), qdot.to_vec()),
            });
        }
        grad.push(l.deriv);
        match block {
            Block::Position => qd[i].deriv = 0.0,
            Block::Velocity => vd[i].deriv = 0.0,
        }
    }
    Ok(grad)
}

/// `∂L/∂q` at `(t, q, qdot)`.
pub fn grad_q<L: Lagrangian + ?Sized>(
    system: &L,
    t: f64,
    q: &[f64],
    qdot: &[f64],
) -> Result<Vec<f64>> {
    gradient_block(system, t, q, qdot, Block::Position)
}

/// `∂L/∂qdot` at `(t, q, qdot)`.
pub fn grad_qdot<L: Lagrangian + ?Sized>(
    system: &L,
    t: f64,
    q: &[f64],
    qdot: &[f64],
) -> Result<Vec<f64>> {
    gradient_block(system, t, q, qdot, Block::Velocity)
}

/// Derivative of a scalar function of one variable.
pub fn derivative(f: impl Fn(Dual) -> Dual, x: f64) -> f64 {
    f(Dual::variable(x)).deriv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{LaneEmden, MaxwellBloch};

    #[test]
    fn product_and_quotient_rules() {
        let a = Dual::new(3.0, 2.0);
        let b = Dual::new(-1.5, 0.5);
        assert_eq!((a * b).deriv, 3.0 * 0.5 + 2.0 * -1.5);
        let q = a / b;
        assert!((q.deriv - (2.0 * -1.5 - 3.0 * 0.5) / 2.25).abs() < 1e-15);
    }

    type Case = (
        &'static str,
        Box<dyn Fn(Dual) -> Dual>,
        Box<dyn Fn(f64) -> f64>,
    );

    #[test]
    fn elementary_functions_match_finite_differences() {
        let fns: Vec<Case> = vec![
            ("exp", Box::new(|x: Dual| x.exp()), Box::new(f64::exp)),
            ("ln", Box::new(|x: Dual| x.ln()), Box::new(f64::ln)),
            ("sin", Box::new(|x: Dual| x.sin()), Box::new(f64::sin)),
            ("cos", Box::new(|x: Dual| x.cos()), Box::new(f64::cos)),
            ("tanh", Box::new(|x: Dual| x.tanh()), Box::new(f64::tanh)),
            (
                "sech",
                Box::new(|x: Dual| x.sech()),
                Box::new(|x: f64| 1.0 / x.cosh()),
            ),
            ("sqrt", Box::new(|x: Dual| x.sqrt()), Box::new(f64::sqrt)),
            (
                "powf",
                Box::new(|x: Dual| x.powf(2.5)),
                Box::new(|x: f64| x.powf(2.5)),
            ),
            (
                "powi",
                Box::new(|x: Dual| x.powi(-3)),
                Box::new(|x: f64| x.powi(-3)),
            ),
        ];
        for x in [0.3, 0.9, 1.7] {
            for (name, fd, ff) in &fns {
                let h = 1e-6;
                let fd_est = (ff(x + h) - ff(x - h)) / (2.0 * h);
                let ad = fd(Dual::variable(x)).deriv;
                assert!(
                    (ad - fd_est).abs() < 1e-7 * (1.0 + ad.abs()),
                    "{name} at {x}: {ad} vs {fd_est}"
                );
            }
        }
    }

    #[test]
    fn integer_power_handles_negative_base() {
        let x = Dual::variable(-1.5);
        let p = x.powi(4);
        assert_eq!(p.value, 5.0625);
        assert_eq!(p.deriv, 4.0 * (-1.5f64).powi(3));
        let c = x.powi(3);
        assert_eq!(c.value, -3.375);
        assert_eq!(c.deriv, 3.0 * 2.25);
        assert_eq!(Dual::variable(2.0).powi(0), Dual::constant(1.0));
    }

    #[test]
    fn quadratic_velocity_gradient() {
        // L = qdot^2 / 2 is the Lane-Emden Lagrangian at t = 1 with q = 0
        let le = LaneEmden::new(3).unwrap();
        let g = grad_qdot(&le, 1.0, &[0.0], &[3.0]).unwrap();
        assert_eq!(g, vec![3.0]);
    }

    #[test]
    fn maxwell_bloch_position_gradient() {
        let g = grad_q(&MaxwellBloch, 0.0, &[1.0, 3.0, 0.0], &[3.0, -1.0, -1.0]).unwrap();
        assert_eq!(g, vec![-1.0, -3.0, 0.0]);
    }

    #[test]
    fn lane_emden_position_gradient() {
        let le = LaneEmden::new(3).unwrap();
        let g = grad_q(&le, 2.0, &[1.0], &[0.0]).unwrap();
        assert_eq!(g, vec![-4.0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = grad_q(&MaxwellBloch, 0.0, &[1.0], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 3, .. }));
    }
}
