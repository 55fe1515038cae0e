//! Scalar types used to evaluate maps generically.
//!
//! Every map in the catalog is written once against [`Scalar`] and evaluated
//! either on plain `f64` or on [`Dual`] numbers, which carry one directional
//! derivative alongside the value. Complex arithmetic is done with [`Cx`],
//! a small complex type over any scalar, since conjugation is only
//! real-linear and has to act on the real and imaginary parts separately.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    fn from_f64(v: f64) -> Self;
    /// The real value, dropping any derivative part.
    fn value(self) -> f64;
    fn sqrt(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Forward-mode dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub const fn new(re: f64, eps: f64) -> Self {
        Dual { re, eps }
    }

    pub const fn constant(re: f64) -> Self {
        Dual { re, eps: 0.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, rhs: Dual) {
        self.re += rhs.re;
        self.eps += rhs.eps;
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        let inv = 1.0 / rhs.re;
        Dual::new(
            self.re * inv,
            (self.eps * rhs.re - self.re * rhs.eps) * inv * inv,
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl Scalar for Dual {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Dual::constant(v)
    }
    #[inline]
    fn value(self) -> f64 {
        self.re
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, 0.5 * self.eps / s)
    }
}

/// Complex number over a generic scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx<S> {
    pub re: S,
    pub im: S,
}

impl<S: Scalar> Cx<S> {
    #[inline]
    pub fn new(re: S, im: S) -> Self {
        Cx { re, im }
    }

    pub fn zero() -> Self {
        Cx::new(S::zero(), S::zero())
    }

    pub fn one() -> Self {
        Cx::new(S::one(), S::zero())
    }

    pub fn constant(re: f64, im: f64) -> Self {
        Cx::new(S::from_f64(re), S::from_f64(im))
    }

    #[inline]
    pub fn conj(self) -> Self {
        Cx::new(self.re, -self.im)
    }

    #[inline]
    pub fn norm_sqr(self) -> S {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn scale(self, s: S) -> Self {
        Cx::new(self.re * s, self.im * s)
    }

    /// Integer power; negative exponents use the conjugate, which is the
    /// inverse on the unit circle only.
    pub fn unit_powi(self, k: i32) -> Self {
        let base = if k < 0 { self.conj() } else { self };
        let mut acc = Cx::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc * base;
        }
        acc
    }

    pub fn values(self) -> (f64, f64) {
        (self.re.value(), self.im.value())
    }
}

impl<S: Scalar> Add for Cx<S> {
    type Output = Cx<S>;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Cx::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<S: Scalar> AddAssign for Cx<S> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl<S: Scalar> Sub for Cx<S> {
    type Output = Cx<S>;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Cx::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<S: Scalar> Mul for Cx<S> {
    type Output = Cx<S>;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Cx::new(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
        )
    }
}

impl<S: Scalar> Neg for Cx<S> {
    type Output = Cx<S>;
    #[inline]
    fn neg(self) -> Self {
        Cx::new(-self.re, -self.im)
    }
}

/// 3×3 complex matrix, row-major.
pub type CMat3<S> = [[Cx<S>; 3]; 3];

pub fn mat3_mul<S: Scalar>(x: &CMat3<S>, y: &CMat3<S>) -> CMat3<S> {
    let mut out = [[Cx::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let mut acc = Cx::zero();
            for k in 0..3 {
                acc += x[i][k] * y[k][j];
            }
            *entry = acc;
        }
    }
    out
}

pub fn mat3_adjoint<S: Scalar>(x: &CMat3<S>) -> CMat3<S> {
    let mut out = [[Cx::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = x[j][i].conj();
        }
    }
    out
}

pub fn mat3_identity<S: Scalar>() -> CMat3<S> {
    let mut out = [[Cx::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Cx::one();
    }
    out
}

/// `x^k`, with `x^{-k} = (x†)^k` (valid on unitary matrices).
pub fn mat3_powi<S: Scalar>(x: &CMat3<S>, k: i32) -> CMat3<S> {
    let base = if k < 0 { mat3_adjoint(x) } else { *x };
    let mut acc = mat3_identity();
    for _ in 0..k.unsigned_abs() {
        acc = mat3_mul(&acc, &base);
    }
    acc
}

/// Reads complex coordinates stored as interleaved `(re, im)` pairs.
pub fn read_cx<S: Scalar>(x: &[S]) -> Vec<Cx<S>> {
    x.chunks_exact(2).map(|c| Cx::new(c[0], c[1])).collect()
}

pub fn write_cx<S: Scalar>(z: &[Cx<S>], out: &mut Vec<S>) {
    for c in z {
        out.push(c.re);
        out.push(c.im);
    }
}

pub fn read_mat3<S: Scalar>(x: &[S]) -> CMat3<S> {
    let mut out = [[Cx::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            let k = 2 * (3 * i + j);
            *entry = Cx::new(x[k], x[k + 1]);
        }
    }
    out
}

pub fn write_mat3<S: Scalar>(m: &CMat3<S>, out: &mut Vec<S>) {
    for row in m {
        write_cx(row, out);
    }
}

/// Lifts an `f64` matrix to constants of another scalar type.
pub fn lift_mat3<S: Scalar>(m: &CMat3<f64>) -> CMat3<S> {
    let mut out = [[Cx::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = Cx::constant(m[i][j].re, m[i][j].im);
        }
    }
    out
}
