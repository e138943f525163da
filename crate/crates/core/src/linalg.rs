//! 2x2 matrices and their exponential.
//!
//! `MatrixExp2` evaluates `exp(A t)` in closed form from the eigenstructure
//! of `A`. Writing `sigma = tr(A)/2` and `N = A - sigma I`, Cayley-Hamilton
//! gives `N^2 = disc * I` with `disc = sigma^2 - det(A)`, so
//!
//! ```text
//! exp(A t) = exp(sigma t) * (g0(t) I + g1(t) N)
//! ```
//!
//! where `(g0, g1)` is `(cosh, sinh/mu)`, `(cos, sin/omega)` or `(1, t)` for a
//! positive, negative or vanishing discriminant.

use std::ops::{Add, Mul, Sub};

/// Discriminants with magnitude below this are treated as a repeated root.
pub const REPEATED_ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2(pub [f64; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, k: f64) -> Mat2 {
        let m = self.0;
        Mat2([[k * m[0][0], k * m[0][1]], [k * m[1][0], k * m[1][1]]])
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let m = self.0;
        (m[0][0].abs() + m[1][0].abs()).max(m[0][1].abs() + m[1][1].abs())
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = self.0;
        Vec2([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Vec2([x, y])
    }

    pub fn component(&self, k: usize) -> f64 {
        self.0[k]
    }
}

/// Eigenstructure branch of a real 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenstructure {
    /// Eigenvalues `sigma +- mu` with `mu > 0`.
    RealDistinct { sigma: f64, mu: f64 },
    /// Eigenvalues `sigma +- i omega` with `omega > 0`.
    ComplexPair { sigma: f64, omega: f64 },
    /// Double eigenvalue `sigma`.
    Repeated { sigma: f64 },
}

impl Eigenstructure {
    pub fn of(a: &Mat2) -> Self {
        let sigma = 0.5 * a.trace();
        let disc = sigma * sigma - a.det();
        if disc > REPEATED_ROOT_TOL {
            Eigenstructure::RealDistinct {
                sigma,
                mu: disc.sqrt(),
            }
        } else if disc < -REPEATED_ROOT_TOL {
            Eigenstructure::ComplexPair {
                sigma,
                omega: (-disc).sqrt(),
            }
        } else {
            Eigenstructure::Repeated { sigma }
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            Eigenstructure::RealDistinct { sigma, .. }
            | Eigenstructure::ComplexPair { sigma, .. }
            | Eigenstructure::Repeated { sigma } => sigma,
        }
    }

    /// Largest real part of the eigenvalues.
    pub fn spectral_abscissa(&self) -> f64 {
        match *self {
            Eigenstructure::RealDistinct { sigma, mu } => sigma + mu,
            Eigenstructure::ComplexPair { sigma, .. } | Eigenstructure::Repeated { sigma } => sigma,
        }
    }
}

/// Closed-form `exp(A t)` for a fixed `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixExp2 {
    structure: Eigenstructure,
    /// `A - sigma I`
    nilpotent_part: Mat2,
}

impl MatrixExp2 {
    pub fn new(a: Mat2) -> Self {
        let structure = Eigenstructure::of(&a);
        let nilpotent_part = a - Mat2::IDENTITY.scale(structure.sigma());
        Self {
            structure,
            nilpotent_part,
        }
    }

    pub fn structure(&self) -> Eigenstructure {
        self.structure
    }

    /// `A - sigma I`, the matrix multiplying `g1` in the closed form.
    pub fn shifted(&self) -> Mat2 {
        self.nilpotent_part
    }

    /// Scalar weights `(c0, c1)` with `exp(A t) = c0 I + c1 (A - sigma I)`.
    pub fn weights(&self, t: f64) -> (f64, f64) {
        match self.structure {
            Eigenstructure::RealDistinct { sigma, mu } => {
                let x = mu * t;
                if x.abs() < 1.0 {
                    let e = (sigma * t).exp();
                    (e * x.cosh(), e * x.sinh() / mu)
                } else {
                    // split into the two modes to avoid inf * 0
                    let up = ((sigma + mu) * t).exp();
                    let down = ((sigma - mu) * t).exp();
                    (0.5 * (up + down), 0.5 * (up - down) / mu)
                }
            }
            Eigenstructure::ComplexPair { sigma, omega } => {
                let e = (sigma * t).exp();
                let (s, c) = (omega * t).sin_cos();
                (e * c, e * s / omega)
            }
            Eigenstructure::Repeated { sigma } => {
                let e = (sigma * t).exp();
                (e, e * t)
            }
        }
    }

    pub fn at(&self, t: f64) -> Mat2 {
        let (c0, c1) = self.weights(t);
        Mat2::IDENTITY.scale(c0) + self.nilpotent_part.scale(c1)
    }
}

/// `exp(A)` by scaling and squaring with a degree-16 Taylor polynomial.
///
/// Independent of the eigenstructure, so it also serves as a cross-check for
/// [`MatrixExp2`].
pub fn expm_scaling_squaring(a: Mat2) -> Mat2 {
    let norm = a.norm1();
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(0.5f64.powi(squarings));

    // Horner evaluation of sum_{k=0}^{16} X^k / k!
    let mut result = Mat2::IDENTITY;
    for k in (1..=16).rev() {
        result = Mat2::IDENTITY + (scaled * result).scale(1.0 / k as f64);
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}
