//! Dense 2x2 real matrices: coefficient matrices, evolution operators, and
//! monodromies, with closed-form spectral quantities.

use std::ops::{Add, Mul, Neg, Sub};

/// A dense 2x2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Matrix2 {
    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn zeros() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn diagonal(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn determinant(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    /// Inverse; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Matrix2> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Matrix2::new(
            self.m22 / det,
            -self.m12 / det,
            -self.m21 / det,
            self.m11 / det,
        ))
    }

    /// Discriminant of the characteristic polynomial, written as
    /// `(m11 - m22)^2 + 4 m12 m21` so that near-equal diagonal entries do
    /// not cancel against the determinant.
    fn discriminant(&self) -> f64 {
        let d = self.m11 - self.m22;
        d * d + 4.0 * self.m12 * self.m21
    }

    /// Moduli of the two eigenvalues, largest first.
    ///
    /// Real pairs come from the quadratic formula with the smaller root
    /// recovered as `det / lambda1` to avoid cancellation; a negative
    /// discriminant means a complex-conjugate pair of modulus `sqrt(det)`.
    pub fn eigenvalue_moduli(&self) -> [f64; 2] {
        let disc = self.discriminant();
        if disc < 0.0 {
            let m = self.determinant().sqrt();
            return [m, m];
        }
        let tr = self.trace();
        let root = disc.sqrt();
        let l1 = 0.5 * (tr + tr.signum() * root);
        if l1 == 0.0 {
            // tr == 0 and disc == 0: both eigenvalues vanish.
            return [0.0, 0.0];
        }
        let l2 = self.determinant() / l1;
        let (a, b) = (l1.abs(), l2.abs());
        if a >= b {
            [a, b]
        } else {
            [b, a]
        }
    }

    /// Spectral radius: the largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalue_moduli()[0]
    }

    /// Dominant real eigenvalue and an (unnormalized) eigenvector, when the
    /// eigenvalues are real. `None` for complex pairs.
    pub fn dominant_real_eigenpair(&self) -> Option<(f64, [f64; 2])> {
        let disc = self.discriminant();
        if disc < 0.0 {
            return None;
        }
        let tr = self.trace();
        let root = disc.sqrt();
        let big = 0.5 * (tr + tr.signum() * root);
        let small = if big == 0.0 {
            0.0
        } else {
            self.determinant() / big
        };
        let lambda = if big.abs() >= small.abs() { big } else { small };
        // Pick the better-conditioned row of (M - lambda I).
        let v_a = [self.m12, lambda - self.m11];
        let v_b = [lambda - self.m22, self.m21];
        let n_a = v_a[0].abs() + v_a[1].abs();
        let n_b = v_b[0].abs() + v_b[1].abs();
        let v = if n_a >= n_b { v_a } else { v_b };
        if v[0] == 0.0 && v[1] == 0.0 {
            // Scalar multiple of the identity.
            return Some((lambda, [1.0, 0.0]));
        }
        Some((lambda, v))
    }

    pub fn scale(&self, s: f64) -> Matrix2 {
        Matrix2::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 + o.m11,
            self.m12 + o.m12,
            self.m21 + o.m21,
            self.m22 + o.m22,
        )
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 - o.m11,
            self.m12 - o.m12,
            self.m21 - o.m21,
            self.m22 - o.m22,
        )
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale(-1.0)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, o: Matrix2) -> Matrix2 {
        Matrix2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Mul<f64> for Matrix2 {
    type Output = Matrix2;
    fn mul(self, s: f64) -> Matrix2 {
        self.scale(s)
    }
}
