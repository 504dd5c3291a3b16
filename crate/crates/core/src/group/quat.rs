//! Unit quaternions as SU(2) elements.
//!
//! A quaternion `w + x·i + y·j + z·k` with `w² + x² + y² + z² = 1`. The
//! vector part `(x, y, z)` is the rotation axis scaled by `sin(θ/2)`.

use std::ops::{Mul, Neg};

use rand::Rng;
use rand_distr::StandardNormal;

use super::TAU_NORM;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const ONE: Quat = Quat::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quat = Quat::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quat = Quat::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quat = Quat::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Quat::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(self, other: Quat) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn vector(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn vector_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Rescales onto the unit sphere when the norm has drifted past `TAU_NORM`.
    pub fn renormalized(self) -> Self {
        let n = self.norm();
        if (n - 1.0).abs() <= TAU_NORM || n == 0.0 {
            return self;
        }
        Quat::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conj(self) -> Self {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Rotation by `angle` (the SU(2) half-angle convention: `cos(angle) + sin(angle)·n`).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (s, c) = angle.sin_cos();
        Quat::new(c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n)
    }

    /// Exponential of the pure quaternion `v`: `cos|v| + sin|v|·v/|v|`.
    pub fn exp(v: [f64; 3]) -> Self {
        let t = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if t < 1e-300 {
            return Quat::ONE;
        }
        let s = t.sin() / t;
        Quat::new(t.cos(), s * v[0], s * v[1], s * v[2]).renormalized()
    }

    /// Rotates the 3-vector `v` by `q̄·v·q`, i.e. the conjugation `h⁻¹ v h`.
    pub fn conjugate_vector(self, v: [f64; 3]) -> [f64; 3] {
        let p = Quat::new(0.0, v[0], v[1], v[2]);
        let r = self.conj() * p * self;
        [r.x, r.y, r.z]
    }

    /// Geodesic distance on S³, computed from the chord for accuracy near zero.
    pub fn geodesic(self, other: Quat) -> f64 {
        let d = Quat::new(
            self.w - other.w,
            self.x - other.x,
            self.y - other.y,
            self.z - other.z,
        )
        .norm();
        2.0 * (0.5 * d).min(1.0).asin()
    }

    /// Haar-uniform draw: a normalized four-dimensional standard Gaussian.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Quat::new(
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            let n = q.norm();
            if n > 1e-12 {
                return Quat::new(q.w / n, q.x / n, q.y / n, q.z / n);
            }
        }
    }
}

impl Neg for Quat {
    type Output = Quat;

    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quat {
    type Output = Quat;

    fn mul(self, b: Quat) -> Quat {
        let a = self;
        Quat::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
        .renormalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamilton_relations() {
        assert_eq!(Quat::I * Quat::J, Quat::K);
        assert_eq!(Quat::J * Quat::K, Quat::I);
        assert_eq!(Quat::K * Quat::I, Quat::J);
        assert_eq!(Quat::I * Quat::I, -Quat::ONE);
    }

    #[test]
    fn geodesic_matches_arccos() {
        let a = Quat::from_axis_angle([1.0, 2.0, 0.5], 0.7);
        let b = Quat::from_axis_angle([0.0, 1.0, -1.0], 1.9);
        assert!((a.geodesic(b) - a.dot(b).acos()).abs() < 1e-12);
        assert!((Quat::ONE.geodesic(-Quat::ONE) - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_about_z_sends_x_to_y_axis() {
        let h = Quat::from_axis_angle([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_4);
        let v = h.conjugate_vector([1.0, 0.0, 0.0]);
        assert!(v[0].abs() < 1e-12 && (v[1].abs() - 1.0).abs() < 1e-12 && v[2].abs() < 1e-12);
    }
}
