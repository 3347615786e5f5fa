use std::ops::{Mul, Neg};

use nalgebra::Matrix3;

/// Unit quaternion `w + x i + y j + z k` representing an SU(2) element.
///
/// The pure unit quaternions `i, j, k` play the role of the orthonormal
/// Lie-algebra basis, so that `exp(ψ n̂) = cos ψ + sin ψ (n̂·(i,j,k))`
/// has class angle `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Quat::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    /// Inverse of a unit quaternion.
    pub fn conj(self) -> Self {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Length of the vector part, equal to `sin ψ` for a unit quaternion.
    pub fn vec_norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Class angle `ψ ∈ [0, π]`.
    pub fn class_angle(&self) -> f64 {
        self.vec_norm().atan2(self.w)
    }

    pub fn exp(v: [f64; 3]) -> Self {
        let theta = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let s = if theta < 1e-8 {
            1.0 - theta * theta / 6.0
        } else {
            theta.sin() / theta
        };
        Quat::new(theta.cos(), s * v[0], s * v[1], s * v[2])
    }

    /// Rotation matrix of `v ↦ q v q⁻¹`.
    pub fn rotation(&self) -> Matrix3<f64> {
        let Quat { w, x, y, z } = *self;
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }
}

impl Mul for Quat {
    type Output = Quat;

    fn mul(self, r: Quat) -> Quat {
        Quat::new(
            self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        )
    }
}

impl Neg for Quat {
    type Output = Quat;

    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}
