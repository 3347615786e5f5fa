//! Structure groups SU(2) and U(1).
//!
//! Metric normalization: the Lie-algebra basis is orthonormal and the
//! Riemannian distance of `g` to the identity is its class angle, so that
//! `|log g| = distance(g)`. The Casimir is `C(j) = j(j+1)` for SU(2) and
//! `C(n) = n²` for U(1). Haar measure has total mass one.

mod heat;
mod quat;

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use heat::{heat_kernel, HeatKernel, HeatMethod, SERIES_CUTOFF};
pub use quat::Quat;

/// Width of the excluded band around the cut locus for `log`.
pub const LOG_CUT_EPS: f64 = 1e-8;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Su2,
    U1,
}

impl Group {
    pub fn dim(self) -> usize {
        match self {
            Group::Su2 => 3,
            Group::U1 => 1,
        }
    }

    /// Dimension of the center. A connection is reducible when its isotropy
    /// algebra is larger than this.
    pub fn center_dim(self) -> usize {
        match self {
            Group::Su2 => 0,
            Group::U1 => 1,
        }
    }

    /// Riemannian volume of the group in the class-angle metric.
    pub fn riemannian_volume(self) -> f64 {
        match self {
            Group::Su2 => 2.0 * PI * PI,
            Group::U1 => TWO_PI,
        }
    }

    pub fn identity(self) -> GroupElement {
        match self {
            Group::Su2 => GroupElement::Su2(Quat::IDENTITY),
            Group::U1 => GroupElement::U1(0.0),
        }
    }

    /// Draw an element from the normalized Haar measure.
    pub fn haar_sample<R: Rng + ?Sized>(self, rng: &mut R) -> GroupElement {
        match self {
            Group::Su2 => loop {
                let q = Quat::new(
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                );
                let n = q.norm();
                if n > 1e-12 {
                    break GroupElement::Su2(Quat::new(q.w / n, q.x / n, q.y / n, q.z / n));
                }
            },
            Group::U1 => GroupElement::U1(rng.random::<f64>() * TWO_PI),
        }
    }

    pub fn exp(self, v: &LieVector) -> GroupElement {
        match (self, v) {
            (Group::Su2, LieVector::Su2(a)) => GroupElement::Su2(Quat::exp(*a)),
            (Group::U1, LieVector::U1(t)) => GroupElement::u1(*t),
            _ => panic!("Lie vector does not belong to {self}"),
        }
    }

    pub fn zero_vector(self) -> LieVector {
        match self {
            Group::Su2 => LieVector::Su2([0.0; 3]),
            Group::U1 => LieVector::U1(0.0),
        }
    }

    /// Lie vector from a slice of `dim()` components.
    pub fn vector(self, c: &[f64]) -> LieVector {
        assert_eq!(c.len(), self.dim(), "wrong number of Lie-vector components");
        match self {
            Group::Su2 => LieVector::Su2([c[0], c[1], c[2]]),
            Group::U1 => LieVector::U1(c[0]),
        }
    }

    /// Irrep with the given index: `2j` for SU(2), the charge for U(1).
    pub fn irrep(self, index: i64) -> Irrep {
        match self {
            Group::Su2 => Irrep::Spin {
                twice_j: index.unsigned_abs() as u32,
            },
            Group::U1 => Irrep::Charge(index),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Su2 => f.write_str("su2"),
            Group::U1 => f.write_str("u1"),
        }
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "su2" | "su(2)" => Ok(Group::Su2),
            "u1" | "u(1)" => Ok(Group::U1),
            other => Err(Error::InvalidParameter(format!("unknown group `{other}`"))),
        }
    }
}

/// Element of SU(2) (unit quaternion) or U(1) (angle in `[0, 2π)`).
///
/// Serializes as `{"su2":[w,x,y,z]}` or `{"u1":θ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GroupElement {
    #[serde(rename = "su2", with = "quat_array")]
    Su2(Quat),
    #[serde(rename = "u1")]
    U1(f64),
}

mod quat_array {
    use super::Quat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(q: &Quat, s: S) -> Result<S::Ok, S::Error> {
        [q.w, q.x, q.y, q.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Quat, D::Error> {
        let [w, x, y, z] = <[f64; 4]>::deserialize(d)?;
        Ok(Quat::new(w, x, y, z).normalized())
    }
}

impl GroupElement {
    /// U(1) element with the angle reduced to `[0, 2π)`.
    pub fn u1(theta: f64) -> Self {
        let t = theta.rem_euclid(TWO_PI);
        GroupElement::U1(if t >= TWO_PI { 0.0 } else { t })
    }

    /// `exp(ψ n̂)` for a unit axis `n̂`.
    pub fn su2_axis_angle(psi: f64, axis: [f64; 3]) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        GroupElement::Su2(Quat::exp([
            psi * axis[0] / n,
            psi * axis[1] / n,
            psi * axis[2] / n,
        ]))
    }

    pub fn group(&self) -> Group {
        match self {
            GroupElement::Su2(_) => Group::Su2,
            GroupElement::U1(_) => Group::U1,
        }
    }

    pub fn inverse(&self) -> Self {
        match *self {
            GroupElement::Su2(q) => GroupElement::Su2(q.conj()),
            GroupElement::U1(t) => GroupElement::u1(-t),
        }
    }

    /// Integer power, `g^{±1}` being the common case.
    pub fn pow(&self, exponent: i32) -> Self {
        let base = if exponent < 0 { self.inverse() } else { *self };
        let mut out = self.group().identity();
        for _ in 0..exponent.unsigned_abs() {
            out = out * base;
        }
        out
    }

    /// Class angle: `ψ ∈ [0, π]` for SU(2), `|θ| ∈ [0, π]` for U(1).
    pub fn class_angle(&self) -> f64 {
        match *self {
            GroupElement::Su2(q) => q.class_angle(),
            GroupElement::U1(t) => {
                let t = t.rem_euclid(TWO_PI);
                t.min(TWO_PI - t)
            }
        }
    }

    /// Riemannian distance to the identity.
    pub fn distance(&self) -> f64 {
        self.class_angle()
    }

    /// Riemannian distance between two elements.
    pub fn distance_to(&self, other: &GroupElement) -> f64 {
        (*self * other.inverse()).distance()
    }

    /// Principal logarithm. Fails within [`LOG_CUT_EPS`] of the cut locus.
    pub fn log(&self) -> Result<LieVector> {
        match *self {
            GroupElement::Su2(q) => {
                let s = q.vec_norm();
                let psi = s.atan2(q.w);
                if PI - psi < LOG_CUT_EPS {
                    return Err(Error::CutLocus {
                        angle: psi,
                        eps: LOG_CUT_EPS,
                    });
                }
                let f = if s < 1e-8 { 1.0 + psi * psi / 6.0 } else { psi / s };
                Ok(LieVector::Su2([f * q.x, f * q.y, f * q.z]))
            }
            GroupElement::U1(t) => {
                let mut a = t.rem_euclid(TWO_PI);
                if a > PI {
                    a -= TWO_PI;
                }
                if PI - a.abs() < LOG_CUT_EPS {
                    return Err(Error::CutLocus {
                        angle: a.abs(),
                        eps: LOG_CUT_EPS,
                    });
                }
                Ok(LieVector::U1(a))
            }
        }
    }

    /// Matrix of `Ad_g` in the orthonormal Lie basis.
    pub fn adjoint(&self) -> DMatrix<f64> {
        match self {
            GroupElement::Su2(q) => {
                let r = q.rotation();
                DMatrix::from_fn(3, 3, |i, j| r[(i, j)])
            }
            GroupElement::U1(_) => DMatrix::identity(1, 1),
        }
    }

    pub fn adjoint_apply(&self, v: &LieVector) -> LieVector {
        match (self, v) {
            (GroupElement::Su2(q), LieVector::Su2(a)) => {
                let r = q.rotation();
                let out = r * nalgebra::Vector3::new(a[0], a[1], a[2]);
                LieVector::Su2([out[0], out[1], out[2]])
            }
            (GroupElement::U1(_), LieVector::U1(t)) => LieVector::U1(*t),
            _ => panic!("adjoint action across different groups"),
        }
    }

    /// Character `χ_ρ(g)`: `sin((2j+1)ψ)/sin ψ` for SU(2), `cos(nθ)` (real
    /// part) for U(1).
    pub fn character(&self, irrep: Irrep) -> f64 {
        match (*self, irrep) {
            (GroupElement::Su2(q), Irrep::Spin { twice_j }) => chebyshev_u(twice_j as usize, q.w),
            (GroupElement::U1(t), Irrep::Charge(n)) => (n as f64 * t).cos(),
            _ => panic!("irrep does not belong to the element's group"),
        }
    }

    /// True when the element lies within `tol` of the center.
    pub fn is_central(&self, tol: f64) -> bool {
        match self {
            GroupElement::Su2(q) => q.vec_norm() < tol,
            GroupElement::U1(_) => true,
        }
    }

    /// Quaternion components, if SU(2).
    pub fn as_quat(&self) -> Option<Quat> {
        match self {
            GroupElement::Su2(q) => Some(*q),
            GroupElement::U1(_) => None,
        }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        match (self, rhs) {
            (GroupElement::Su2(a), GroupElement::Su2(b)) => {
                let p = a * b;
                // Renormalize only when drift becomes visible.
                let n2 = p.w * p.w + p.x * p.x + p.y * p.y + p.z * p.z;
                if (n2 - 1.0).abs() > 1e-14 {
                    GroupElement::Su2(p.normalized())
                } else {
                    GroupElement::Su2(p)
                }
            }
            (GroupElement::U1(a), GroupElement::U1(b)) => GroupElement::u1(a + b),
            _ => panic!("cannot multiply SU(2) and U(1) elements"),
        }
    }
}

/// `U_k(x)` by the three-term recurrence; `U_k(cos ψ) = sin((k+1)ψ)/sin ψ`.
pub(crate) fn chebyshev_u(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if k == 0 {
        return 1.0;
    }
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Lie-algebra vector in the orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LieVector {
    Su2([f64; 3]),
    U1(f64),
}

impl LieVector {
    pub fn components(&self) -> &[f64] {
        match self {
            LieVector::Su2(a) => a,
            LieVector::U1(t) => std::slice::from_ref(t),
        }
    }

    pub fn norm(&self) -> f64 {
        self.components().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> LieVector {
        match *self {
            LieVector::Su2([a, b, c]) => LieVector::Su2([s * a, s * b, s * c]),
            LieVector::U1(t) => LieVector::U1(s * t),
        }
    }
}

/// Irreducible representation label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Irrep {
    /// SU(2) spin `j = twice_j / 2`.
    Spin { twice_j: u32 },
    /// U(1) charge.
    Charge(i64),
}

impl Irrep {
    pub fn spin(j: f64) -> Irrep {
        let twice = 2.0 * j;
        assert!(
            twice >= 0.0 && (twice - twice.round()).abs() < 1e-12,
            "spin must be a non-negative half-integer"
        );
        Irrep::Spin {
            twice_j: twice.round() as u32,
        }
    }

    pub fn dim(self) -> u64 {
        match self {
            Irrep::Spin { twice_j } => twice_j as u64 + 1,
            Irrep::Charge(_) => 1,
        }
    }

    pub fn casimir(self) -> f64 {
        match self {
            Irrep::Spin { twice_j } => {
                let j = twice_j as f64 / 2.0;
                j * (j + 1.0)
            }
            Irrep::Charge(n) => (n * n) as f64,
        }
    }
}
