//! The metriplectic tensor M, the degeneracy function f, ambient GDB vector
//! fields, and point classification.

use crate::ambient::{AmbientPoint, ScalarField};
use crate::funcspec::FunctionSpec;
use crate::linalg::{matvec3, rank3, Mat3, Vec3};

/// The symmetric tensor M, with the bracket coefficient W and the degeneracy
/// function f = 2xy + W^2 at the same point.
#[derive(Clone, Debug)]
pub struct MetriplecticAtPoint {
    pub m: Mat3,
    pub w: f64,
    pub f: f64,
}

impl MetriplecticAtPoint {
    /// View as a tagged tensor (a symmetric cometric).
    pub fn tensor(&self) -> crate::ambient::TensorAtPoint {
        crate::ambient::TensorAtPoint::new(self.m, crate::ambient::Variance::Cometric)
    }
}

pub fn metriplectic_at(spec: &FunctionSpec, p: AmbientPoint) -> MetriplecticAtPoint {
    let jet = spec.jet(p.z);
    let w = jet.u + p.x * p.y * jet.v;
    let (x, y) = (p.x, p.y);
    let m = [
        [x * x, -x * y - w * w, x * w],
        [-x * y - w * w, y * y, y * w],
        [x * w, y * w, -2.0 * x * y],
    ];
    MetriplecticAtPoint {
        m,
        w,
        f: 2.0 * x * y + w * w,
    }
}

/// f(x, y, z) = 2xy + W^2.
pub fn f_at(spec: &FunctionSpec, p: AmbientPoint) -> f64 {
    let jet = spec.jet(p.z);
    let w = jet.u + p.x * p.y * jet.v;
    2.0 * p.x * p.y + w * w
}

/// Relative scale for f-based thresholds: 1 + x^2 + y^2 + W^2.
pub fn f_scale(p: AmbientPoint, w: f64) -> f64 {
    1.0 + p.x * p.x + p.y * p.y + w * w
}

/// The GDB vector field: partial_G = -M^sharp(dG).
pub fn gdb_ambient_at(spec: &FunctionSpec, g: &ScalarField, p: AmbientPoint) -> Vec3 {
    let mp = metriplectic_at(spec, p);
    let mv = matvec3(&mp.m, g.grad(p));
    [-mv[0], -mv[1], -mv[2]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointClass {
    Regular,
    Red,
    SingularLeaf,
}

impl std::fmt::Display for PointClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointClass::Regular => write!(f, "regular"),
            PointClass::Red => write!(f, "red"),
            PointClass::SingularLeaf => write!(f, "singular-leaf"),
        }
    }
}

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-10;

/// Classify a point as regular, red (M-singular), or a singular point-leaf.
/// Membership in the red zone is decided by the scalar f with a relative
/// scale; rank checks are a cross-check, not the classifier.
pub fn classify_point(spec: &FunctionSpec, p: AmbientPoint, tol: f64) -> PointClass {
    let jet = spec.jet(p.z);
    if p.x.abs() < tol && p.y.abs() < tol && jet.u.abs() < tol {
        return PointClass::SingularLeaf;
    }
    let w = jet.u + p.x * p.y * jet.v;
    let f = 2.0 * p.x * p.y + w * w;
    if f.abs() < tol * f_scale(p, w) {
        PointClass::Red
    } else {
        PointClass::Regular
    }
}

/// Rank of M by singular values above `rel_tol * ||M||`.
pub fn metriplectic_rank(m: &Mat3, rel_tol: f64) -> usize {
    rank3(m, rel_tol)
}
