//! The ambient pseudo-Riemannian Poisson manifold (R^3, Pi, g).
//!
//! The bivector is Pi = W dx^dy - x dx^dz + y dy^dz with W = U(z) + xy V(z),
//! and the metric is fixed to g = 2 dx dy + dz^2.

use crate::dual::Dual;
use crate::error::Result;
use crate::expr::{Expr, Var};
use crate::funcspec::FunctionSpec;
use crate::linalg::{dot3, frob3, matvec3, transpose3, Mat3, Vec3};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// A point of R^3 in (x, y, z) coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AmbientPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        AmbientPoint { x, y, z }
    }

    pub fn as_array(&self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: Vec3) -> Self {
        AmbientPoint::new(a[0], a[1], a[2])
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }
}

/// A point of R^3 in causal coordinates (X, Y, T): the metric there is
/// dX^2 + dY^2 - dT^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CausalPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl CausalPoint {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        CausalPoint { x, y, t }
    }
}

/// X = z, Y = (x + y)/sqrt(2), T = (x - y)/sqrt(2).
pub fn causal_transform(p: AmbientPoint) -> CausalPoint {
    CausalPoint::new(p.z, (p.x + p.y) / SQRT_2, (p.x - p.y) / SQRT_2)
}

pub fn causal_inverse(q: CausalPoint) -> AmbientPoint {
    AmbientPoint::new((q.y + q.t) / SQRT_2, (q.y - q.t) / SQRT_2, q.x)
}

/// Matrix of g in (x, y, z) coordinates.
pub const METRIC: Mat3 = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];

pub fn metric_pairing(v: Vec3, w: Vec3) -> f64 {
    v[0] * w[1] + v[1] * w[0] + v[2] * w[2]
}

/// Lower an index: g-flat of a vector.
pub fn flat(v: Vec3) -> Vec3 {
    [v[1], v[0], v[2]]
}

/// Raise an index: g-sharp of a covector (g is an involution here).
pub fn sharp(a: Vec3) -> Vec3 {
    [a[1], a[0], a[2]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Bivector,
    Cometric,
    Metric,
}

/// A 3x3 tensor at a point with its variance tag. Bivectors are
/// antisymmetric, metrics and cometrics symmetric.
#[derive(Clone, Debug)]
pub struct TensorAtPoint {
    pub m: Mat3,
    pub variance: Variance,
}

impl TensorAtPoint {
    pub fn new(m: Mat3, variance: Variance) -> TensorAtPoint {
        let t = TensorAtPoint { m, variance };
        debug_assert!(t.symmetry_defect() == 0.0);
        t
    }

    /// Departure from the symmetry class of the variance tag.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let d = match self.variance {
                    Variance::Bivector => self.m[i][j] + self.m[j][i],
                    _ => self.m[i][j] - self.m[j][i],
                };
                defect = defect.max(d.abs());
            }
        }
        defect
    }
}

/// W(p) = U(z) + xy V(z).
pub fn w_at(spec: &FunctionSpec, p: AmbientPoint) -> f64 {
    let jet = spec.jet(p.z);
    jet.u + p.x * p.y * jet.v
}

/// Matrix of the bivector: Pi^{xy} = W, Pi^{xz} = -x, Pi^{yz} = y.
pub fn bivector_matrix(spec: &FunctionSpec, p: AmbientPoint) -> Mat3 {
    let w = w_at(spec, p);
    [[0.0, w, -p.x], [-w, 0.0, p.y], [p.x, -p.y, 0.0]]
}

pub fn bivector_at(spec: &FunctionSpec, p: AmbientPoint) -> TensorAtPoint {
    TensorAtPoint::new(bivector_matrix(spec, p), Variance::Bivector)
}

/// The constant ambient metric as a tensor.
pub fn metric_at(_p: AmbientPoint) -> TensorAtPoint {
    TensorAtPoint::new(METRIC, Variance::Metric)
}

/// Scalar fields on R^3 with analytic first derivatives: either a parsed
/// expression or the Casimir of a spec.
#[derive(Clone, Debug)]
pub enum ScalarField {
    Expr(Expr),
    Casimir(FunctionSpec),
}

impl ScalarField {
    pub fn parse(text: &str) -> Result<ScalarField> {
        Ok(ScalarField::Expr(Expr::parse(text)?))
    }

    pub fn casimir(spec: FunctionSpec) -> ScalarField {
        ScalarField::Casimir(spec)
    }

    pub fn coordinate(var: Var) -> ScalarField {
        ScalarField::Expr(Expr::Var(var))
    }

    pub fn value(&self, p: AmbientPoint) -> f64 {
        match self {
            ScalarField::Expr(e) => e.value(p.x, p.y, p.z),
            ScalarField::Casimir(spec) => casimir_at(spec, p),
        }
    }

    pub fn value_grad(&self, p: AmbientPoint) -> (f64, Vec3) {
        match self {
            ScalarField::Expr(e) => {
                let d = e.eval::<3>(&|v| match v {
                    Var::X => Dual::var(p.x, 0),
                    Var::Y => Dual::var(p.y, 1),
                    Var::Z => Dual::var(p.z, 2),
                });
                (d.re, d.eps)
            }
            ScalarField::Casimir(spec) => {
                let jet = spec.jet(p.z);
                let ep = jet.p.exp();
                let w = jet.u + p.x * p.y * jet.v;
                (p.x * p.y * ep + jet.q, [p.y * ep, p.x * ep, ep * w])
            }
        }
    }

    pub fn grad(&self, p: AmbientPoint) -> Vec3 {
        self.value_grad(p).1
    }
}

/// C(x, y, z) = xy exp(P(z)) + Q(z).
pub fn casimir_at(spec: &FunctionSpec, p: AmbientPoint) -> f64 {
    let jet = spec.jet(p.z);
    p.x * p.y * jet.p.exp() + jet.q
}

/// Gradient of the Casimir; equals exp(P) (y, x, W).
pub fn casimir_grad(spec: &FunctionSpec, p: AmbientPoint) -> Vec3 {
    let jet = spec.jet(p.z);
    let ep = jet.p.exp();
    [p.y * ep, p.x * ep, ep * (jet.u + p.x * p.y * jet.v)]
}

/// {F, G}(p) = sum_ij Pi^{ij} F_i G_j.
pub fn poisson_bracket(
    spec: &FunctionSpec,
    f: &ScalarField,
    g: &ScalarField,
    p: AmbientPoint,
) -> f64 {
    let pi = bivector_matrix(spec, p);
    let df = f.grad(p);
    let dg = g.grad(p);
    dot3(df, matvec3(&pi, dg))
}

/// Hamiltonian vector field X_G: components (X_G)^j = sum_i Pi^{ij} G_i.
pub fn hamiltonian_field_at(spec: &FunctionSpec, g: &ScalarField, p: AmbientPoint) -> Vec3 {
    let pi = bivector_matrix(spec, p);
    matvec3(&transpose3(&pi), g.grad(p))
}

/// Bivector entries as duals of the base point, for nested brackets.
fn bivector_dual(spec: &FunctionSpec, p: AmbientPoint) -> [[Dual<3>; 3]; 3] {
    let x = Dual::<3>::var(p.x, 0);
    let y = Dual::<3>::var(p.y, 1);
    let z = Dual::<3>::var(p.z, 2);
    let (u, v) = spec.uv_dual(z);
    let w = u + x * y * v;
    let zero = Dual::constant(0.0);
    [[zero, w, -x], [-w, zero, y], [x, -y, zero]]
}

/// Max over coordinate triples of |{xi, {xj, xk}} + cyclic|, with the inner
/// brackets differentiated analytically through dual numbers.
pub fn jacobi_residual_at(spec: &FunctionSpec, p: AmbientPoint) -> f64 {
    let pi_d = bivector_dual(spec, p);
    let pi = bivector_matrix(spec, p);
    // {x_i, B} for a field B with gradient dB: sum_n Pi^{i n} dB_n.
    let outer = |i: usize, db: [f64; 3]| dot3(pi[i], db);
    let mut max_res = 0.0f64;
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [1, 2, 0],
        [2, 0, 1],
        [0, 2, 1],
        [2, 1, 0],
        [1, 0, 2],
    ];
    for [i, j, k] in perms {
        let j1 = outer(i, pi_d[j][k].eps);
        let j2 = outer(j, pi_d[k][i].eps);
        let j3 = outer(k, pi_d[i][j].eps);
        max_res = max_res.max((j1 + j2 + j3).abs());
    }
    max_res
}

/// Scale used for normalizing Casimir-invariance residuals.
pub fn casimir_residual_scale(spec: &FunctionSpec, p: AmbientPoint) -> f64 {
    let dc = casimir_grad(spec, p);
    let pi = bivector_matrix(spec, p);
    dot3(dc, dc).sqrt() * frob3(&pi) + f64::MIN_POSITIVE
}
