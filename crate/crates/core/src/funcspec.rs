//! Structure functions U(z), V(z) and their primitives P, Q.
//!
//! A spec fixes the bracket family {x,y} = U(z) + V(z)xy, {z,x} = x,
//! {z,y} = -y. P is a primitive of V and Q a primitive of U*exp(P); both are
//! anchored at `quad_base` so that P(quad_base) = Q(quad_base) = 0.

use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::poly::Poly;
use crate::quad;
use std::fmt;

/// Values and first derivatives of the structure functions at a point z.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub u: f64,
    pub du: f64,
    pub v: f64,
    pub dv: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecKind {
    Polynomial,
    PoissonLie,
    Custom,
}

impl fmt::Display for SpecKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecKind::Polynomial => write!(f, "polynomial"),
            SpecKind::PoissonLie => write!(f, "poisson-lie"),
            SpecKind::Custom => write!(f, "custom"),
        }
    }
}

#[derive(Clone, Debug)]
enum Family {
    Polynomial {
        u: Poly,
        v: Poly,
        p: Poly,
        /// Exact antiderivative of U, present only when V is identically zero.
        q_exact: Option<Poly>,
    },
    PoissonLie {
        eta: f64,
    },
    Custom {
        u: Expr,
        v: Expr,
    },
}

#[derive(Clone, Debug)]
pub struct FunctionSpec {
    family: Family,
    pub quad_tol: f64,
    pub quad_base: f64,
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

impl FunctionSpec {
    pub fn polynomial(u: Poly, v: Poly) -> FunctionSpec {
        Self::polynomial_anchored(u, v, 0.0)
    }

    pub fn polynomial_anchored(u: Poly, v: Poly, quad_base: f64) -> FunctionSpec {
        let p = v.anchored_antiderivative(quad_base);
        let q_exact = if v.is_zero() {
            Some(u.anchored_antiderivative(quad_base))
        } else {
            None
        };
        FunctionSpec {
            family: Family::Polynomial { u, v, p, q_exact },
            quad_tol: DEFAULT_QUAD_TOL,
            quad_base,
        }
    }

    pub fn poisson_lie(eta: f64) -> Result<FunctionSpec> {
        if eta == 0.0 || !eta.is_finite() {
            return Err(Error::Spec(
                "poisson-lie family requires a non-zero eta".into(),
            ));
        }
        Ok(FunctionSpec {
            family: Family::PoissonLie { eta },
            quad_tol: DEFAULT_QUAD_TOL,
            quad_base: 0.0,
        })
    }

    pub fn custom(u: Expr, v: Expr) -> Result<FunctionSpec> {
        for (name, e) in [("U", &u), ("V", &v)] {
            if e.uses_var(Var::X) || e.uses_var(Var::Y) {
                return Err(Error::Spec(format!(
                    "{name} must be an expression in z alone"
                )));
            }
        }
        let spec = FunctionSpec {
            family: Family::Custom { u, v },
            quad_tol: DEFAULT_QUAD_TOL,
            quad_base: 0.0,
        };
        // Surface quadrature problems at construction time.
        for i in 0..9 {
            let z = -2.0 + 0.5 * i as f64;
            let jet = spec.try_jet(z)?;
            if !(jet.u.is_finite() && jet.p.is_finite() && jet.q.is_finite()) {
                return Err(Error::Spec(format!("custom spec is not finite at z = {z}")));
            }
        }
        Ok(spec)
    }

    /// Linear brackets: U = z, V = 0, Casimir xy + z^2/2.
    pub fn linear() -> FunctionSpec {
        Self::polynomial(Poly::new(vec![0.0, 1.0]), Poly::zero())
    }

    /// Quadratic brackets: U = 3z^2 - 1, V = 0, Casimir xy + z^3 - z.
    pub fn quadratic() -> FunctionSpec {
        Self::polynomial(Poly::new(vec![-1.0, 0.0, 3.0]), Poly::zero())
    }

    /// Quintic-primitive brackets: U = Q' for Q = 2(z-2)(z-1)z(z+1)(z+2).
    pub fn genus2() -> FunctionSpec {
        // Q = 2z^5 - 10z^3 + 8z
        Self::polynomial(Poly::new(vec![8.0, 0.0, -30.0, 0.0, 10.0]), Poly::zero())
    }

    /// Resolve `builtin:` names used by the CLI and tests.
    pub fn builtin(name: &str) -> Result<FunctionSpec> {
        let body = name
            .strip_prefix("builtin:")
            .ok_or_else(|| Error::Spec(format!("not a builtin spec name: '{name}'")))?;
        if let Some(rest) = body.strip_prefix("poisson-lie") {
            let eta = if rest.is_empty() {
                1.0
            } else {
                let inner = rest
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| Error::Spec(format!("bad eta argument in '{name}'")))?;
                inner
                    .parse::<f64>()
                    .map_err(|_| Error::Spec(format!("bad eta argument in '{name}'")))?
            };
            return Self::poisson_lie(eta);
        }
        match body {
            "linear" => Ok(Self::linear()),
            "quadratic" => Ok(Self::quadratic()),
            "genus2" => Ok(Self::genus2()),
            _ => Err(Error::Spec(format!("unknown builtin spec '{name}'"))),
        }
    }

    pub fn kind(&self) -> SpecKind {
        match self.family {
            Family::Polynomial { .. } => SpecKind::Polynomial,
            Family::PoissonLie { .. } => SpecKind::PoissonLie,
            Family::Custom { .. } => SpecKind::Custom,
        }
    }

    pub fn eta(&self) -> Option<f64> {
        match self.family {
            Family::PoissonLie { eta } => Some(eta),
            _ => None,
        }
    }

    /// True when Q has no closed form and is evaluated by quadrature.
    pub fn q_by_quadrature(&self) -> bool {
        match &self.family {
            Family::Polynomial { q_exact, .. } => q_exact.is_none(),
            Family::PoissonLie { .. } => false,
            Family::Custom { .. } => true,
        }
    }

    /// Structure-function values and first derivatives at z. Exact for the
    /// polynomial and poisson-lie families; quadrature-backed for custom
    /// specs (best effort at maximum refinement depth -- see `try_jet`).
    pub fn jet(&self, z: f64) -> Jet {
        self.jet_impl(z, false).expect("lenient jet cannot fail")
    }

    /// As `jet`, but reports quadrature non-convergence for custom specs.
    pub fn try_jet(&self, z: f64) -> Result<Jet> {
        self.jet_impl(z, true)
    }

    fn jet_impl(&self, z: f64, strict: bool) -> Result<Jet> {
        match &self.family {
            Family::Polynomial { u, v, p, q_exact } => {
                let q = match q_exact {
                    Some(qp) => qp.eval(z),
                    None => {
                        let f = |t: f64| u.eval(t) * p.eval(t).exp();
                        if strict {
                            quad::integrate(&f, self.quad_base, z, self.quad_tol)?
                        } else {
                            quad::integrate_lenient(&f, self.quad_base, z, self.quad_tol)
                        }
                    }
                };
                Ok(Jet {
                    u: u.eval(z),
                    du: u.deriv().eval(z),
                    v: v.eval(z),
                    dv: v.deriv().eval(z),
                    p: p.eval(z),
                    q,
                })
            }
            Family::PoissonLie { eta } => {
                let eta = *eta;
                // U = (1 - e^{-2 eta z})/(2 eta), written with exp_m1 to keep
                // accuracy near z = 0; Q = (cosh(eta z) - 1)/eta^2.
                let u = -(-2.0 * eta * z).exp_m1() / (2.0 * eta);
                let s = (0.5 * eta * z).sinh();
                Ok(Jet {
                    u,
                    du: (-2.0 * eta * z).exp(),
                    v: eta,
                    dv: 0.0,
                    p: eta * z,
                    q: 2.0 * s * s / (eta * eta),
                })
            }
            Family::Custom { u, v } => {
                let zvar = |_| Dual::<1>::var(z, 0);
                let ud = u.eval(&zvar);
                let vd = v.eval(&zvar);
                let p_of = |t: f64| {
                    quad::integrate_lenient(
                        &|s| v.value(0.0, 0.0, s),
                        self.quad_base,
                        t,
                        0.1 * self.quad_tol,
                    )
                };
                let q_integrand = |t: f64| u.value(0.0, 0.0, t) * p_of(t).exp();
                let (p, q) = if strict {
                    let p = quad::integrate(
                        &|s| v.value(0.0, 0.0, s),
                        self.quad_base,
                        z,
                        self.quad_tol,
                    )?;
                    let q = quad::integrate(&q_integrand, self.quad_base, z, self.quad_tol)?;
                    (p, q)
                } else {
                    (
                        p_of(z),
                        quad::integrate_lenient(&q_integrand, self.quad_base, z, self.quad_tol),
                    )
                };
                Ok(Jet {
                    u: ud.re,
                    du: ud.eps[0],
                    v: vd.re,
                    dv: vd.eps[0],
                    p,
                    q,
                })
            }
        }
    }

    /// U and V as duals, seeded through the given z-slot of an N-dual point.
    pub(crate) fn uv_dual<const N: usize>(&self, z: Dual<N>) -> (Dual<N>, Dual<N>) {
        let jet = self.jet(z.re);
        let mut u = Dual::constant(jet.u);
        let mut v = Dual::constant(jet.v);
        for ((ue, ve), ze) in u.eps.iter_mut().zip(v.eps.iter_mut()).zip(z.eps) {
            *ue = jet.du * ze;
            *ve = jet.dv * ze;
        }
        (u, v)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Polynomial { u, v, .. } => {
                write!(f, "family=polynomial U=\"{u}\" V=\"{v}\"")
            }
            Family::PoissonLie { eta } => write!(f, "family=poisson-lie eta={eta}"),
            Family::Custom { u, v } => write!(f, "family=custom U=\"{u}\" V=\"{v}\""),
        }
    }
}

/// Parse a spec description: whitespace-insensitive `key=value` pairs, e.g.
/// `family=polynomial U="3*z^2-1" V="0"` or `family=poisson-lie eta=1.0`.
pub fn parse_spec(text: &str) -> Result<FunctionSpec> {
    let pairs = split_pairs(text)?;
    let mut family = None;
    let mut u_text = None;
    let mut v_text = None;
    let mut eta = None;
    let mut quad_tol = None;
    let mut quad_base = None;
    for (key, value) in &pairs {
        match key.as_str() {
            "family" => family = Some(value.clone()),
            "U" => u_text = Some(value.clone()),
            "V" => v_text = Some(value.clone()),
            "eta" => {
                eta = Some(
                    value
                        .parse::<f64>()
                        .map_err(|_| Error::Spec(format!("eta must be a number, got '{value}'")))?,
                )
            }
            "quad_tol" => {
                quad_tol = Some(value.parse::<f64>().map_err(|_| {
                    Error::Spec(format!("quad_tol must be a number, got '{value}'"))
                })?)
            }
            "quad_base" => {
                quad_base = Some(value.parse::<f64>().map_err(|_| {
                    Error::Spec(format!("quad_base must be a number, got '{value}'"))
                })?)
            }
            other => return Err(Error::Spec(format!("unknown key '{other}'"))),
        }
    }
    let family = family.ok_or_else(|| Error::Spec("missing 'family' key".into()))?;
    let mut spec = match family.as_str() {
        "polynomial" => {
            let u_text = u_text.ok_or_else(|| Error::Spec("polynomial family needs U".into()))?;
            let u_expr = Expr::parse(&u_text)?;
            let v_expr = Expr::parse(v_text.as_deref().unwrap_or("0"))?;
            let base = quad_base.unwrap_or(0.0);
            let u = u_expr
                .as_polynomial(Var::Z)
                .ok_or_else(|| Error::Spec(format!("U=\"{u_text}\" is not a polynomial in z")))?;
            let v = v_expr.as_polynomial(Var::Z).ok_or_else(|| {
                Error::Spec("V is not a polynomial in z; use family=custom".into())
            })?;
            FunctionSpec::polynomial_anchored(u, v, base)
        }
        "poisson-lie" => {
            let eta = eta.ok_or_else(|| Error::Spec("poisson-lie family needs eta".into()))?;
            FunctionSpec::poisson_lie(eta)?
        }
        "custom" => {
            let u_text = u_text.ok_or_else(|| Error::Spec("custom family needs U".into()))?;
            let v_text = v_text.ok_or_else(|| Error::Spec("custom family needs V".into()))?;
            FunctionSpec::custom(Expr::parse(&u_text)?, Expr::parse(&v_text)?)?
        }
        other => return Err(Error::Spec(format!("unknown family '{other}'"))),
    };
    if let Some(t) = quad_tol {
        if !(t > 0.0) {
            return Err(Error::Spec("quad_tol must be positive".into()));
        }
        spec.quad_tol = t;
    }
    if let Some(b) = quad_base {
        if spec.kind() == SpecKind::PoissonLie && b != 0.0 {
            // The poisson-lie primitives are fixed closed forms anchored at 0.
            return Err(Error::Spec(
                "quad_base is fixed at 0 for the poisson-lie family".into(),
            ));
        }
        spec.quad_base = b;
    }
    Ok(spec)
}

fn split_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        while i < bytes.len() && (bytes[i] as char).is_whitespace() {
            i += 1;
        }
        if i >= bytes.len() {
            break;
        }
        let key_start = i;
        while i < bytes.len() && bytes[i] != b'=' && !(bytes[i] as char).is_whitespace() {
            i += 1;
        }
        let key = text[key_start..i].to_string();
        while i < bytes.len() && (bytes[i] as char).is_whitespace() {
            i += 1;
        }
        if i >= bytes.len() || bytes[i] != b'=' {
            return Err(Error::Spec(format!("expected '=' after key '{key}'")));
        }
        i += 1;
        while i < bytes.len() && (bytes[i] as char).is_whitespace() {
            i += 1;
        }
        let value = if i < bytes.len() && bytes[i] == b'"' {
            i += 1;
            let start = i;
            while i < bytes.len() && bytes[i] != b'"' {
                i += 1;
            }
            if i >= bytes.len() {
                return Err(Error::Spec(format!(
                    "unterminated quote in value of '{key}'"
                )));
            }
            let v = text[start..i].to_string();
            i += 1;
            v
        } else {
            let start = i;
            while i < bytes.len() && !(bytes[i] as char).is_whitespace() {
                i += 1;
            }
            text[start..i].to_string()
        };
        out.push((key, value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parse_linear_family() {
        let spec = parse_spec("family=polynomial U=z V=0").unwrap();
        let jet = spec.jet(2.0);
        assert_abs_diff_eq!(jet.u, 2.0);
        assert_abs_diff_eq!(jet.v, 0.0);
        assert_abs_diff_eq!(jet.p, 0.0);
        assert_abs_diff_eq!(jet.q, 2.0); // z^2/2 at z = 2
    }

    #[test]
    fn parse_quadratic_family() {
        let spec = parse_spec("family=polynomial U=\"3*z^2-1\" V=\"0\"").unwrap();
        let jet = spec.jet(0.0);
        assert_abs_diff_eq!(jet.u, -1.0);
        assert_abs_diff_eq!(jet.q, 0.0);
        assert_abs_diff_eq!(spec.jet(1.0).q, 0.0); // z^3 - z at 1
        assert_abs_diff_eq!(spec.jet(2.0).q, 6.0);
    }

    #[test]
    fn parse_poisson_lie_family() {
        let spec = parse_spec("family=poisson-lie eta=1.0").unwrap();
        let jet = spec.jet(0.0);
        assert_abs_diff_eq!(jet.u, 0.0);
        assert_abs_diff_eq!(jet.v, 1.0);
        assert_abs_diff_eq!(jet.p, 0.0);
        assert_abs_diff_eq!(jet.q, 0.0);
        // P = z, Q = cosh(z) - 1
        let jet = spec.jet(1.5);
        assert_abs_diff_eq!(jet.p, 1.5);
        assert_abs_diff_eq!(jet.q, 1.5f64.cosh() - 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eta_zero_is_rejected() {
        assert!(parse_spec("family=poisson-lie eta=0").is_err());
        assert!(FunctionSpec::poisson_lie(0.0).is_err());
        assert!(parse_spec("family=poisson-lie eta=1 quad_base=1").is_err());
        assert!(parse_spec("family=poisson-lie eta=1 quad_base=0").is_ok());
    }

    #[test]
    fn malformed_specs_are_rejected() {
        assert!(parse_spec("family=polynomial U=\"exp(z)\"").is_err());
        assert!(parse_spec("family=polynomial").is_err());
        assert!(parse_spec("family=nope U=z").is_err());
        assert!(parse_spec("U=z").is_err());
        assert!(parse_spec("family=polynomial U=\"3*z^\"").is_err());
        assert!(parse_spec("family=polynomial U=z bogus=1").is_err());
    }

    #[test]
    fn nonconstant_v_keeps_exact_p() {
        // V of degree >= 1: P stays the exact polynomial antiderivative,
        // Q falls back to quadrature and the flag reports it.
        let spec = parse_spec("family=polynomial U=\"1\" V=\"2*z\"").unwrap();
        assert!(spec.q_by_quadrature());
        let h = 1e-4;
        for z in [-1.0, 0.3, 1.2] {
            let jet = spec.jet(z);
            assert_abs_diff_eq!(jet.p, z * z, epsilon = 1e-12);
            let fd_q = (spec.jet(z + h).q - spec.jet(z - h).q) / (2.0 * h);
            let qprime = jet.u * jet.p.exp();
            assert!((fd_q - qprime).abs() < 1e-6 * (1.0 + qprime.abs()));
        }
    }

    #[test]
    fn nonzero_v_forces_quadrature_q() {
        let spec = parse_spec("family=polynomial U=\"z\" V=\"1\"").unwrap();
        assert!(spec.q_by_quadrature());
        // P = z exactly; Q' = z e^z, so Q = (z-1)e^z + 1 anchored at 0.
        let jet = spec.jet(1.2);
        assert_abs_diff_eq!(jet.p, 1.2);
        assert_abs_diff_eq!(jet.q, (1.2 - 1.0) * 1.2f64.exp() + 1.0, epsilon = 1e-10);
        assert!(!FunctionSpec::linear().q_by_quadrature());
    }

    #[test]
    fn primitive_derivatives_match_by_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let specs = [
            FunctionSpec::linear(),
            FunctionSpec::quadratic(),
            FunctionSpec::poisson_lie(1.0).unwrap(),
            FunctionSpec::genus2(),
        ];
        let h = 1e-4;
        for spec in &specs {
            for _ in 0..100 {
                let z: f64 = rng.gen_range(-5.0..5.0);
                let jet = spec.jet(z);
                let fd_p = (spec.jet(z + h).p - spec.jet(z - h).p) / (2.0 * h);
                let fd_q = (spec.jet(z + h).q - spec.jet(z - h).q) / (2.0 * h);
                assert!((fd_p - jet.v).abs() < 1e-6 * (1.0 + jet.v.abs()));
                let qprime = jet.u * jet.p.exp();
                assert!((fd_q - qprime).abs() < 1e-6 * (1.0 + qprime.abs()));
            }
        }
    }

    #[test]
    fn custom_primitives_match_by_finite_differences() {
        let spec = parse_spec("family=custom U=\"exp(z)\" V=\"z\"").unwrap();
        let h = 1e-4;
        for i in 0..7 {
            let z = -1.5 + 0.5 * i as f64;
            let jet = spec.try_jet(z).unwrap();
            // P = z^2/2 for V = z
            assert_abs_diff_eq!(jet.p, 0.5 * z * z, epsilon = 1e-10);
            let fd_q = (spec.jet(z + h).q - spec.jet(z - h).q) / (2.0 * h);
            let qprime = jet.u * jet.p.exp();
            assert!((fd_q - qprime).abs() < 1e-6 * (1.0 + qprime.abs()));
            assert_abs_diff_eq!(jet.du, z.exp(), epsilon = 1e-12);
            assert_abs_diff_eq!(jet.dv, 1.0);
        }
    }

    #[test]
    fn poisson_lie_tends_to_linear() {
        // First-order deformation bound: |U_eta(z) - z| <= 2 eta sup(z^2).
        for eta in [1e-2, 1e-3] {
            let spec = FunctionSpec::poisson_lie(eta).unwrap();
            let mut sup = 0.0f64;
            for i in 0..=400 {
                let z = -2.0 + i as f64 / 100.0;
                sup = sup.max((spec.jet(z).u - z).abs());
            }
            assert!(sup <= 2.0 * eta * 4.0, "sup = {sup}, eta = {eta}");
        }
    }

    #[test]
    fn builtin_names_resolve() {
        assert_eq!(
            FunctionSpec::builtin("builtin:linear").unwrap().kind(),
            SpecKind::Polynomial
        );
        let pl = FunctionSpec::builtin("builtin:poisson-lie(0.5)").unwrap();
        assert_abs_diff_eq!(pl.eta().unwrap(), 0.5);
        assert!(FunctionSpec::builtin("builtin:nope").is_err());
        // genus2 primitive: Q = 2(z-2)(z-1)z(z+1)(z+2)
        let g2 = FunctionSpec::builtin("builtin:genus2").unwrap();
        let q = |z: f64| 2.0 * (z - 2.0) * (z - 1.0) * z * (z + 1.0) * (z + 2.0);
        for z in [-1.7, 0.3, 2.4] {
            assert_abs_diff_eq!(g2.jet(z).q, q(z), epsilon = 1e-10);
        }
    }

    #[test]
    fn display_round_trips_through_parse() {
        let specs = [
            FunctionSpec::linear(),
            FunctionSpec::quadratic(),
            FunctionSpec::genus2(),
            FunctionSpec::poisson_lie(0.75).unwrap(),
            parse_spec("family=polynomial U=\"z^3 - z\" V=\"2*z\"").unwrap(),
            parse_spec("family=custom U=\"exp(z) - 1\" V=\"z/2\"").unwrap(),
        ];
        for spec in specs {
            let back = parse_spec(&spec.to_string()).unwrap();
            assert_eq!(back.kind(), spec.kind());
            for z in [-1.4, 0.0, 0.9, 2.2] {
                let (a, b) = (spec.jet(z), back.jet(z));
                assert_abs_diff_eq!(a.u, b.u, epsilon = 1e-12);
                assert_abs_diff_eq!(a.v, b.v, epsilon = 1e-12);
                assert_abs_diff_eq!(a.q, b.q, epsilon = 1e-9);
            }
        }
    }
}
