//! GDB flow trajectories on a leaf: fixed-step RK4 on the ambient field with
//! a Casimir-preserving Newton projection after every step.

use crate::ambient::{casimir_at, casimir_grad, w_at, AmbientPoint, ScalarField};
use crate::chart::{causal_character_of, frame_for_ambient, gdb_on_leaf, CausalTag};
use crate::error::{Error, Result};
use crate::funcspec::FunctionSpec;
use crate::linalg::{add3, dot3, norm3, scale3, Vec3};
use crate::metriplectic::{f_at, f_scale, gdb_ambient_at};

#[derive(Clone, Debug)]
pub struct FlowOptions {
    pub dt: f64,
    pub n_steps: usize,
    pub casimir_tol: f64,
    pub red_stop_tol: f64,
    pub projection_max_iter: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            dt: 1e-3,
            n_steps: 1000,
            casimir_tol: 1e-10,
            red_stop_tol: 1e-6,
            projection_max_iter: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    StepsExhausted,
    CriticalPoint,
    RedLineApproach,
    /// Projection or chart machinery failed.
    ChartFailure,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::StepsExhausted => write!(f, "steps-exhausted"),
            Termination::CriticalPoint => write!(f, "critical-point"),
            Termination::RedLineApproach => write!(f, "red-line-approach"),
            Termination::ChartFailure => write!(f, "chart-failure"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Sample {
    pub t: f64,
    pub point: AmbientPoint,
    pub g: f64,
    pub casimir: f64,
    pub f: f64,
    pub causal: Option<CausalTag>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn max_casimir_drift(&self, c: f64) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.casimir - c).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns t,x,y,z,G,C,f,causal.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,z,G,C,f,causal\n");
        for s in &self.samples {
            let causal = match s.causal {
                Some(tag) => tag.to_string(),
                None => "n/a".to_string(),
            };
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
                s.t, s.point.x, s.point.y, s.point.z, s.g, s.casimir, s.f, causal
            ));
        }
        out
    }
}

/// Newton iteration along dC until |C - c| < tol.
pub fn project_to_leaf(
    spec: &FunctionSpec,
    c: f64,
    p: AmbientPoint,
    tol: f64,
    max_iter: usize,
) -> Result<AmbientPoint> {
    let mut q = p;
    for _ in 0..max_iter {
        let residual = casimir_at(spec, q) - c;
        if residual.abs() < tol {
            return Ok(q);
        }
        let grad = casimir_grad(spec, q);
        let n2 = dot3(grad, grad);
        if n2 < 1e-28 * (1.0 + q.norm_sq()) {
            return Err(Error::VanishingGradient {
                x: q.x,
                y: q.y,
                z: q.z,
            });
        }
        let step = scale3(grad, -residual / n2);
        q = AmbientPoint::from_array(add3(q.as_array(), step));
    }
    let residual = (casimir_at(spec, q) - c).abs();
    if residual < tol {
        Ok(q)
    } else {
        Err(Error::ProjectionFailed { residual })
    }
}

fn rk4_step(spec: &FunctionSpec, g: &ScalarField, p: AmbientPoint, dt: f64) -> AmbientPoint {
    let field = |q: Vec3| gdb_ambient_at(spec, g, AmbientPoint::from_array(q));
    let y0 = p.as_array();
    let k1 = field(y0);
    let k2 = field(add3(y0, scale3(k1, 0.5 * dt)));
    let k3 = field(add3(y0, scale3(k2, 0.5 * dt)));
    let k4 = field(add3(y0, scale3(k3, dt)));
    let incr = add3(add3(k1, scale3(add3(k2, k3), 2.0)), k4);
    AmbientPoint::from_array(add3(y0, scale3(incr, dt / 6.0)))
}

fn causal_tag_at(
    spec: &FunctionSpec,
    c: f64,
    g: &ScalarField,
    p: AmbientPoint,
) -> Option<CausalTag> {
    let frame = frame_for_ambient(spec, c, p).ok()?;
    let v = gdb_on_leaf(spec, g, &frame);
    causal_character_of(&frame, v).ok().map(|ch| ch.tag)
}

/// Integrate the GDB flow of G from `start` on the leaf C = c.
pub fn integrate_flow(
    spec: &FunctionSpec,
    c: f64,
    g: &ScalarField,
    start: AmbientPoint,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    let residual = (casimir_at(spec, start) - c).abs();
    if residual > opts.casimir_tol {
        return Err(Error::StartOffLeaf {
            residual,
            tol: opts.casimir_tol,
        });
    }
    let f0 = f_at(spec, start);
    if f0.abs() < opts.red_stop_tol * f_scale(start, w_at(spec, start)) {
        return Err(Error::StartInRedZone { f: f0 });
    }

    let proj_tol = 0.1 * opts.casimir_tol;
    let mut samples = Vec::with_capacity(opts.n_steps + 1);
    let mut p = start;
    let mut t = 0.0;
    let mut termination = Termination::StepsExhausted;

    for step in 0..=opts.n_steps {
        let f_val = f_at(spec, p);
        samples.push(Sample {
            t,
            point: p,
            g: g.value(p),
            casimir: casimir_at(spec, p),
            f: f_val,
            causal: causal_tag_at(spec, c, g, p),
        });
        if step == opts.n_steps {
            break;
        }
        let v = gdb_ambient_at(spec, g, p);
        if norm3(v) < 1e-10 * (1.0 + p.norm_sq()) {
            termination = Termination::CriticalPoint;
            break;
        }
        if f_val.abs() < opts.red_stop_tol * f_scale(p, w_at(spec, p)) {
            termination = Termination::RedLineApproach;
            break;
        }
        let stepped = rk4_step(spec, g, p, opts.dt);
        match project_to_leaf(spec, c, stepped, proj_tol, opts.projection_max_iter) {
            Ok(q) => p = q,
            Err(_) => {
                termination = Termination::ChartFailure;
                break;
            }
        }
        t += opts.dt;
    }
    Ok(Trajectory {
        samples,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::frame_for_ambient;
    use crate::expr::Var;
    use crate::linalg::pair2;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_examples() {
        let lin = FunctionSpec::linear();
        let p = project_to_leaf(&lin, 1.0, AmbientPoint::new(1.0, 1.0, 0.1), 1e-12, 8).unwrap();
        assert!((casimir_at(&lin, p) - 1.0).abs() < 1e-12);

        // Already on leaf: unchanged up to tolerance.
        let q0 = AmbientPoint::new(1.0, 1.0, 0.0);
        let q = project_to_leaf(&lin, 1.0, q0, 1e-12, 8).unwrap();
        assert_abs_diff_eq!(q.x, q0.x, epsilon = 1e-12);
        assert_abs_diff_eq!(q.y, q0.y, epsilon = 1e-12);

        // Vanishing Casimir gradient near the origin.
        let r = project_to_leaf(&lin, 1.0, AmbientPoint::new(0.0, 0.0, 0.0), 1e-12, 8);
        assert!(matches!(r, Err(Error::VanishingGradient { .. })));
    }

    #[test]
    fn descent_on_euclidean_leaf() {
        let lin = FunctionSpec::linear();
        let g = ScalarField::coordinate(Var::Z);
        let opts = FlowOptions {
            dt: 1e-3,
            n_steps: 1000,
            ..Default::default()
        };
        let traj =
            integrate_flow(&lin, -1.0, &g, AmbientPoint::new(1.0, -1.0, 0.0), &opts).unwrap();
        assert_eq!(traj.termination, Termination::StepsExhausted);
        for pair in traj.samples.windows(2) {
            assert!(pair[1].g < pair[0].g, "G must strictly decrease");
            assert!(pair[1].t > pair[0].t);
        }
        for s in &traj.samples {
            assert_eq!(s.causal, Some(CausalTag::Spacelike));
        }
    }

    #[test]
    fn ascent_on_lorentzian_leaf() {
        let lin = FunctionSpec::linear();
        let g = ScalarField::coordinate(Var::Z);
        let opts = FlowOptions {
            dt: 1e-3,
            n_steps: 1000,
            ..Default::default()
        };
        let traj = integrate_flow(&lin, 1.0, &g, AmbientPoint::new(1.0, 1.0, 0.0), &opts).unwrap();
        for pair in traj.samples.windows(2) {
            assert!(pair[1].g > pair[0].g, "G must strictly increase");
        }
        for s in &traj.samples {
            assert_eq!(s.causal, Some(CausalTag::Timelike));
        }
    }

    #[test]
    fn casimir_flow_stops_immediately() {
        let lin = FunctionSpec::linear();
        let g = ScalarField::casimir(lin.clone());
        let opts = FlowOptions::default();
        let traj = integrate_flow(&lin, 1.0, &g, AmbientPoint::new(1.0, 1.0, 0.0), &opts).unwrap();
        assert_eq!(traj.termination, Termination::CriticalPoint);
        assert_eq!(traj.samples.len(), 1);
    }

    #[test]
    fn casimir_conservation() {
        let specs = [
            (
                FunctionSpec::linear(),
                -1.0,
                AmbientPoint::new(1.0, -1.0, 0.0),
            ),
            (
                FunctionSpec::linear(),
                1.0,
                AmbientPoint::new(1.0, 1.0, 0.0),
            ),
            (
                FunctionSpec::quadratic(),
                1.0,
                AmbientPoint::new(1.0, 1.0, 0.0),
            ),
        ];
        let g = ScalarField::coordinate(Var::Z);
        let opts = FlowOptions {
            dt: 1e-3,
            n_steps: 10_000,
            ..Default::default()
        };
        for (spec, c, start) in specs {
            let traj = integrate_flow(&spec, c, &g, start, &opts).unwrap();
            assert!(
                traj.max_casimir_drift(c) <= opts.casimir_tol,
                "{spec}: drift {:e}",
                traj.max_casimir_drift(c)
            );
        }
    }

    #[test]
    fn start_point_validation() {
        let lin = FunctionSpec::linear();
        let g = ScalarField::coordinate(Var::Z);
        let opts = FlowOptions::default();
        let r = integrate_flow(&lin, 1.0, &g, AmbientPoint::new(2.0, 2.0, 0.0), &opts);
        assert!(matches!(r, Err(Error::StartOffLeaf { .. })));
        // (1, 1) on the cone c = 0 at z = 1 is a red point.
        let r = integrate_flow(&lin, 0.0, &g, AmbientPoint::new(1.0, -0.5, 1.0), &opts);
        assert!(matches!(r, Err(Error::StartInRedZone { .. })));
    }

    #[test]
    fn red_line_approach_terminates() {
        // On the quadratic c = 0 leaf the z-motion of the G = z flow is
        // 2xy = 2(z - z^3), negative on (-1, 0): starting at z = -0.1 the
        // flow descends into the red line near z = -0.297.
        let qua = FunctionSpec::quadratic();
        let g = ScalarField::coordinate(Var::Z);
        let x = 1.3;
        let z = -0.1;
        let jet = qua.jet(z);
        let y = (0.0 - jet.q) / x;
        let start = AmbientPoint::new(x, y, z);
        // dt small enough that a sample lands inside the |f| stop band
        // (the crossing is transversal, so coarse steps can hop over it).
        let opts = FlowOptions {
            dt: 1e-4,
            n_steps: 50_000,
            red_stop_tol: 1e-4,
            ..Default::default()
        };
        let traj = integrate_flow(&qua, 0.0, &g, start, &opts).unwrap();
        assert_eq!(traj.termination, Termination::RedLineApproach);
        let last = traj.samples.last().unwrap();
        assert!(
            last.point.z > -0.31 && last.point.z < -0.28,
            "z = {}",
            last.point.z
        );
        // Lorentzian zone with G decreasing: the GDB direction is spacelike.
        for s in &traj.samples {
            assert_eq!(s.causal, Some(CausalTag::Spacelike));
        }
        for pair in traj.samples.windows(2) {
            assert!(pair[1].g < pair[0].g);
        }
    }

    #[test]
    fn ascent_into_leaf_pinch_is_a_critical_point() {
        // Flowing G = z up from z = 0.2 on the same leaf converges to the
        // pinch point (0, 0, 1) where the GDB field vanishes.
        let qua = FunctionSpec::quadratic();
        let g = ScalarField::coordinate(Var::Z);
        let x = 1.3;
        let z = 0.2;
        let y = (0.0 - qua.jet(z).q) / x;
        let opts = FlowOptions {
            dt: 1e-2,
            n_steps: 20_000,
            ..Default::default()
        };
        let traj = integrate_flow(&qua, 0.0, &g, AmbientPoint::new(x, y, z), &opts).unwrap();
        assert_eq!(traj.termination, Termination::CriticalPoint);
        let last = traj.samples.last().unwrap().point;
        assert!((last.z - 1.0).abs() < 1e-3, "z = {}", last.z);
    }

    #[test]
    fn monitor_matches_db_norm() {
        // Central-differenced dG/dt vs -tau_DB(v, v) at interior samples.
        let lin = FunctionSpec::linear();
        let g = ScalarField::coordinate(Var::Z);
        let dt = 1e-4;
        let opts = FlowOptions {
            dt,
            n_steps: 2000,
            ..Default::default()
        };
        let traj =
            integrate_flow(&lin, -1.0, &g, AmbientPoint::new(1.0, -1.0, 0.0), &opts).unwrap();
        for k in (1..traj.samples.len() - 1).step_by(97) {
            let measured = (traj.samples[k + 1].g - traj.samples[k - 1].g) / (2.0 * dt);
            let p = traj.samples[k].point;
            let fr = frame_for_ambient(&lin, -1.0, p).unwrap();
            let v = gdb_on_leaf(&lin, &g, &fr);
            let expected = -pair2(fr.tau().unwrap(), v, v);
            assert!(
                (measured - expected).abs() < 1e-3 * expected.abs().max(1e-12),
                "k = {k}: {measured} vs {expected}"
            );
        }
    }

    #[test]
    fn rk4_order_of_convergence() {
        let lin = FunctionSpec::linear();
        let g = ScalarField::coordinate(Var::Z);
        let start = AmbientPoint::new(1.0, 1.0, 0.0);
        let final_g = |dt: f64, n: usize| {
            let opts = FlowOptions {
                dt,
                n_steps: n,
                ..Default::default()
            };
            integrate_flow(&lin, 1.0, &g, start, &opts)
                .unwrap()
                .samples
                .last()
                .unwrap()
                .g
        };
        let g1 = final_g(4e-3, 100);
        let g2 = final_g(2e-3, 200);
        let g3 = final_g(1e-3, 400);
        let order = ((g1 - g2).abs() / (g2 - g3).abs()).log2();
        assert!(order >= 3.5, "observed order {order}");
    }

    #[test]
    fn csv_has_expected_shape() {
        let lin = FunctionSpec::linear();
        let g = ScalarField::coordinate(Var::Z);
        let opts = FlowOptions {
            dt: 1e-3,
            n_steps: 5,
            ..Default::default()
        };
        let traj =
            integrate_flow(&lin, -1.0, &g, AmbientPoint::new(1.0, -1.0, 0.0), &opts).unwrap();
        let csv = traj.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x,y,z,G,C,f,causal");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].ends_with("spacelike"));
    }
}
