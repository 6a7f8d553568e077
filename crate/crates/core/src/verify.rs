//! Seeded verification suite: every structural identity of the family,
//! evaluated at reproducible random points with per-check thresholds.

use crate::ambient::{
    bivector_matrix, casimir_grad, casimir_residual_scale, flat, metric_pairing, poisson_bracket,
    AmbientPoint, ScalarField, METRIC, SQRT_2,
};
use crate::chart::{
    chart_frame_at, gdb_on_leaf, gradient_residual, hamiltonian_on_leaf, leaf_differential, Chart,
    ChartFrame,
};
use crate::expr::Var;
use crate::funcspec::FunctionSpec;
use crate::leafscape::{zone_profile, Signature};
use crate::linalg::{
    dot3, frob3, matmul3, matvec3, norm2, norm3, pair2, scale_mat3, sub_mat3, transpose3,
};
use crate::metriplectic::{f_scale, gdb_ambient_at, metriplectic_at, metriplectic_rank};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub n_points: usize,
    pub seed: u64,
    pub c_values: Vec<f64>,
    pub z_range: (f64, f64),
    pub box_half: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_points: 1000,
            seed: 42,
            c_values: vec![-1.0, 0.5, 1.0],
            z_range: (-2.0, 2.0),
            box_half: 3.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_residual: f64,
    pub threshold: f64,
    pub points: usize,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, max_residual: f64, threshold: f64, points: usize) -> Self {
        CheckResult {
            name,
            max_residual,
            threshold,
            points,
            passed: max_residual < threshold,
        }
    }
}

pub fn sample_ambient(rng: &mut ChaCha8Rng, half: f64) -> AmbientPoint {
    AmbientPoint::new(
        rng.gen_range(-half..half),
        rng.gen_range(-half..half),
        rng.gen_range(-half..half),
    )
}

/// On-leaf frame sampled in the (x, z) chart with x in [0.2, 3], so the
/// chart is always valid and y follows from the leaf equation.
pub fn sample_on_leaf(
    spec: &FunctionSpec,
    c: f64,
    rng: &mut ChaCha8Rng,
    z_range: (f64, f64),
) -> ChartFrame {
    loop {
        let x = rng.gen_range(0.2..3.0);
        let z = rng.gen_range(z_range.0..z_range.1);
        if let Ok(frame) = chart_frame_at(spec, c, Chart::XZ, [x, z]) {
            if frame
                .ambient_point()
                .as_array()
                .iter()
                .all(|v| v.is_finite())
            {
                return frame;
            }
        }
    }
}

pub const GREEN_ZONE_MARGIN: f64 = 1e-3;

/// On-leaf frame bounded away from red lines: |f_S| > margin * scale.
/// Panics after 10^6 rejections (a leaf with no green zone at all).
pub fn sample_green_zone(
    spec: &FunctionSpec,
    c: f64,
    rng: &mut ChaCha8Rng,
    z_range: (f64, f64),
) -> ChartFrame {
    for _ in 0..1_000_000 {
        let frame = sample_on_leaf(spec, c, rng, z_range);
        let p = frame.ambient_point();
        if frame.f_s.abs() > GREEN_ZONE_MARGIN * f_scale(p, frame.w) {
            return frame;
        }
    }
    panic!("no green-zone point found on the leaf c = {c}; is it a bad leaf?");
}

/// Scalar fields exercised by the identity checks.
pub fn g_basket() -> Vec<ScalarField> {
    vec![
        ScalarField::coordinate(Var::X),
        ScalarField::coordinate(Var::Y),
        ScalarField::coordinate(Var::Z),
        ScalarField::parse("x*y + z^2").unwrap(),
        ScalarField::parse("x^2 + y^2").unwrap(),
    ]
}

/// z values where U evaluates to floating-point zero exactly, scanned in
/// ulps around each numeric root. M vanishes identically only at such
/// points; a family may have none (the evaluated value grid can skip 0).
pub fn fp_exact_singular_zs(spec: &FunctionSpec, z_range: (f64, f64)) -> Vec<f64> {
    let mut out = Vec::new();
    let roots = crate::leafscape::singular_leaves(spec, z_range).unwrap_or_default();
    for root in roots {
        if spec.jet(root).u == 0.0 {
            out.push(root);
            continue;
        }
        let mut up = root;
        let mut down = root;
        let mut found = None;
        for _ in 0..20000 {
            up = up.next_up();
            down = down.next_down();
            if spec.jet(up).u == 0.0 {
                found = Some(up);
                break;
            }
            if spec.jet(down).u == 0.0 {
                found = Some(down);
                break;
            }
        }
        if let Some(z) = found {
            out.push(z);
        }
    }
    out
}

fn seeded(opts: &VerifyOptions, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(salt))
}

pub fn run_verify(spec: &FunctionSpec, opts: &VerifyOptions) -> Vec<CheckResult> {
    vec![
        check_jacobi(spec, opts),
        check_casimir_invariance(spec, opts),
        check_bracket_leibniz(spec, opts),
        check_metric_consistency(opts),
        check_factorization(spec, opts),
        check_rank_law(spec, opts),
        check_image_containment(spec, opts),
        check_leaf_tangency(spec, opts),
        check_det_identity(spec, opts),
        check_gradient_identity(spec, opts),
        check_orthogonality(spec, opts),
        check_descent_rate(spec, opts),
        check_chart_overlap(spec, opts),
        check_zone_signature(spec, opts),
    ]
}

fn check_jacobi(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 1);
    let mut max = 0.0f64;
    for _ in 0..opts.n_points {
        let p = sample_ambient(&mut rng, opts.box_half);
        max = max.max(crate::ambient::jacobi_residual_at(spec, p));
    }
    CheckResult::new("jacobi", max, 1e-8, opts.n_points)
}

fn check_casimir_invariance(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 2);
    let c_field = ScalarField::casimir(spec.clone());
    let coords = [Var::X, Var::Y, Var::Z];
    let mut max = 0.0f64;
    for _ in 0..opts.n_points {
        let p = sample_ambient(&mut rng, opts.box_half);
        let scale = casimir_residual_scale(spec, p);
        for var in coords {
            let res = poisson_bracket(spec, &c_field, &ScalarField::coordinate(var), p).abs();
            max = max.max(res / scale);
        }
    }
    CheckResult::new("casimir-invariance", max, 1e-9, opts.n_points)
}

fn check_bracket_leibniz(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 3);
    let f = ScalarField::parse("x*y + z^2").unwrap();
    let g = ScalarField::parse("x + 2*z").unwrap();
    let h = ScalarField::parse("y - z").unwrap();
    let gh = ScalarField::parse("(x + 2*z)*(y - z)").unwrap();
    let mut max = 0.0f64;
    for _ in 0..opts.n_points {
        let p = sample_ambient(&mut rng, opts.box_half);
        let lhs = poisson_bracket(spec, &f, &gh, p);
        let rhs = g.value(p) * poisson_bracket(spec, &f, &h, p)
            + h.value(p) * poisson_bracket(spec, &f, &g, p);
        max = max.max((lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs()));
        let anti = poisson_bracket(spec, &f, &g, p) + poisson_bracket(spec, &g, &f, p);
        max = max.max(anti.abs() / (1.0 + lhs.abs()));
    }
    CheckResult::new("bracket-leibniz", max, 1e-9, opts.n_points)
}

fn check_metric_consistency(opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 4);
    let mut max = 0.0f64;
    for _ in 0..opts.n_points {
        let v = [
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        ];
        let w = [
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        ];
        // flat then sharp is the identity
        let round = crate::ambient::sharp(flat(v));
        for i in 0..3 {
            max = max.max((round[i] - v[i]).abs());
        }
        // pairing agrees with the causal-frame diagonal form
        let causal = |u: [f64; 3]| [u[2], (u[0] + u[1]) / SQRT_2, (u[0] - u[1]) / SQRT_2];
        let (cv, cw) = (causal(v), causal(w));
        let diag = cv[0] * cw[0] + cv[1] * cw[1] - cv[2] * cw[2];
        max = max.max((metric_pairing(v, w) - diag).abs() / (1.0 + diag.abs()));
    }
    CheckResult::new("metric-consistency", max, 1e-14, opts.n_points)
}

fn check_factorization(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 5);
    let mut max = 0.0f64;
    for _ in 0..opts.n_points {
        let p = sample_ambient(&mut rng, opts.box_half);
        let pi = bivector_matrix(spec, p);
        let prod = scale_mat3(&matmul3(&matmul3(&pi, &METRIC), &pi), -1.0);
        let m = metriplectic_at(spec, p).m;
        max = max.max(frob3(&sub_mat3(&m, &prod)) / (1.0 + frob3(&m)));
    }
    CheckResult::new("factorization", max, 1e-12, opts.n_points)
}

fn check_rank_law(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 6);
    let mut mismatches = 0usize;
    let n = opts.n_points.max(1);
    // Regular points: resample until |f| is substantial.
    for _ in 0..n {
        let p = loop {
            let p = sample_ambient(&mut rng, opts.box_half);
            let mp = metriplectic_at(spec, p);
            if mp.f.abs() > 0.1 * f_scale(p, mp.w) {
                break p;
            }
        };
        if metriplectic_rank(&metriplectic_at(spec, p).m, 1e-9) != 2 {
            mismatches += 1;
        }
    }
    // Red points: solve f = 0 for xy, then pick y from x.
    let mut red_count = 0usize;
    while red_count < n {
        let x: f64 = rng.gen_range(0.2..3.0);
        let z: f64 = rng.gen_range(opts.z_range.0..opts.z_range.1);
        let jet = spec.jet(z);
        let s = if jet.v == 0.0 {
            -jet.u * jet.u / 2.0
        } else {
            let disc = 1.0 + 2.0 * jet.u * jet.v;
            if disc < 0.0 {
                continue;
            }
            (-(1.0 + jet.u * jet.v) + disc.sqrt()) / (jet.v * jet.v)
        };
        let p = AmbientPoint::new(x, s / x, z);
        red_count += 1;
        if metriplectic_rank(&metriplectic_at(spec, p).m, 1e-9) != 1 {
            mismatches += 1;
        }
    }
    // Singular point-leaves, at exactly representable roots of U.
    let exact = fp_exact_singular_zs(spec, opts.z_range);
    for z in &exact {
        let p = AmbientPoint::new(0.0, 0.0, *z);
        if metriplectic_rank(&metriplectic_at(spec, p).m, 1e-9) != 0 {
            mismatches += 1;
        }
    }
    CheckResult::new("rank-law", mismatches as f64, 0.5, 2 * n + exact.len())
}

fn check_image_containment(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 7);
    let mut max = 0.0f64;
    for _ in 0..opts.n_points {
        let p = sample_ambient(&mut rng, opts.box_half);
        let mp = metriplectic_at(spec, p);
        // ker Pi is spanned by (y, x, W); im M must be orthogonal to it.
        let k = [p.y, p.x, mp.w];
        let kn = norm3(k) + 1e-300;
        for j in 0..3 {
            let col = [mp.m[0][j], mp.m[1][j], mp.m[2][j]];
            max = max.max(dot3(k, col).abs() / (kn * (norm3(col) + 1e-300)));
        }
    }
    CheckResult::new("image-containment", max, 1e-9, opts.n_points)
}

fn check_leaf_tangency(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 8);
    let basket = g_basket();
    let mut max = 0.0f64;
    for _ in 0..opts.n_points {
        let p = sample_ambient(&mut rng, opts.box_half);
        let dc = casimir_grad(spec, p);
        for g in &basket {
            let v = gdb_ambient_at(spec, g, p);
            max = max.max(dot3(dc, v).abs() / (1.0 + norm3(dc) * norm3(v)));
        }
    }
    CheckResult::new("leaf-tangency", max, 1e-9, opts.n_points)
}

fn check_det_identity(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 9);
    let mut max = 0.0f64;
    let per_c = opts.n_points / opts.c_values.len().max(1) + 1;
    for &c in &opts.c_values {
        for _ in 0..per_c {
            let frame = sample_on_leaf(spec, c, &mut rng, opts.z_range);
            let x = frame.coords[0];
            let expected = -frame.f_s / (x * x);
            max = max.max((frame.det_g_ind() - expected).abs() / (1.0 + expected.abs()));
        }
    }
    CheckResult::new("det-identity", max, 1e-10, opts.n_points)
}

fn check_gradient_identity(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 10);
    let basket = g_basket();
    let mut max = 0.0f64;
    let per_c = (opts.n_points / opts.c_values.len().max(1)).max(1);
    for &c in &opts.c_values {
        for _ in 0..per_c {
            let frame = sample_green_zone(spec, c, &mut rng, opts.z_range);
            for g in &basket {
                max = max.max(gradient_residual(spec, g, &frame).unwrap());
            }
        }
    }
    CheckResult::new("gradient-identity", max, 1e-8, opts.n_points)
}

fn check_orthogonality(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 11);
    let basket = g_basket();
    let mut max = 0.0f64;
    let per_c = (opts.n_points / opts.c_values.len().max(1)).max(1);
    for &c in &opts.c_values {
        for _ in 0..per_c {
            let frame = sample_green_zone(spec, c, &mut rng, opts.z_range);
            let tau = frame.tau().unwrap();
            for g in &basket {
                let v = gdb_on_leaf(spec, g, &frame);
                let xg = hamiltonian_on_leaf(spec, g, &frame);
                let res = pair2(tau, v, xg).abs() / (1.0 + norm2(v) * norm2(xg));
                max = max.max(res);
            }
        }
    }
    CheckResult::new("orthogonality", max, 1e-9, opts.n_points)
}

fn check_descent_rate(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 12);
    let basket = g_basket();
    let mut max = 0.0f64;
    let per_c = (opts.n_points / opts.c_values.len().max(1)).max(1);
    for &c in &opts.c_values {
        for _ in 0..per_c {
            let frame = sample_green_zone(spec, c, &mut rng, opts.z_range);
            for g in &basket {
                let v = gdb_on_leaf(spec, g, &frame);
                let dg_s = leaf_differential(g, &frame);
                let lhs = dg_s[0] * v[0] + dg_s[1] * v[1];
                let rhs = -pair2(frame.tau().unwrap(), v, v);
                max = max.max((lhs - rhs).abs() / (1.0 + lhs.abs() + rhs.abs()));
            }
        }
    }
    CheckResult::new("descent-rate", max, 1e-9, opts.n_points)
}

fn check_chart_overlap(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 13);
    let mut max = 0.0f64;
    let per_c = (opts.n_points / opts.c_values.len().max(1)).max(1);
    for &c in &opts.c_values {
        let mut accepted = 0;
        while accepted < per_c {
            let fx = sample_on_leaf(spec, c, &mut rng, opts.z_range);
            let y = fx.dependent;
            if y.abs() < 1e-3 {
                continue;
            }
            accepted += 1;
            let x = fx.coords[0];
            let z = fx.coords[1];
            let fy = match chart_frame_at(spec, c, Chart::YZ, [y, z]) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let j = [[-y / x, -fx.w / x], [0.0, 1.0]];
            for i in 0..2 {
                for k in 0..2 {
                    let mut pulled = 0.0;
                    for a in 0..2 {
                        for b in 0..2 {
                            pulled += j[a][i] * fy.g_ind[a][b] * j[b][k];
                        }
                    }
                    max = max.max((pulled - fx.g_ind[i][k]).abs() / (1.0 + fx.g_ind[i][k].abs()));
                }
            }
        }
    }
    CheckResult::new("chart-overlap", max, 1e-9, opts.n_points)
}

fn check_zone_signature(spec: &FunctionSpec, opts: &VerifyOptions) -> CheckResult {
    let mut rng = seeded(opts, 14);
    let mut mismatches = 0usize;
    let mut tested = 0usize;
    let per_c = (opts.n_points / opts.c_values.len().max(1)).max(1);
    for &c in &opts.c_values {
        let profile = match zone_profile(spec, c, opts.z_range) {
            Ok(zp) => zp,
            Err(_) => continue,
        };
        for _ in 0..per_c {
            let frame = sample_green_zone(spec, c, &mut rng, opts.z_range);
            let z = frame.coords[1];
            let Some(interval) = profile.intervals.iter().find(|iv| iv.lo <= z && z <= iv.hi)
            else {
                continue;
            };
            tested += 1;
            let det = frame.det_g_ind();
            let ok = match interval.signature {
                Signature::Lorentzian => det < 0.0,
                Signature::Euclidean => det > 0.0 && frame.g_ind[0][0] > 0.0,
                Signature::Degenerate => true,
            };
            if !ok {
                mismatches += 1;
            }
        }
    }
    CheckResult::new("zone-signature", mismatches as f64, 0.5, tested)
}

/// The GDB field agrees with the Hamiltonian route Pi(g_flat(X_G)).
pub fn gdb_route_residual(spec: &FunctionSpec, g: &ScalarField, p: AmbientPoint) -> f64 {
    let xg = crate::ambient::hamiltonian_field_at(spec, g, p);
    let pi = bivector_matrix(spec, p);
    let via_ham = matvec3(&transpose3(&pi), flat(xg));
    let direct = gdb_ambient_at(spec, g, p);
    let mut max = 0.0f64;
    for i in 0..3 {
        max = max.max((via_ham[i] - direct[i]).abs() / (1.0 + norm3(direct)));
    }
    max
}
