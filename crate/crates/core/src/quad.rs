//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    converged: &mut bool,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || depth == 0 {
        if depth == 0 && delta.abs() > 15.0 * tol {
            *converged = false;
        }
        return left + right + delta / 15.0;
    }
    adapt(
        f,
        a,
        fa,
        lm,
        flm,
        m,
        fm,
        left,
        0.5 * tol,
        depth - 1,
        converged,
    ) + adapt(
        f,
        m,
        fm,
        rm,
        frm,
        b,
        fb,
        right,
        0.5 * tol,
        depth - 1,
        converged,
    )
}

fn run<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, bool) {
    if a == b {
        return (0.0, true);
    }
    if a > b {
        let (v, ok) = run(f, b, a, tol);
        return (-v, ok);
    }
    let tol = tol.max(1e-15 * (1.0 + (b - a).abs()));
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    let mut converged = true;
    let v = adapt(
        f,
        a,
        fa,
        m,
        fm,
        b,
        fb,
        whole,
        tol,
        MAX_DEPTH,
        &mut converged,
    );
    (v, converged && v.is_finite())
}

/// Integrate `f` over `[a, b]`, reporting non-convergence.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (v, ok) = run(f, a, b, tol);
    if ok {
        Ok(v)
    } else {
        Err(Error::Quadrature { a, b })
    }
}

/// Integrate `f` over `[a, b]`, returning the best estimate at maximum depth.
pub fn integrate_lenient<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    run(f, a, b, tol).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(&|t: f64| 3.0 * t * t, 0.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn exponential() {
        let v = integrate(&f64::exp, -1.0, 1.5, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.5f64.exp() - (-1.0f64).exp(), epsilon = 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(&f64::sin, 0.0, 1.0, 1e-12).unwrap();
        let b = integrate(&f64::sin, 1.0, 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(a, -b, epsilon = 1e-14);
    }
}
