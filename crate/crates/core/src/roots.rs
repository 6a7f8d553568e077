//! Real-root isolation by sign-change scanning plus bisection refinement.

use crate::error::{Error, Result};

pub const DEFAULT_GRID_CELLS: usize = 2048;
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Roots of `f` on `[lo, hi]`: scan a uniform grid for sign changes and
/// refine each bracket by bisection to interval width `width_tol`.
/// Even-multiplicity zeros produce no sign change and are not found here.
pub fn isolate_roots<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cells: usize,
    width_tol: f64,
) -> Result<Vec<f64>> {
    assert!(cells >= 2 && hi > lo);
    let step = (hi - lo) / cells as f64;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = f(a);
    if fa.is_nan() {
        return Err(Error::RootFinder {
            lo,
            hi,
            reason: "NaN at left endpoint".into(),
        });
    }
    for i in 1..=cells {
        let b = if i == cells { hi } else { lo + step * i as f64 };
        let fb = f(b);
        if fb.is_nan() {
            return Err(Error::RootFinder {
                lo: a,
                hi: b,
                reason: "NaN in sub-interval".into(),
            });
        }
        if fa == 0.0 {
            push_unique(&mut roots, a, width_tol);
        } else if fb != 0.0 && fa.signum() != fb.signum() {
            let r = bisect(&f, a, fa, b, fb, width_tol)?;
            push_unique(&mut roots, r, width_tol);
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        push_unique(&mut roots, a, width_tol);
    }
    Ok(roots)
}

fn push_unique(roots: &mut Vec<f64>, r: f64, tol: f64) {
    if roots
        .last()
        .is_none_or(|&last| (r - last).abs() > 4.0 * tol)
    {
        roots.push(r);
    }
}

fn bisect<F: Fn(f64) -> f64>(
    f: &F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    _fb: f64,
    width_tol: f64,
) -> Result<f64> {
    for _ in 0..200 {
        if (b - a).abs() <= width_tol {
            return Ok(0.5 * (a + b));
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.is_nan() {
            return Err(Error::RootFinder {
                lo: a,
                hi: b,
                reason: "NaN during bisection".into(),
            });
        }
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_roots() {
        let roots = isolate_roots(|z| z * z * z - z, -10.0, 10.0, 2048, 1e-12).unwrap();
        assert_eq!(roots.len(), 3);
        assert!((roots[0] + 1.0).abs() < 1e-11);
        assert!(roots[1].abs() < 1e-11);
        assert!((roots[2] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn exact_grid_node_zero() {
        let roots = isolate_roots(|z| z, -2.0, 2.0, 8, 1e-12).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0], 0.0);
    }

    #[test]
    fn no_roots_on_positive_function() {
        let roots = isolate_roots(|z| z * z + 1.0, -5.0, 5.0, 256, 1e-12).unwrap();
        assert!(roots.is_empty());
    }
}
