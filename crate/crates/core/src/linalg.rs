//! Small fixed-size vector and matrix helpers.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn matvec3(m: &Mat3, v: Vec3) -> Vec3 {
    [dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)]
}

pub fn matmul3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose3(m: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

pub fn frob3(m: &Mat3) -> f64 {
    m.iter().flatten().map(|&c| c * c).sum::<f64>().sqrt()
}

pub fn scale_mat3(m: &Mat3, k: f64) -> Mat3 {
    let mut out = *m;
    for row in out.iter_mut() {
        for c in row.iter_mut() {
            *c *= k;
        }
    }
    out
}

pub fn sub_mat3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] - b[i][j];
        }
    }
    out
}

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations,
/// returned in descending order of absolute value.
pub fn sym_eigenvalues(m: &Mat3) -> [f64; 3] {
    let mut a = *m;
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= 1e-30 * (diag + off) || off == 0.0 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let (app, aqq, apq) = (a[p][p], a[q][q], a[p][q]);
            a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
            a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            let r = 3 - p - q;
            let (arp, arq) = (a[r][p], a[r][q]);
            a[r][p] = c * arp - s * arq;
            a[p][r] = a[r][p];
            a[r][q] = s * arp + c * arq;
            a[q][r] = a[r][q];
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    ev.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    ev
}

/// Singular values of a 3x3 matrix, descending. A symmetric matrix takes
/// the direct eigenvalue route, which resolves small singular values to
/// machine precision; the general route through M^T M halves the usable
/// precision by squaring the spectrum.
pub fn singular_values(m: &Mat3) -> [f64; 3] {
    let symmetric = m[0][1] == m[1][0] && m[0][2] == m[2][0] && m[1][2] == m[2][1];
    let mut sv = if symmetric {
        let ev = sym_eigenvalues(m);
        [ev[0].abs(), ev[1].abs(), ev[2].abs()]
    } else {
        let mtm = matmul3(&transpose3(m), m);
        let ev = sym_eigenvalues(&mtm);
        [
            ev[0].max(0.0).sqrt(),
            ev[1].max(0.0).sqrt(),
            ev[2].max(0.0).sqrt(),
        ]
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Numeric rank: singular values above `rel_tol` times the largest.
pub fn rank3(m: &Mat3, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    if sv[0] == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * sv[0]).count()
}

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn matvec2(m: &Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// v^T m w for a symmetric 2x2 matrix.
pub fn pair2(m: &Mat2, v: Vec2, w: Vec2) -> f64 {
    let mw = matvec2(m, w);
    v[0] * mw[0] + v[1] * mw[1]
}

pub fn norm2(v: Vec2) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

pub fn scale_mat2(m: &Mat2, k: f64) -> Mat2 {
    [[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]]
}
