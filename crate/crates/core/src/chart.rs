//! Leaf-level geometry in coordinate charts: induced metric, symplectic area
//! form, the double-bracket metric tau_DB, restricted GDB fields, gradient
//! residuals, and the radical direction on red lines.
//!
//! On the leaf C = c the coordinate pairs (x,z), (y,z), (x,y) give charts
//! valid where x, y, W respectively stay away from zero; only the three
//! together cover the leaf.

use crate::ambient::{AmbientPoint, ScalarField};
use crate::error::{Error, Result};
use crate::funcspec::FunctionSpec;
use crate::linalg::{matvec2, norm2, pair2, scale_mat2, Mat2, Vec2};

pub const CHART_TOL: f64 = 1e-6;
pub const RED_LINE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    XZ,
    YZ,
    XY,
}

impl std::fmt::Display for Chart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Chart::XZ => write!(f, "xz"),
            Chart::YZ => write!(f, "yz"),
            Chart::XY => write!(f, "xy"),
        }
    }
}

/// All leaf-level data at a chart point.
#[derive(Clone, Debug)]
pub struct ChartFrame {
    pub chart: Chart,
    pub coords: Vec2,
    /// Value of the third (dependent) coordinate: y in the (x,z) chart,
    /// x in (y,z), z in (x,y).
    pub dependent: f64,
    pub c: f64,
    pub w: f64,
    /// Induced metric in the chart basis.
    pub g_ind: Mat2,
    /// Coefficient of the area form on the chart basis 2-form.
    pub omega: f64,
    /// tau_DB = -g_ind / f_S; absent within the red-line tolerance.
    pub tau_db: Option<Mat2>,
    pub f_s: f64,
}

impl ChartFrame {
    /// The ambient point this frame sits over.
    pub fn ambient_point(&self) -> AmbientPoint {
        match self.chart {
            Chart::XZ => AmbientPoint::new(self.coords[0], self.dependent, self.coords[1]),
            Chart::YZ => AmbientPoint::new(self.dependent, self.coords[0], self.coords[1]),
            Chart::XY => AmbientPoint::new(self.coords[0], self.coords[1], self.dependent),
        }
    }

    pub fn det_g_ind(&self) -> f64 {
        crate::linalg::det2(&self.g_ind)
    }

    /// tau_DB or the red-line error.
    pub fn tau(&self) -> Result<&Mat2> {
        self.tau_db.as_ref().ok_or(Error::RedLine { f: self.f_s })
    }
}

fn red_line_scale(p: AmbientPoint, w: f64) -> f64 {
    1.0 + p.x * p.x + p.y * p.y + w * w
}

fn build_frame(
    spec: &FunctionSpec,
    c: f64,
    chart: Chart,
    coords: Vec2,
    dependent: f64,
) -> ChartFrame {
    let p = match chart {
        Chart::XZ => AmbientPoint::new(coords[0], dependent, coords[1]),
        Chart::YZ => AmbientPoint::new(dependent, coords[0], coords[1]),
        Chart::XY => AmbientPoint::new(coords[0], coords[1], dependent),
    };
    let jet = spec.jet(p.z);
    let w = jet.u + p.x * p.y * jet.v;
    let f_s = 2.0 * p.x * p.y + w * w;
    let (g_ind, omega) = match chart {
        Chart::XZ => {
            let x = p.x;
            ([[-2.0 * p.y / x, -w / x], [-w / x, 1.0]], 1.0 / x)
        }
        Chart::YZ => {
            let y = p.y;
            ([[-2.0 * p.x / y, -w / y], [-w / y, 1.0]], -1.0 / y)
        }
        Chart::XY => {
            let w2 = w * w;
            (
                [
                    [p.y * p.y / w2, 1.0 + p.x * p.y / w2],
                    [1.0 + p.x * p.y / w2, p.x * p.x / w2],
                ],
                -1.0 / w,
            )
        }
    };
    let tau_db = if f_s.abs() < RED_LINE_TOL * red_line_scale(p, w) {
        None
    } else {
        Some(scale_mat2(&g_ind, -1.0 / f_s))
    };
    ChartFrame {
        chart,
        coords,
        dependent,
        c,
        w,
        g_ind,
        omega,
        tau_db,
        f_s,
    }
}

/// Frame at a chart point, with the dependent coordinate solved from C = c.
///
/// In (x,z) the dependent coordinate is y = e^{-P}(c - Q)/x (likewise with
/// x <-> y for (y,z)); in (x,y) the z equation is solved by Newton from 0.
pub fn chart_frame_at(
    spec: &FunctionSpec,
    c: f64,
    chart: Chart,
    coords: Vec2,
) -> Result<ChartFrame> {
    chart_frame_with_hint(spec, c, chart, coords, 0.0)
}

/// As `chart_frame_at`; `hint` seeds the Newton solve for z in the (x,y)
/// chart, which may have several leaf sheets over the same (x,y).
pub fn chart_frame_with_hint(
    spec: &FunctionSpec,
    c: f64,
    chart: Chart,
    coords: Vec2,
    hint: f64,
) -> Result<ChartFrame> {
    match chart {
        Chart::XZ | Chart::YZ => {
            let (u_coord, z) = (coords[0], coords[1]);
            let label = if chart == Chart::XZ { 'x' } else { 'y' };
            if u_coord.abs() <= CHART_TOL {
                return Err(Error::ChartBreakdown {
                    coord: label,
                    value: u_coord.abs(),
                });
            }
            let jet = spec.jet(z);
            let dependent = (-jet.p).exp() * (c - jet.q) / u_coord;
            Ok(build_frame(spec, c, chart, coords, dependent))
        }
        Chart::XY => {
            let (x, y) = (coords[0], coords[1]);
            let mut z = hint;
            let mut converged = false;
            for _ in 0..100 {
                let jet = spec.jet(z);
                let ep = jet.p.exp();
                let phi = x * y * ep + jet.q - c;
                if phi.abs() < 1e-13 * (1.0 + c.abs()) {
                    converged = true;
                    break;
                }
                let dphi = ep * (jet.u + x * y * jet.v);
                if dphi.abs() < 1e-300 {
                    return Err(Error::DependentCoordinate);
                }
                z -= phi / dphi;
                if !z.is_finite() {
                    return Err(Error::DependentCoordinate);
                }
            }
            if !converged {
                return Err(Error::DependentCoordinate);
            }
            let w = {
                let jet = spec.jet(z);
                jet.u + x * y * jet.v
            };
            if w.abs() <= CHART_TOL {
                return Err(Error::ChartBreakdown {
                    coord: 'W',
                    value: w.abs(),
                });
            }
            Ok(build_frame(spec, c, Chart::XY, coords, z))
        }
    }
}

/// Frame at an (approximately) on-leaf ambient point, selecting the chart in
/// the order (x,z), (y,z), (x,y).
pub fn frame_for_ambient(spec: &FunctionSpec, c: f64, p: AmbientPoint) -> Result<ChartFrame> {
    let w = crate::ambient::w_at(spec, p);
    if p.x.abs() >= p.y.abs() && p.x.abs() > CHART_TOL {
        Ok(build_frame(spec, c, Chart::XZ, [p.x, p.z], p.y))
    } else if p.y.abs() > CHART_TOL {
        Ok(build_frame(spec, c, Chart::YZ, [p.y, p.z], p.x))
    } else if w.abs() > CHART_TOL {
        Ok(build_frame(spec, c, Chart::XY, [p.x, p.y], p.z))
    } else {
        Err(Error::PointLeafProximity)
    }
}

/// Chart components of the restricted GDB field: the two ambient components
/// of partial_G matching the chart coordinates, at the lifted point.
pub fn gdb_on_leaf(spec: &FunctionSpec, g: &ScalarField, frame: &ChartFrame) -> Vec2 {
    let p = frame.ambient_point();
    let v = crate::metriplectic::gdb_ambient_at(spec, g, p);
    match frame.chart {
        Chart::XZ => [v[0], v[2]],
        Chart::YZ => [v[1], v[2]],
        Chart::XY => [v[0], v[1]],
    }
}

/// Chart components of the Hamiltonian field X_G at the lifted point.
pub fn hamiltonian_on_leaf(spec: &FunctionSpec, g: &ScalarField, frame: &ChartFrame) -> Vec2 {
    let p = frame.ambient_point();
    let v = crate::ambient::hamiltonian_field_at(spec, g, p);
    match frame.chart {
        Chart::XZ => [v[0], v[2]],
        Chart::YZ => [v[1], v[2]],
        Chart::XY => [v[0], v[1]],
    }
}

pub fn gdb_on_leaf_at(
    spec: &FunctionSpec,
    c: f64,
    g: &ScalarField,
    chart: Chart,
    coords: Vec2,
) -> Result<Vec2> {
    let frame = chart_frame_at(spec, c, chart, coords)?;
    Ok(gdb_on_leaf(spec, g, &frame))
}

/// Differential of G restricted to the leaf, in the chart basis, by the
/// chain rule through the dependent coordinate.
pub fn leaf_differential(g: &ScalarField, frame: &ChartFrame) -> Vec2 {
    let p = frame.ambient_point();
    let dg = g.grad(p);
    let w = frame.w;
    match frame.chart {
        // y(x,z): y_x = -y/x, y_z = -W/x
        Chart::XZ => {
            let x = p.x;
            [dg[0] - p.y / x * dg[1], dg[2] - w / x * dg[1]]
        }
        // x(y,z): x_y = -x/y, x_z = -W/y
        Chart::YZ => {
            let y = p.y;
            [dg[1] - p.x / y * dg[0], dg[2] - w / y * dg[0]]
        }
        // z(x,y): z_x = -y/W, z_y = -x/W
        Chart::XY => [dg[0] - p.y / w * dg[2], dg[1] - p.x / w * dg[2]],
    }
}

/// || tau_DB-flat(partial_G|_S) + d(G|_S) || / (1 + ||d(G|_S)||).
pub fn gradient_residual(spec: &FunctionSpec, g: &ScalarField, frame: &ChartFrame) -> Result<f64> {
    let tau = frame.tau()?;
    let v = gdb_on_leaf(spec, g, frame);
    let lowered = matvec2(tau, v);
    let dg_s = leaf_differential(g, frame);
    let num = norm2([lowered[0] + dg_s[0], lowered[1] + dg_s[1]]);
    Ok(num / (1.0 + norm2(dg_s)))
}

pub fn gradient_residual_at(
    spec: &FunctionSpec,
    c: f64,
    g: &ScalarField,
    chart: Chart,
    coords: Vec2,
) -> Result<f64> {
    let frame = chart_frame_at(spec, c, chart, coords)?;
    gradient_residual(spec, g, &frame)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CausalTag {
    Spacelike,
    Timelike,
    Null,
}

impl std::fmt::Display for CausalTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CausalTag::Spacelike => write!(f, "spacelike"),
            CausalTag::Timelike => write!(f, "timelike"),
            CausalTag::Null => write!(f, "null"),
        }
    }
}

/// Causal character of a leaf vector under tau_DB.
#[derive(Clone, Copy, Debug)]
pub struct CausalCharacter {
    pub tag: CausalTag,
    /// tau_DB(v, v)
    pub norm2: f64,
}

pub fn causal_character_of(frame: &ChartFrame, v: Vec2) -> Result<CausalCharacter> {
    let tau = frame.tau()?;
    let norm2_v = pair2(tau, v, v);
    let band = 1e-9 * (1.0 + v[0] * v[0] + v[1] * v[1]);
    let tag = if norm2_v.abs() < band {
        CausalTag::Null
    } else if norm2_v > 0.0 {
        CausalTag::Spacelike
    } else {
        CausalTag::Timelike
    };
    Ok(CausalCharacter {
        tag,
        norm2: norm2_v,
    })
}

/// Causal character of the restricted GDB field of G.
pub fn causal_character_at(
    spec: &FunctionSpec,
    c: f64,
    g: &ScalarField,
    chart: Chart,
    coords: Vec2,
) -> Result<CausalCharacter> {
    let frame = chart_frame_at(spec, c, chart, coords)?;
    let v = gdb_on_leaf(spec, g, &frame);
    causal_character_of(&frame, v)
}

/// The kernel direction of g_ind on a red line: (x, W) in the (x,z) chart,
/// (y, W) in (y,z), (x, y) in (x,y).
pub fn radical_direction_at(
    spec: &FunctionSpec,
    c: f64,
    chart: Chart,
    coords: Vec2,
) -> Result<Vec2> {
    let frame = chart_frame_at(spec, c, chart, coords)?;
    radical_direction(&frame)
}

pub fn radical_direction(frame: &ChartFrame) -> Result<Vec2> {
    let p = frame.ambient_point();
    if frame.f_s.abs() >= RED_LINE_TOL * red_line_scale(p, frame.w) {
        return Err(Error::NotOnRedLine { f: frame.f_s });
    }
    Ok(match frame.chart {
        Chart::XZ => [p.x, frame.w],
        Chart::YZ => [p.y, frame.w],
        Chart::XY => [p.x, p.y],
    })
}
