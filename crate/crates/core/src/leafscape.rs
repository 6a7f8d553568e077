//! Global leaf analysis per Casimir value c: singular leaves, topology via
//! the zero pattern of h_c(z) = Q(z) - c, and red lines / signature zones via
//! F_c, the restriction of f to the leaf as a function of z.

use crate::ambient::AmbientPoint;
use crate::error::{Error, Result};
use crate::funcspec::FunctionSpec;
use crate::roots::{isolate_roots, DEFAULT_GRID_CELLS, DEFAULT_ROOT_TOL};

/// A leaf named by its Casimir value, with an optional sample point on the
/// intended connected component.
#[derive(Clone, Debug)]
pub struct LeafId {
    pub c: f64,
    pub component_hint: Option<AmbientPoint>,
}

impl LeafId {
    pub fn new(c: f64) -> Self {
        LeafId {
            c,
            component_hint: None,
        }
    }

    pub fn with_hint(c: f64, hint: AmbientPoint) -> Self {
        LeafId {
            c,
            component_hint: Some(hint),
        }
    }
}

/// Topology and zone profile of a leaf. A component hint, when present, is
/// validated to lie on the leaf before reporting.
pub fn describe_leaf(
    spec: &FunctionSpec,
    leaf: &LeafId,
    z_range: (f64, f64),
) -> Result<(LeafTopology, ZoneProfile)> {
    if let Some(hint) = leaf.component_hint {
        let residual = (crate::ambient::casimir_at(spec, hint) - leaf.c).abs();
        let tol = 1e-6 * (1.0 + leaf.c.abs());
        if residual > tol {
            return Err(Error::StartOffLeaf { residual, tol });
        }
    }
    Ok((
        leaf_topology(spec, leaf.c, z_range)?,
        zone_profile(spec, leaf.c, z_range)?,
    ))
}

#[derive(Clone, Debug)]
pub struct LeafTopology {
    /// Count of simple zeros of h_c on the scanned range.
    pub n_zeros: usize,
    pub genus: Option<u32>,
    pub punctures: Option<u32>,
    /// Set when h_c has a multiple zero (a singular leaf coexists).
    pub degenerate: bool,
    pub components_note: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    Euclidean,
    Lorentzian,
    Degenerate,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Signature::Euclidean => write!(f, "euclidean"),
            Signature::Lorentzian => write!(f, "lorentzian"),
            Signature::Degenerate => write!(f, "degenerate"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ZoneInterval {
    pub lo: f64,
    pub hi: f64,
    pub signature: Signature,
}

#[derive(Clone, Debug)]
pub struct ZoneProfile {
    pub red_lines: Vec<f64>,
    pub intervals: Vec<ZoneInterval>,
}

/// z-values of the point-leaves (0, 0, z) with U(z) = 0 in the range.
pub fn singular_leaves(spec: &FunctionSpec, z_range: (f64, f64)) -> Result<Vec<f64>> {
    isolate_roots(
        |z| spec.jet(z).u,
        z_range.0,
        z_range.1,
        DEFAULT_GRID_CELLS,
        DEFAULT_ROOT_TOL,
    )
}

/// Casimir values of the singular leaves: Q at each root of U.
pub fn casimir_critical_values(spec: &FunctionSpec, z_range: (f64, f64)) -> Result<Vec<f64>> {
    Ok(singular_leaves(spec, z_range)?
        .into_iter()
        .map(|z| spec.jet(z).q)
        .collect())
}

/// h_c(z) = Q(z) - c.
pub fn h_at(spec: &FunctionSpec, c: f64, z: f64) -> f64 {
    spec.jet(z).q - c
}

/// h_c'(z) = U(z) exp(P(z)).
pub fn h_deriv_at(spec: &FunctionSpec, z: f64) -> f64 {
    let jet = spec.jet(z);
    jet.u * jet.p.exp()
}

fn h_second_deriv_at(spec: &FunctionSpec, z: f64) -> f64 {
    let jet = spec.jet(z);
    (jet.du + jet.u * jet.v) * jet.p.exp()
}

const MULTIPLE_ROOT_TOL: f64 = 1e-8;

/// Classify the leaf topology from the zeros of h_c.
///
/// With n >= 1 simple zeros the leaf is a surface of genus
/// floor((n+1)/2) - 1 with one puncture (n odd) or two (n even). A multiple
/// zero flags a degenerate level set and leaves genus/punctures unset.
pub fn leaf_topology(spec: &FunctionSpec, c: f64, z_range: (f64, f64)) -> Result<LeafTopology> {
    let (lo, hi) = z_range;
    let h = |z: f64| h_at(spec, c, z);
    let boundary_tol = 1e-9 * (1.0 + c.abs());
    if h(lo).abs() < boundary_tol {
        return Err(Error::ZeroOnBoundary { z: lo });
    }
    if h(hi).abs() < boundary_tol {
        return Err(Error::ZeroOnBoundary { z: hi });
    }

    let mut roots = isolate_roots(h, lo, hi, DEFAULT_GRID_CELLS, DEFAULT_ROOT_TOL)?;
    // Sign scanning misses even-multiplicity zeros; those sit at roots of U
    // (where h' vanishes), so check the critical points directly.
    for z_star in singular_leaves(spec, z_range)? {
        let on_level = h(z_star).abs() < 1e-9 * (1.0 + c.abs() + spec.jet(z_star).q.abs());
        if on_level && roots.iter().all(|&r| (r - z_star).abs() > 1e-6) {
            roots.push(z_star);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut n_simple = 0usize;
    let mut degenerate = false;
    for &r in &roots {
        let hp = h_deriv_at(spec, r).abs();
        let hpp = h_second_deriv_at(spec, r).abs();
        if hp < MULTIPLE_ROOT_TOL * (1.0 + hpp) {
            degenerate = true;
        } else {
            n_simple += 1;
        }
    }

    if degenerate {
        return Ok(LeafTopology {
            n_zeros: n_simple,
            genus: None,
            punctures: None,
            degenerate: true,
            components_note: "level set contains a singular leaf (multiple zero of h_c)".into(),
        });
    }
    if n_simple == 0 {
        return Ok(LeafTopology {
            n_zeros: 0,
            genus: None,
            punctures: None,
            degenerate: false,
            components_note: "two planar symplectic leaves".into(),
        });
    }
    let n = n_simple as u32;
    let genus = (n + 1) / 2 - 1;
    let punctures = if n % 2 == 1 { 1 } else { 2 };
    Ok(LeafTopology {
        n_zeros: n_simple,
        genus: Some(genus),
        punctures: Some(punctures),
        degenerate: false,
        components_note: format!(
            "genus-{genus} surface with {punctures} puncture{}",
            if punctures == 1 { "" } else { "s" }
        ),
    })
}

/// F_c(z) = U^2 + 2(1 + UV) e^{-P} (c - Q) + V^2 e^{-2P} (c - Q)^2,
/// the on-leaf restriction of f as a function of z.
pub fn f_on_leaf_at(spec: &FunctionSpec, c: f64, z: f64) -> f64 {
    let jet = spec.jet(z);
    let s = (-jet.p).exp() * (c - jet.q); // = xy on the leaf S_c
    jet.u * jet.u + 2.0 * (1.0 + jet.u * jet.v) * s + jet.v * jet.v * s * s
}

/// Zeros of F_c, or the bad-leaf flag when F_c vanishes identically.
#[derive(Clone, Debug, PartialEq)]
pub enum RedLines {
    /// F_c = 0 along the whole range: the induced metric degenerates on all
    /// of the leaf.
    BadLeaf,
    Zeros(Vec<f64>),
}

impl RedLines {
    pub fn zeros(&self) -> &[f64] {
        match self {
            RedLines::BadLeaf => &[],
            RedLines::Zeros(zs) => zs,
        }
    }
}

pub fn red_lines(spec: &FunctionSpec, c: f64, z_range: (f64, f64)) -> Result<RedLines> {
    red_lines_with_resolution(spec, c, z_range, DEFAULT_GRID_CELLS)
}

pub fn red_lines_with_resolution(
    spec: &FunctionSpec,
    c: f64,
    z_range: (f64, f64),
    cells: usize,
) -> Result<RedLines> {
    let f = |z: f64| f_on_leaf_at(spec, c, z);
    let mut sup = 0.0f64;
    for i in 0..=cells {
        let z = z_range.0 + (z_range.1 - z_range.0) * i as f64 / cells as f64;
        sup = sup.max(f(z).abs());
    }
    if sup < 1e-12 * (1.0 + c.abs()) {
        return Ok(RedLines::BadLeaf);
    }
    Ok(RedLines::Zeros(isolate_roots(
        f,
        z_range.0,
        z_range.1,
        cells,
        DEFAULT_ROOT_TOL,
    )?))
}

/// Partition the range by red lines and label each interval by the sign of
/// F_c at its midpoint.
pub fn zone_profile(spec: &FunctionSpec, c: f64, z_range: (f64, f64)) -> Result<ZoneProfile> {
    let lines = red_lines(spec, c, z_range)?;
    match lines {
        RedLines::BadLeaf => Ok(ZoneProfile {
            red_lines: Vec::new(),
            intervals: vec![ZoneInterval {
                lo: z_range.0,
                hi: z_range.1,
                signature: Signature::Degenerate,
            }],
        }),
        RedLines::Zeros(zs) => {
            let mut cuts = vec![z_range.0];
            cuts.extend(zs.iter().copied());
            cuts.push(z_range.1);
            let mut intervals = Vec::new();
            for pair in cuts.windows(2) {
                let (lo, hi) = (pair[0], pair[1]);
                let mid = 0.5 * (lo + hi);
                let v = f_on_leaf_at(spec, c, mid);
                let signature = if v.abs() < 1e-12 * (1.0 + c.abs()) {
                    Signature::Degenerate
                } else if v > 0.0 {
                    Signature::Lorentzian
                } else {
                    Signature::Euclidean
                };
                intervals.push(ZoneInterval { lo, hi, signature });
            }
            Ok(ZoneProfile {
                red_lines: zs,
                intervals,
            })
        }
    }
}
