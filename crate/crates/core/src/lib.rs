//! Numerical geometry for a two-parameter family of Poisson structures on
//! R^3 carrying the flat pseudo-metric 2 dx dy + dz^2.
//!
//! The family is {x,y} = U(z) + V(z)xy, {z,x} = x, {z,y} = -y with Casimir
//! C = xy exp(P) + Q. This crate computes symplectic-leaf topology, the
//! metric-degeneracy loci (red zones and red lines), induced and
//! double-bracket metrics on leaves, generalized double-bracket (GDB)
//! gradient flows, and exports leaf/red-zone geometry as meshes.

pub mod ambient;
pub mod chart;
pub mod dual;
pub mod error;
pub mod expr;
pub mod flow;
pub mod funcspec;
pub mod leafscape;
pub mod linalg;
pub mod mesh;
pub mod metriplectic;
pub mod poly;
pub mod quad;
pub mod roots;
pub mod verify;

pub use ambient::{
    bivector_at, casimir_at, casimir_grad, causal_inverse, causal_transform, flat,
    hamiltonian_field_at, jacobi_residual_at, metric_at, metric_pairing, poisson_bracket, sharp,
    AmbientPoint, CausalPoint, ScalarField, TensorAtPoint, Variance,
};
pub use chart::{
    causal_character_at, chart_frame_at, chart_frame_with_hint, frame_for_ambient, gdb_on_leaf_at,
    gradient_residual_at, radical_direction_at, CausalCharacter, CausalTag, Chart, ChartFrame,
};
pub use error::{Error, Result};
pub use expr::{Expr, Var};
pub use flow::{integrate_flow, project_to_leaf, FlowOptions, Sample, Termination, Trajectory};
pub use funcspec::{parse_spec, FunctionSpec, Jet, SpecKind};
pub use leafscape::{
    casimir_critical_values, describe_leaf, f_on_leaf_at, h_at, leaf_topology, red_lines,
    singular_leaves, zone_profile, LeafId, LeafTopology, RedLines, Signature, ZoneInterval,
    ZoneProfile,
};
pub use mesh::{
    component_count, mesh_leaf, mesh_level_set, mesh_red_zone, polylines_csv, red_line_polylines,
    write_obj, GridBox, Mesh, Polyline, ZoneTag,
};
pub use metriplectic::{
    classify_point, f_at, gdb_ambient_at, metriplectic_at, metriplectic_rank, MetriplecticAtPoint,
    PointClass,
};
