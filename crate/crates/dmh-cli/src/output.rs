//! CSV, VTK and Matrix Market writers.
//!
//! All numbers are written with a fixed scientific format so identical
//! runs produce byte-identical files.

use std::fmt::Write as _;

use dmh_core::assembly::ReducedSystem;
use dmh_core::condensation::rt0_field;
use dmh_core::mesh::Mesh;
use dmh_core::postprocess::{ErrorReport, ProfileSample, SolutionFields};

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

pub const ERROR_CSV_HEADER: &str =
    "h,n,err_u_L2,err_u_maxh,err_P0u_L2,err_ustar_L2,err_J_maxh,err_J_L2,err_J_Hdiv";

/// Error table: one row per mesh.
pub fn error_csv(rows: &[(usize, ErrorReport)]) -> String {
    let mut out = String::from(ERROR_CSV_HEADER);
    out.push('\n');
    for (n, r) in rows {
        let _ = writeln!(
            out,
            "{},{n},{},{},{},{},{},{},{}",
            fmt(r.h),
            fmt(r.u_l2),
            fmt(r.u_maxh),
            fmt(r.p0u_l2),
            fmt(r.ustar_l2),
            fmt(r.flux_maxh),
            fmt(r.flux_l2),
            fmt(r.flux_hdiv),
        );
    }
    out
}

/// Observed-order table between consecutive meshes.
pub fn orders_csv(rows: &[(usize, ErrorReport)]) -> String {
    let mut out = String::from(
        "n_coarse,n_fine,ord_u_L2,ord_u_maxh,ord_P0u_L2,ord_ustar_L2,ord_J_maxh,ord_J_L2,ord_J_Hdiv",
    );
    out.push('\n');
    for pair in rows.windows(2) {
        let (nc, coarse) = &pair[0];
        let (nf, fine) = &pair[1];
        let order = |a: f64, b: f64| (a / b).ln() / 2.0f64.ln();
        let _ = writeln!(
            out,
            "{nc},{nf},{},{},{},{},{},{},{}",
            fmt(order(coarse.u_l2, fine.u_l2)),
            fmt(order(coarse.u_maxh, fine.u_maxh)),
            fmt(order(coarse.p0u_l2, fine.p0u_l2)),
            fmt(order(coarse.ustar_l2, fine.ustar_l2)),
            fmt(order(coarse.flux_maxh, fine.flux_maxh)),
            fmt(order(coarse.flux_l2, fine.flux_l2)),
            fmt(order(coarse.flux_hdiv, fine.flux_hdiv)),
        );
    }
    out
}

/// Line profile along the z axis.
pub fn profile_csv(profile: &[ProfileSample]) -> String {
    let mut out = String::from("z,u_h,u_star\n");
    for s in profile {
        let _ = writeln!(out, "{},{},{}", fmt(s.z), fmt(s.u), fmt(s.u_star));
    }
    out
}

/// Sweep summary: one row per (case, mode).
pub struct SweepRow {
    pub case: usize,
    pub mu: f64,
    pub vz: f64,
    pub peclet: f64,
    pub mode: &'static str,
    pub overshoot: Option<f64>,
    pub undershoot: Option<f64>,
}

pub fn sweep_summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("case,mu,vz,peclet,mode,overshoot,undershoot\n");
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.case,
            fmt(r.mu),
            fmt(r.vz),
            fmt(r.peclet),
            r.mode,
            opt(r.overshoot),
            opt(r.undershoot),
        );
    }
    out
}

/// Legacy ASCII VTK unstructured grid (cell type 10) with the subdomain
/// label, the element scalar and the barycenter flux as cell data.
pub fn vtk(mesh: &Mesh, fields: &SolutionFields) -> String {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("dmh solution\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{} {} {}", fmt(v[0]), fmt(v[1]), fmt(v[2]));
    }
    let ne = mesh.elements.len();
    let _ = writeln!(out, "CELLS {ne} {}", 5 * ne);
    for element in &mesh.elements {
        let v = element.vertices;
        let _ = writeln!(out, "4 {} {} {} {}", v[0], v[1], v[2], v[3]);
    }
    let _ = writeln!(out, "CELL_TYPES {ne}");
    for _ in 0..ne {
        out.push_str("10\n");
    }
    let _ = writeln!(out, "CELL_DATA {ne}");
    out.push_str("SCALARS subdomain int 1\nLOOKUP_TABLE default\n");
    for element in &mesh.elements {
        let _ = writeln!(out, "{}", element.subdomain.index());
    }
    out.push_str("SCALARS u_h double 1\nLOOKUP_TABLE default\n");
    for &u in &fields.u {
        let _ = writeln!(out, "{}", fmt(u));
    }
    out.push_str("VECTORS J_h double\n");
    for (eid, dofs) in fields.flux.iter().enumerate() {
        let geometry = mesh.element_geometry(eid);
        let j = rt0_field(&geometry, *dofs, geometry.barycenter);
        let _ = writeln!(out, "{} {} {}", fmt(j[0]), fmt(j[1]), fmt(j[2]));
    }
    out
}

/// Matrix Market coordinate export of the reduced matrix (1-based
/// indices) and dense array export of the right-hand side.
pub fn matrix_market(system: &ReducedSystem) -> (String, String) {
    let m = &system.matrix;
    let mut mat = String::new();
    mat.push_str("%%MatrixMarket matrix coordinate real general\n");
    mat.push_str("% reduced face system K\n");
    let _ = writeln!(mat, "{} {} {}", m.nrows, m.ncols, m.nnz());
    for row in 0..m.nrows {
        for (col, value) in m.row_entries(row) {
            let _ = writeln!(mat, "{} {} {}", row + 1, col + 1, fmt(value));
        }
    }
    let mut rhs = String::new();
    rhs.push_str("%%MatrixMarket matrix array real general\n");
    rhs.push_str("% load vector t\n");
    let _ = writeln!(rhs, "{} 1", system.rhs.len());
    for &v in &system.rhs {
        let _ = writeln!(rhs, "{}", fmt(v));
    }
    (mat, rhs)
}
