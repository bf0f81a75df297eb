//! Field recovery, the nonconforming interpolant of the face traces,
//! error norms and line profiles.
//!
//! Once the face system is solved, every element recovers its flux dofs
//! and scalar value from the condensed affine maps. The face traces also
//! define a piecewise linear interpolant (the unique linear function
//! matching the four face barycenter values), which superconverges to the
//! exact solution; on interface faces the one-sided trace of the
//! element's own subdomain is used, so the interpolant reproduces the
//! jump instead of smearing it.

use crate::assembly::FaceSolution;
use crate::condensation::{rt0_field, CondensedElement};
use crate::linalg::{norm, sub, Vec3};
use crate::mesh::{ElementGeometry, FaceClass, Mesh};
use crate::quadrature;
use crate::Result;

/// Exact reference fields for error evaluation.
pub trait ReferenceSolution {
    fn u(&self, x: Vec3) -> f64;
    fn flux(&self, x: Vec3) -> Vec3;
    fn flux_divergence(&self, x: Vec3) -> f64;
}

impl ReferenceSolution for crate::analytic::AnalyticSolution {
    fn u(&self, x: Vec3) -> f64 {
        self.u(x[2])
    }

    fn flux(&self, x: Vec3) -> Vec3 {
        [0.0, 0.0, self.flux_z(x[2])]
    }

    fn flux_divergence(&self, x: Vec3) -> f64 {
        self.flux_divergence(x[2])
    }
}

/// Interface flux pair of one interface face: the one-sided normal flux
/// densities seen from below and above.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceFlux {
    pub face: usize,
    /// J·n of the lower element (outward normal points up).
    pub lower: f64,
    /// J·n of the upper element (outward normal points down).
    pub upper: f64,
}

/// Recovered solution fields.
#[derive(Debug, Clone)]
pub struct SolutionFields {
    /// Element scalar values.
    pub u: Vec<f64>,
    /// Outward flux integrals per element, local face numbering.
    pub flux: Vec<[f64; 4]>,
    /// The face solution the fields were recovered from.
    pub face: FaceSolution,
    /// One-sided normal fluxes on the interface faces.
    pub interface_flux: Vec<InterfaceFlux>,
}

/// Recovers all element fields from the face solution.
pub fn recover_fields(
    face_solution: &FaceSolution,
    condensed: &[CondensedElement],
    mesh: &Mesh,
) -> Result<SolutionFields> {
    let ne = mesh.elements.len();
    let mut u = vec![0.0; ne];
    let mut flux = vec![[0.0; 4]; ne];
    for cond in condensed {
        let trace = face_solution.element_trace(mesh, cond.element);
        flux[cond.element] = cond.flux(trace);
        u[cond.element] = cond.scalar(trace);
    }
    let mut interface_flux = Vec::new();
    for (fid, face) in mesh.faces.iter().enumerate() {
        if face.class != FaceClass::Gamma {
            continue;
        }
        let e1 = face.elements[0].expect("interface face lower neighbour");
        let e2 = face.elements[1].expect("interface face upper neighbour");
        let i1 = mesh.local_face_index(e1, fid);
        let i2 = mesh.local_face_index(e2, fid);
        interface_flux.push(InterfaceFlux {
            face: fid,
            lower: flux[e1][i1] / face.area,
            upper: flux[e2][i2] / face.area,
        });
    }
    Ok(SolutionFields {
        u,
        flux,
        face: face_solution.clone(),
        interface_flux,
    })
}

/// Barycentric coordinates of a point with respect to an element.
pub fn barycentric(geometry: &ElementGeometry, x: Vec3) -> [f64; 4] {
    // lambda_i is the linear hat that vanishes on the face opposite
    // vertex i; express it through the outward normal of that face.
    let mut bary = [0.0; 4];
    for i in 0..4 {
        let opposite = crate::mesh::opposite_face(i);
        let anchor = geometry.vertices[opposite[0]];
        let n = geometry.normals[i];
        let denom = crate::linalg::dot(sub(geometry.vertices[i], anchor), n);
        bary[i] = crate::linalg::dot(sub(x, anchor), n) / denom;
    }
    bary
}

/// The piecewise linear nonconforming interpolant of the face traces,
/// evaluated inside element `element_id`.
///
/// The unique linear function whose face barycenter values equal the
/// element's trace values is `sum_i (M - 3 m_i) lambda_i` with
/// M = sum m_j; its value at the element barycenter is the mean of the
/// four face values.
pub fn cr_interpolant(
    face_solution: &FaceSolution,
    mesh: &Mesh,
    element_id: usize,
    x: Vec3,
) -> f64 {
    let geometry = mesh.element_geometry(element_id);
    cr_eval(&geometry, face_solution.element_trace(mesh, element_id), x)
}

/// Same interpolant from explicit face values.
pub fn cr_eval(geometry: &ElementGeometry, face_values: [f64; 4], x: Vec3) -> f64 {
    let total: f64 = face_values.iter().sum();
    let bary = barycentric(geometry, x);
    (0..4)
        .map(|i| (total - 3.0 * face_values[i]) * bary[i])
        .sum()
}

/// The seven error norms against a reference solution, plus the mesh
/// size.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    pub h: f64,
    /// L2 norm of u - u_h.
    pub u_l2: f64,
    /// Discrete max norm of u - u_h at barycenters.
    pub u_maxh: f64,
    /// L2 norm of P0 u - u_h (element averages against element values).
    pub p0u_l2: f64,
    /// L2 norm of u - u_h* (nonconforming interpolant).
    pub ustar_l2: f64,
    /// Discrete max norm of |J - J_h| at barycenters.
    pub flux_maxh: f64,
    /// L2 norm of J - J_h.
    pub flux_l2: f64,
    /// Graph norm: (flux_l2^2 + ||div J - div J_h||^2)^(1/2).
    pub flux_hdiv: f64,
}

/// Computes all error norms.
///
/// The first-order L2 norms use the interior degree-2 rule. The two
/// superconvergent quantities (element averages for the projection norm
/// and the interpolant norm) use a degree-5 rule: their integrands are
/// squares of O(h^2) differences whose shape a degree-2 rule misreads by
/// a constant factor, which would pollute the measurement. The divergence
/// of the recovered flux is the constant (sum of outward flux dofs)/|K|.
pub fn compute_errors(
    fields: &SolutionFields,
    exact: &dyn ReferenceSolution,
    mesh: &Mesh,
) -> ErrorReport {
    let rule = quadrature::degree2();
    let average_rule = quadrature::collapsed_gauss(4);

    let mut u_l2 = 0.0;
    let mut u_maxh: f64 = 0.0;
    let mut p0u_l2 = 0.0;
    let mut ustar_l2 = 0.0;
    let mut flux_maxh: f64 = 0.0;
    let mut flux_l2 = 0.0;
    let mut div_l2 = 0.0;

    for eid in 0..mesh.elements.len() {
        let geometry = mesh.element_geometry(eid);
        let u_h = fields.u[eid];
        let dofs = fields.flux[eid];
        let trace = fields.face.element_trace(mesh, eid);
        let div_h = dofs.iter().sum::<f64>() / geometry.volume;

        u_l2 += rule.integrate(&geometry.vertices, geometry.volume, |x| {
            let d = exact.u(x) - u_h;
            d * d
        });
        ustar_l2 += average_rule.integrate(&geometry.vertices, geometry.volume, |x| {
            let d = exact.u(x) - cr_eval(&geometry, trace, x);
            d * d
        });
        flux_l2 += rule.integrate(&geometry.vertices, geometry.volume, |x| {
            let d = sub(exact.flux(x), rt0_field(&geometry, dofs, x));
            crate::linalg::dot(d, d)
        });
        div_l2 += rule.integrate(&geometry.vertices, geometry.volume, |x| {
            let d = exact.flux_divergence(x) - div_h;
            d * d
        });

        let mean = average_rule.integrate(&geometry.vertices, geometry.volume, |x| exact.u(x))
            / geometry.volume;
        p0u_l2 += geometry.volume * (mean - u_h) * (mean - u_h);

        let xb = geometry.barycenter;
        u_maxh = u_maxh.max((exact.u(xb) - u_h).abs());
        flux_maxh = flux_maxh.max(norm(sub(exact.flux(xb), rt0_field(&geometry, dofs, xb))));
    }

    ErrorReport {
        h: mesh.size(),
        u_l2: u_l2.sqrt(),
        u_maxh,
        p0u_l2: p0u_l2.sqrt(),
        ustar_l2: ustar_l2.sqrt(),
        flux_maxh,
        flux_l2: flux_l2.sqrt(),
        flux_hdiv: (flux_l2 + div_l2).sqrt(),
    }
}

/// One sample of the line profile along the z axis.
#[derive(Debug, Clone, Copy)]
pub struct ProfileSample {
    pub z: f64,
    /// Element value at the barycenter.
    pub u: f64,
    /// Nonconforming interpolant at the same point.
    pub u_star: f64,
}

/// Profile of the solution along the central column of grid cells,
/// sampled at the element barycenters and sorted by z.
pub fn line_profile(fields: &SolutionFields, mesh: &Mesh) -> Vec<ProfileSample> {
    assert!(mesh.n >= 2, "line profiles require a structured cube mesh");
    let cell = 1.0 / mesh.n as f64;
    let lo = 0.5;
    let hi = 0.5 + cell;
    let mut samples = Vec::new();
    for eid in 0..mesh.elements.len() {
        let geometry = mesh.element_geometry(eid);
        let [x, y, z] = geometry.barycenter;
        if x > lo && x < hi && y > lo && y < hi {
            let trace = fields.face.element_trace(mesh, eid);
            samples.push(ProfileSample {
                z,
                u: fields.u[eid],
                u_star: cr_eval(&geometry, trace, geometry.barycenter),
            });
        }
    }
    samples.sort_by(|a, b| a.z.total_cmp(&b.z));
    samples
}
