//! The uncondensed block system, used as a test oracle.
//!
//! All unknowns of the hybridized formulation are kept explicitly: the
//! per-element flux dofs and scalar values, the one-sided face traces of
//! both subdomains (interface faces carry two slots), the one-sided
//! interface flux multipliers and the interface trace multiplier lambda.
//! The system is assembled densely and solved by LU with partial
//! pivoting, so it is limited to small meshes; its purpose is to validate
//! the statically condensed pipeline, not to be fast.

use faer::prelude::*;
use faer::Mat;

use super::local_matrices;
use crate::mesh::{FaceClass, Mesh, Subdomain};
use crate::problem::{self, BoundaryCondition, ProblemSpec};
use crate::{Error, Result};

/// Hard cap on the element count; the dense system grows with the square
/// of the unknown count.
pub const MAX_ELEMENTS: usize = 500;

/// Slot layout of the block unknown vector.
#[derive(Debug, Clone)]
struct Layout {
    flux_offset: Vec<usize>,
    scalar_offset: Vec<usize>,
    uhat1_slot: Vec<Option<usize>>,
    uhat2_slot: Vec<Option<usize>>,
    j1_slot: Vec<Option<usize>>,
    j2_slot: Vec<Option<usize>>,
    lambda_slot: Vec<Option<usize>>,
    total: usize,
}

impl Layout {
    fn new(mesh: &Mesh) -> Self {
        let ne = mesh.elements.len();
        let nf = mesh.faces.len();
        let mut next = 0usize;
        let mut flux_offset = vec![0; ne];
        let mut scalar_offset = vec![0; ne];
        for e in 0..ne {
            flux_offset[e] = next;
            next += 4;
            scalar_offset[e] = next;
            next += 1;
        }
        let mut uhat1_slot = vec![None; nf];
        let mut uhat2_slot = vec![None; nf];
        let mut j1_slot = vec![None; nf];
        let mut j2_slot = vec![None; nf];
        let mut lambda_slot = vec![None; nf];
        for (fid, face) in mesh.faces.iter().enumerate() {
            match face.class {
                FaceClass::Interior1 | FaceClass::Sigma1 => {
                    uhat1_slot[fid] = Some(next);
                    next += 1;
                }
                FaceClass::Interior2 | FaceClass::Sigma2 => {
                    uhat2_slot[fid] = Some(next);
                    next += 1;
                }
                FaceClass::Gamma => {
                    uhat1_slot[fid] = Some(next);
                    uhat2_slot[fid] = Some(next + 1);
                    j1_slot[fid] = Some(next + 2);
                    j2_slot[fid] = Some(next + 3);
                    lambda_slot[fid] = Some(next + 4);
                    next += 5;
                }
            }
        }
        Layout {
            flux_offset,
            scalar_offset,
            uhat1_slot,
            uhat2_slot,
            j1_slot,
            j2_slot,
            lambda_slot,
            total: next,
        }
    }

    /// Trace slot of face `fid` as seen from `subdomain`.
    fn trace_slot(&self, fid: usize, subdomain: Subdomain) -> usize {
        let slot = match subdomain {
            Subdomain::Omega1 => self.uhat1_slot[fid],
            Subdomain::Omega2 => self.uhat2_slot[fid],
        };
        slot.expect("face has no trace slot on this side")
    }
}

/// Solution of the block system, keyed the same way as the condensed
/// pipeline output.
#[derive(Debug, Clone)]
pub struct FullBlockSolution {
    /// Outward flux integrals per element.
    pub flux: Vec<[f64; 4]>,
    /// Element scalar values.
    pub u: Vec<f64>,
    /// One-sided traces per face (interface faces fill both).
    pub uhat1: Vec<Option<f64>>,
    pub uhat2: Vec<Option<f64>>,
    /// One-sided interface flux multipliers per interface face.
    pub j1: Vec<Option<f64>>,
    pub j2: Vec<Option<f64>>,
    /// Interface trace multiplier per interface face.
    pub lambda: Vec<Option<f64>>,
}

/// Assembles and solves the uncondensed block system.
pub fn solve_full_block(mesh: &Mesh, spec: &ProblemSpec) -> Result<FullBlockSolution> {
    if mesh.elements.len() > MAX_ELEMENTS {
        return Err(Error::BlockOracleTooLarge {
            limit: MAX_ELEMENTS,
            actual: mesh.elements.len(),
        });
    }
    let layout = Layout::new(mesh);
    let n = layout.total;
    let mut matrix = Mat::<f64>::zeros(n, n);
    let mut rhs = vec![0.0; n];
    let mut row = 0usize;

    // Element block rows.
    for (eid, element) in mesh.elements.iter().enumerate() {
        let local = local_matrices(mesh, spec, eid)?;
        for i in 0..4 {
            for j in 0..4 {
                matrix[(row, layout.flux_offset[eid] + j)] = local.a[i][j];
            }
            matrix[(row, layout.scalar_offset[eid])] = local.n[i];
            let trace = layout.trace_slot(element.faces[i], element.subdomain);
            matrix[(row, trace)] = 1.0;
            row += 1;
        }
        for j in 0..4 {
            matrix[(row, layout.flux_offset[eid] + j)] = local.p[j];
        }
        matrix[(row, layout.scalar_offset[eid])] = local.r;
        rhs[row] = local.g;
        row += 1;
    }

    // Face rows: flux continuity, boundary conditions and the coupling to
    // the interface flux multipliers.
    for (fid, face) in mesh.faces.iter().enumerate() {
        match face.class {
            FaceClass::Interior1 | FaceClass::Interior2 => {
                for eid in face.elements.iter().flatten() {
                    let local_index = mesh.local_face_index(*eid, fid);
                    matrix[(row, layout.flux_offset[*eid] + local_index)] = 1.0;
                }
                row += 1;
            }
            FaceClass::Sigma1 | FaceClass::Sigma2 => {
                let eid = face.elements[0].expect("boundary face neighbour");
                let local_index = mesh.local_face_index(eid, fid);
                let subdomain = mesh.elements[eid].subdomain;
                let trace = layout.trace_slot(fid, subdomain);
                match problem::boundary_condition(spec, mesh, fid)? {
                    BoundaryCondition::Dirichlet(value) => {
                        matrix[(row, trace)] = 1.0;
                        rhs[row] = value;
                    }
                    BoundaryCondition::Neumann(flux) => {
                        matrix[(row, layout.flux_offset[eid] + local_index)] = 1.0;
                        rhs[row] = flux * face.area;
                    }
                    BoundaryCondition::Robin { alpha, beta } => {
                        matrix[(row, layout.flux_offset[eid] + local_index)] = 1.0;
                        matrix[(row, trace)] = -alpha * face.area;
                        rhs[row] = -beta * face.area;
                    }
                }
                row += 1;
            }
            FaceClass::Gamma => {
                // One row per side: outward flux integral equals area
                // times the one-sided flux multiplier.
                let e1 = face.elements[0].expect("interface face lower neighbour");
                let e2 = face.elements[1].expect("interface face upper neighbour");
                let i1 = mesh.local_face_index(e1, fid);
                let i2 = mesh.local_face_index(e2, fid);
                matrix[(row, layout.flux_offset[e1] + i1)] = 1.0;
                matrix[(row, layout.j1_slot[fid].unwrap())] = -face.area;
                row += 1;
                matrix[(row, layout.flux_offset[e2] + i2)] = 1.0;
                matrix[(row, layout.j2_slot[fid].unwrap())] = -face.area;
                row += 1;
            }
        }
    }

    // Interface coupling rows: trace identification and flux balance.
    for (fid, face) in mesh.faces.iter().enumerate() {
        if face.class != FaceClass::Gamma {
            continue;
        }
        let kappa = spec.kappa_at(face.barycenter);
        let sigma = spec.sigma_at(face.barycenter);
        let area = face.area;
        matrix[(row, layout.uhat1_slot[fid].unwrap())] = area;
        matrix[(row, layout.lambda_slot[fid].unwrap())] = -area;
        row += 1;
        matrix[(row, layout.uhat2_slot[fid].unwrap())] = area;
        matrix[(row, layout.lambda_slot[fid].unwrap())] = -kappa * area;
        row += 1;
        matrix[(row, layout.j1_slot[fid].unwrap())] = area;
        matrix[(row, layout.j2_slot[fid].unwrap())] = area;
        rhs[row] = -sigma * area;
        row += 1;
    }
    debug_assert_eq!(row, n);

    let lu = matrix.partial_piv_lu();
    let mut b = Mat::<f64>::zeros(n, 1);
    for (i, &v) in rhs.iter().enumerate() {
        b[(i, 0)] = v;
    }
    let x = lu.solve(&b);
    if (0..n).any(|i| !x[(i, 0)].is_finite()) {
        return Err(Error::SingularSystem(0));
    }

    let ne = mesh.elements.len();
    let nf = mesh.faces.len();
    let mut solution = FullBlockSolution {
        flux: vec![[0.0; 4]; ne],
        u: vec![0.0; ne],
        uhat1: vec![None; nf],
        uhat2: vec![None; nf],
        j1: vec![None; nf],
        j2: vec![None; nf],
        lambda: vec![None; nf],
    };
    for e in 0..ne {
        for i in 0..4 {
            solution.flux[e][i] = x[(layout.flux_offset[e] + i, 0)];
        }
        solution.u[e] = x[(layout.scalar_offset[e], 0)];
    }
    for f in 0..nf {
        solution.uhat1[f] = layout.uhat1_slot[f].map(|s| x[(s, 0)]);
        solution.uhat2[f] = layout.uhat2_slot[f].map(|s| x[(s, 0)]);
        solution.j1[f] = layout.j1_slot[f].map(|s| x[(s, 0)]);
        solution.j2[f] = layout.j2_slot[f].map(|s| x[(s, 0)]);
        solution.lambda[f] = layout.lambda_slot[f].map(|s| x[(s, 0)]);
    }
    Ok(solution)
}
