//! Numbering of the reduced unknowns, assembly of the face-indexed sparse
//! system and its solution.
//!
//! The reduced unknown vector holds one value per mesh face: the hybrid
//! trace on ordinary faces and the interface multiplier lambda on
//! interface faces, where the one-sided traces are recovered as
//! uhat_1 = lambda and uhat_2 = kappa lambda. Dirichlet faces keep their
//! slot and receive an identity row with the prescribed value, which
//! leaves the face indexing untouched.
//!
//! Each free row balances the outward flux integrals through its face:
//! interior rows sum the affine flux maps of the two neighbouring
//! elements, boundary rows couple the single neighbour with the boundary
//! data, and interface rows enforce the flux balance against the surface
//! source. An interior row touches the face itself plus the three
//! remaining faces of each neighbour, hence at most 7 structural nonzeros;
//! boundary rows touch at most 4.

pub mod full_block;

use crate::condensation::{self, CondensedElement};
use crate::mesh::{FaceClass, Mesh, Subdomain};
use crate::problem::{self, BoundaryCondition, ProblemSpec};
use crate::sparse::{self, CsrMatrix};
use crate::stabilization;
use crate::{Error, Result};

/// Above this many unknowns the solver switches from the sparse direct
/// factorization to preconditioned BiCGStab.
pub const DIRECT_SOLVE_LIMIT: usize = 200_000;

/// Relative residual contract for either solve path.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Role of a face slot in the reduced system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnknownKind {
    /// Hybrid trace on an interior or non-Dirichlet boundary face.
    Hybrid,
    /// Interface multiplier on an interface face.
    InterfaceLambda,
    /// Fixed Dirichlet value; the row is an identity row.
    DirichletFixed(f64),
}

/// Face id to unknown map. The reduced index of a face equals the face id;
/// the map records what kind of unknown each slot holds.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub kinds: Vec<UnknownKind>,
    /// Number of reduced unknowns (= number of faces).
    pub n_unknowns: usize,
}

impl DofMap {
    pub fn index(&self, face_id: usize) -> usize {
        face_id
    }

    pub fn num_fixed(&self) -> usize {
        self.kinds
            .iter()
            .filter(|k| matches!(k, UnknownKind::DirichletFixed(_)))
            .count()
    }
}

/// Assigns every face its unknown kind in face id order.
pub fn number_unknowns(mesh: &Mesh, spec: &ProblemSpec) -> Result<DofMap> {
    let mut kinds = Vec::with_capacity(mesh.faces.len());
    for (fid, face) in mesh.faces.iter().enumerate() {
        let kind = match face.class {
            FaceClass::Gamma => UnknownKind::InterfaceLambda,
            FaceClass::Sigma1 | FaceClass::Sigma2 => {
                match problem::boundary_condition(spec, mesh, fid)? {
                    BoundaryCondition::Dirichlet(value) => UnknownKind::DirichletFixed(value),
                    _ => UnknownKind::Hybrid,
                }
            }
            _ => UnknownKind::Hybrid,
        };
        kinds.push(kind);
    }
    Ok(DofMap {
        n_unknowns: kinds.len(),
        kinds,
    })
}

/// The assembled reduced system K U = t.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    /// Segregation coefficient per face (1 away from the interface), kept
    /// for expanding the one-sided interface traces of the solution.
    pub kappa: Vec<f64>,
}

/// Solution of the reduced system.
///
/// `values[f]` is the hybrid trace on ordinary faces and lambda on
/// interface faces. The one-sided interface traces follow as
/// uhat_1 = lambda and uhat_2 = kappa lambda, so the segregation condition
/// holds exactly by construction.
#[derive(Debug, Clone)]
pub struct FaceSolution {
    pub values: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl FaceSolution {
    /// Trace seen from the lower subdomain (equals lambda on the
    /// interface).
    pub fn uhat1(&self, face_id: usize) -> f64 {
        self.values[face_id]
    }

    /// Trace seen from the upper subdomain (kappa lambda on the
    /// interface).
    pub fn uhat2(&self, face_id: usize) -> f64 {
        self.kappa[face_id] * self.values[face_id]
    }

    /// The four face trace values seen by one element, resolving interface
    /// faces to the element's side.
    pub fn element_trace(&self, mesh: &Mesh, element_id: usize) -> [f64; 4] {
        let element = &mesh.elements[element_id];
        let mut out = [0.0; 4];
        for (slot, &fid) in out.iter_mut().zip(&element.faces) {
            let gamma = mesh.faces[fid].class == FaceClass::Gamma;
            *slot = if gamma && element.subdomain == Subdomain::Omega2 {
                self.uhat2(fid)
            } else {
                self.values[fid]
            };
        }
        out
    }
}

/// Local matrices of one element: barycenter coefficient sample, local
/// Peclet number, stabilized tensor, local integrals.
pub fn local_matrices(
    mesh: &Mesh,
    spec: &ProblemSpec,
    element_id: usize,
) -> Result<condensation::LocalMatrices> {
    let element = &mesh.elements[element_id];
    let geometry = mesh.element_geometry(element_id);
    let sample = problem::sample_at(spec, element.subdomain, &geometry);
    if sample.mu <= 0.0 {
        return Err(Error::InvalidCoefficient {
            name: "mu",
            value: sample.mu,
            constraint: "mu > 0",
        });
    }
    let peclet = stabilization::local_peclet(&geometry, sample.velocity, sample.mu);
    let tensor =
        stabilization::stabilized_tensor(sample.mu, sample.velocity, peclet, spec.stabilization)?;
    condensation::assemble_local(&geometry, &sample, &tensor, element.face_signs)
}

/// Condenses every element of the mesh.
pub fn condense_all(mesh: &Mesh, spec: &ProblemSpec) -> Result<Vec<CondensedElement>> {
    let mut out = Vec::with_capacity(mesh.elements.len());
    for eid in 0..mesh.elements.len() {
        let local = local_matrices(mesh, spec, eid)?;
        out.push(condensation::condense(eid, &local)?);
    }
    Ok(out)
}

/// Assembles the reduced system from the condensed elements.
///
/// The slice may list the elements in any order; each element must appear
/// exactly once. Matrix entries are accumulated through a canonical
/// ordering, so the result does not depend on the traversal order.
pub fn assemble_reduced(
    mesh: &Mesh,
    spec: &ProblemSpec,
    condensed: &[CondensedElement],
) -> Result<ReducedSystem> {
    let dofs = number_unknowns(mesh, spec)?;
    let nf = mesh.faces.len();

    let mut seen = vec![false; mesh.elements.len()];
    for cond in condensed {
        if cond.element >= seen.len() || seen[cond.element] {
            return Err(Error::MissingCondensedElement(cond.element));
        }
        seen[cond.element] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::MissingCondensedElement(missing));
    }

    let mut kappa = vec![1.0; nf];
    for (fid, face) in mesh.faces.iter().enumerate() {
        if face.class == FaceClass::Gamma {
            kappa[fid] = spec.kappa_at(face.barycenter);
        }
    }

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(16 * mesh.elements.len());
    let mut rhs = vec![0.0; nf];

    for cond in condensed {
        let element = &mesh.elements[cond.element];
        for i in 0..4 {
            let row = element.faces[i];
            if matches!(dofs.kinds[row], UnknownKind::DirichletFixed(_)) {
                continue;
            }
            for j in 0..4 {
                let col = element.faces[j];
                match dofs.kinds[col] {
                    UnknownKind::DirichletFixed(value) => {
                        rhs[row] -= cond.l[i][j] * value;
                    }
                    UnknownKind::InterfaceLambda
                        if element.subdomain == Subdomain::Omega2 =>
                    {
                        triplets.push((row, col, cond.l[i][j] * kappa[col]));
                    }
                    _ => triplets.push((row, col, cond.l[i][j])),
                }
            }
            rhs[row] -= cond.b[i];
        }
    }

    for (fid, face) in mesh.faces.iter().enumerate() {
        match face.class {
            FaceClass::Gamma => {
                rhs[fid] -= spec.sigma_at(face.barycenter) * face.area;
            }
            FaceClass::Sigma1 | FaceClass::Sigma2 => {
                match problem::boundary_condition(spec, mesh, fid)? {
                    BoundaryCondition::Dirichlet(value) => {
                        triplets.push((fid, fid, 1.0));
                        rhs[fid] = value;
                    }
                    BoundaryCondition::Neumann(flux) => {
                        rhs[fid] += flux * face.area;
                    }
                    BoundaryCondition::Robin { alpha, beta } => {
                        triplets.push((fid, fid, -alpha * face.area));
                        rhs[fid] -= beta * face.area;
                    }
                }
            }
            _ => {}
        }
    }

    Ok(ReducedSystem {
        matrix: CsrMatrix::from_triplets(nf, nf, triplets),
        rhs,
        dofs,
        kappa,
    })
}

/// Solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Direct below [`DIRECT_SOLVE_LIMIT`] unknowns, iterative above.
    Auto,
    Direct,
    Iterative,
}

impl ReducedSystem {
    pub fn solve(&self) -> Result<FaceSolution> {
        self.solve_with(SolveMethod::Auto)
    }

    pub fn solve_with(&self, method: SolveMethod) -> Result<FaceSolution> {
        let n = self.matrix.nrows;
        let method = match method {
            SolveMethod::Auto if n <= DIRECT_SOLVE_LIMIT => SolveMethod::Direct,
            SolveMethod::Auto => SolveMethod::Iterative,
            m => m,
        };
        let values = match method {
            SolveMethod::Direct => sparse::solve_direct(&self.matrix, &self.rhs)?,
            SolveMethod::Iterative => {
                let ilu = sparse::Ilu0::new(&self.matrix)?;
                sparse::bicgstab(
                    &self.matrix,
                    &self.rhs,
                    &ilu,
                    RESIDUAL_TOLERANCE * 0.1,
                    20_000,
                )?
            }
            SolveMethod::Auto => unreachable!(),
        };
        let residual = sparse::norm2(&self.matrix.residual(&values, &self.rhs))
            / sparse::norm2(&self.rhs).max(f64::MIN_POSITIVE);
        if residual > RESIDUAL_TOLERANCE {
            return Err(Error::ResidualTooLarge {
                residual,
                tolerance: RESIDUAL_TOLERANCE,
            });
        }
        Ok(FaceSolution {
            values,
            kappa: self.kappa.clone(),
        })
    }
}

/// Convenience pipeline: condense, assemble and solve.
pub fn solve_problem(mesh: &Mesh, spec: &ProblemSpec) -> Result<(Vec<CondensedElement>, FaceSolution)> {
    let condensed = condense_all(mesh, spec)?;
    let system = assemble_reduced(mesh, spec, &condensed)?;
    let solution = system.solve()?;
    Ok((condensed, solution))
}
