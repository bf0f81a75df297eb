//! Model data: per-subdomain coefficients, interface data, boundary
//! conditions and the stabilization switch.
//!
//! Coefficients may be constants or closed-form functions of position; all
//! sampling happens at element barycenters (face barycenters for the
//! interface data), so coefficients act as element-wise constants in every
//! local integral. This barycenter sampling is first-order consistent and
//! keeps the lowest-order local integrals closed form.

use std::fmt;
use std::sync::Arc;

use crate::linalg::Vec3;
use crate::mesh::{ElementGeometry, Mesh, Subdomain};
use crate::{Error, Result};

/// Scalar coefficient: a constant or a function of position.
#[derive(Clone)]
pub enum Coefficient {
    Const(f64),
    Field(Arc<dyn Fn(Vec3) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn eval(&self, x: Vec3) -> f64 {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Field(f) => f(x),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Coefficient::Const(c) => Some(*c),
            Coefficient::Field(_) => None,
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Const(c) => write!(f, "Const({c})"),
            Coefficient::Field(_) => write!(f, "Field(..)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Const(c)
    }
}

/// Vector coefficient for the advection field.
#[derive(Clone)]
pub enum VectorCoefficient {
    Const(Vec3),
    Field(Arc<dyn Fn(Vec3) -> Vec3 + Send + Sync>),
}

impl VectorCoefficient {
    pub fn eval(&self, x: Vec3) -> Vec3 {
        match self {
            VectorCoefficient::Const(v) => *v,
            VectorCoefficient::Field(f) => f(x),
        }
    }

    pub fn as_const(&self) -> Option<Vec3> {
        match self {
            VectorCoefficient::Const(v) => Some(*v),
            VectorCoefficient::Field(_) => None,
        }
    }
}

impl fmt::Debug for VectorCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorCoefficient::Const(v) => write!(f, "Const({v:?})"),
            VectorCoefficient::Field(_) => write!(f, "Field(..)"),
        }
    }
}

impl From<Vec3> for VectorCoefficient {
    fn from(v: Vec3) -> Self {
        VectorCoefficient::Const(v)
    }
}

/// Coefficients of one subdomain.
#[derive(Debug, Clone)]
pub struct SubdomainCoefficients {
    /// Diffusivity, must stay positive.
    pub mu: Coefficient,
    /// Reaction rate, nonnegative.
    pub reaction: Coefficient,
    /// Volume source.
    pub source: Coefficient,
    /// Advection field.
    pub velocity: VectorCoefficient,
}

impl SubdomainCoefficients {
    pub fn constant(mu: f64, reaction: f64, source: f64, velocity: Vec3) -> Self {
        SubdomainCoefficients {
            mu: mu.into(),
            reaction: reaction.into(),
            source: source.into(),
            velocity: velocity.into(),
        }
    }
}

/// Boundary condition variants on the outer surface.
///
/// Neumann prescribes the outward normal flux density directly instead of
/// going through the degenerate Robin limit, which would require a positive
/// Robin weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    /// Prescribed outward flux density J·n.
    Neumann(f64),
    /// J·n = alpha u - beta with alpha > 0.
    Robin { alpha: f64, beta: f64 },
}

/// Boundary assignment by region of the outer surface.
#[derive(Debug, Clone, Copy)]
pub struct RegionBoundary {
    /// Faces with barycenter on z = 0.
    pub bottom: BoundaryCondition,
    /// Faces with barycenter on z = 1.
    pub top: BoundaryCondition,
    /// Everything else.
    pub lateral: BoundaryCondition,
}

impl Default for RegionBoundary {
    /// The standard verification setup: u = 0 at the bottom, u = 1 at the
    /// top, zero flux through the lateral surface.
    fn default() -> Self {
        RegionBoundary {
            bottom: BoundaryCondition::Dirichlet(0.0),
            top: BoundaryCondition::Dirichlet(1.0),
            lateral: BoundaryCondition::Neumann(0.0),
        }
    }
}

impl RegionBoundary {
    pub fn all(bc: BoundaryCondition) -> Self {
        RegionBoundary {
            bottom: bc,
            top: bc,
            lateral: bc,
        }
    }
}

/// Stabilization switch for the artificial streamline diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilizationMode {
    /// No artificial diffusion.
    None,
    /// Exponential-fitting function Phi(X) = X - 1 + Be(2X); the added
    /// diffusion decays quadratically with the mesh size.
    Sg,
    /// Phi(X) = X; first-order decay.
    Upwind,
}

/// Complete model data set.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub omega1: SubdomainCoefficients,
    pub omega2: SubdomainCoefficients,
    /// Segregation coefficient on the interface, sampled per face.
    pub kappa: Coefficient,
    /// Interface surface source, sampled per face.
    pub sigma: Coefficient,
    pub boundary: RegionBoundary,
    pub stabilization: StabilizationMode,
}

impl ProblemSpec {
    /// Uniform coefficients in both subdomains with the default boundary
    /// setup and a passive interface.
    pub fn uniform(mu: f64, reaction: f64, source: f64, velocity: Vec3) -> Self {
        let coeffs = SubdomainCoefficients::constant(mu, reaction, source, velocity);
        ProblemSpec {
            omega1: coeffs.clone(),
            omega2: coeffs,
            kappa: 1.0.into(),
            sigma: 0.0.into(),
            boundary: RegionBoundary::default(),
            stabilization: StabilizationMode::None,
        }
    }

    pub fn with_interface(mut self, kappa: f64, sigma: f64) -> Self {
        self.kappa = kappa.into();
        self.sigma = sigma.into();
        self
    }

    pub fn with_stabilization(mut self, mode: StabilizationMode) -> Self {
        self.stabilization = mode;
        self
    }

    pub fn coefficients(&self, subdomain: Subdomain) -> &SubdomainCoefficients {
        match subdomain {
            Subdomain::Omega1 => &self.omega1,
            Subdomain::Omega2 => &self.omega2,
        }
    }

    /// Segregation coefficient sampled at a face barycenter.
    pub fn kappa_at(&self, barycenter: Vec3) -> f64 {
        self.kappa.eval(barycenter)
    }

    /// Interface source sampled at a face barycenter.
    pub fn sigma_at(&self, barycenter: Vec3) -> f64 {
        self.sigma.eval(barycenter)
    }
}

/// Coefficient values frozen at an element barycenter.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientSample {
    pub mu: f64,
    pub reaction: f64,
    pub source: f64,
    pub velocity: Vec3,
}

/// Samples the coefficients of the element's subdomain at its barycenter.
pub fn sample_element(spec: &ProblemSpec, mesh: &Mesh, element_id: usize) -> CoefficientSample {
    let subdomain = mesh.elements[element_id].subdomain;
    let geometry = mesh.element_geometry(element_id);
    sample_at(spec, subdomain, &geometry)
}

/// Same as [`sample_element`] but reusing an already computed geometry.
pub fn sample_at(
    spec: &ProblemSpec,
    subdomain: Subdomain,
    geometry: &ElementGeometry,
) -> CoefficientSample {
    let coeffs = spec.coefficients(subdomain);
    let x = geometry.barycenter;
    CoefficientSample {
        mu: coeffs.mu.eval(x),
        reaction: coeffs.reaction.eval(x),
        source: coeffs.source.eval(x),
        velocity: coeffs.velocity.eval(x),
    }
}

/// Boundary condition assigned to a boundary face.
pub fn boundary_condition(
    spec: &ProblemSpec,
    mesh: &Mesh,
    face_id: usize,
) -> Result<BoundaryCondition> {
    let face = &mesh.faces[face_id];
    if !face.class.is_boundary() {
        return Err(Error::NotBoundaryFace(face_id));
    }
    let z = face.barycenter[2];
    let bc = if z.abs() < 1e-12 {
        spec.boundary.bottom
    } else if (z - 1.0).abs() < 1e-12 {
        spec.boundary.top
    } else {
        spec.boundary.lateral
    };
    if let BoundaryCondition::Robin { alpha, .. } = bc {
        if alpha <= 0.0 {
            return Err(Error::InvalidCoefficient {
                name: "alpha",
                value: alpha,
                constraint: "alpha > 0 on Robin faces",
            });
        }
    }
    Ok(bc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_cube_mesh;

    #[test]
    fn uniform_sample_reproduces_constants() {
        // mu = r = g = 1, v = e_z.
        let spec = ProblemSpec::uniform(1.0, 1.0, 1.0, [0.0, 0.0, 1.0]);
        let mesh = build_cube_mesh(2).unwrap();
        for e in 0..mesh.elements.len() {
            let s = sample_element(&spec, &mesh, e);
            assert_eq!(s.mu, 1.0);
            assert_eq!(s.reaction, 1.0);
            assert_eq!(s.source, 1.0);
            assert_eq!(s.velocity, [0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn per_subdomain_diffusivity() {
        let mut spec = ProblemSpec::uniform(1.0, 1.0, 1.0, [0.0, 0.0, 1.0]);
        spec.omega2.mu = 0.0325.into();
        let mesh = build_cube_mesh(2).unwrap();
        for (e, element) in mesh.elements.iter().enumerate() {
            let s = sample_element(&spec, &mesh, e);
            match element.subdomain {
                Subdomain::Omega1 => assert_eq!(s.mu, 1.0),
                Subdomain::Omega2 => assert_eq!(s.mu, 0.0325),
            }
        }
    }

    #[test]
    fn zero_velocity_samples_zero() {
        let spec = ProblemSpec::uniform(1.0, 0.5, 0.0, [0.0, 0.0, 0.0]);
        let mesh = build_cube_mesh(2).unwrap();
        let s = sample_element(&spec, &mesh, 0);
        assert_eq!(s.velocity, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn field_coefficients_sample_the_barycenter() {
        let mut spec = ProblemSpec::uniform(1.0, 1.0, 1.0, [0.0, 0.0, 0.0]);
        spec.omega1.source = Coefficient::Field(Arc::new(|x| x[0] + 2.0 * x[2]));
        spec.omega2.source = spec.omega1.source.clone();
        let mesh = build_cube_mesh(2).unwrap();
        for e in 0..mesh.elements.len() {
            let geometry = mesh.element_geometry(e);
            let s = sample_element(&spec, &mesh, e);
            let b = geometry.barycenter;
            assert!((s.source - (b[0] + 2.0 * b[2])).abs() < 1e-15);
        }
    }

    #[test]
    fn default_boundary_assignment() {
        let spec = ProblemSpec::uniform(1.0, 1.0, 1.0, [0.0, 0.0, 1.0]);
        let mesh = build_cube_mesh(2).unwrap();
        for (fid, face) in mesh.faces.iter().enumerate() {
            if !face.class.is_boundary() {
                assert!(boundary_condition(&spec, &mesh, fid).is_err());
                continue;
            }
            let bc = boundary_condition(&spec, &mesh, fid).unwrap();
            let z = face.barycenter[2];
            if z.abs() < 1e-12 {
                assert_eq!(bc, BoundaryCondition::Dirichlet(0.0));
            } else if (z - 1.0).abs() < 1e-12 {
                assert_eq!(bc, BoundaryCondition::Dirichlet(1.0));
            } else {
                assert_eq!(bc, BoundaryCondition::Neumann(0.0));
            }
        }
    }

    #[test]
    fn robin_with_nonpositive_weight_is_rejected() {
        let mut spec = ProblemSpec::uniform(1.0, 1.0, 1.0, [0.0, 0.0, 1.0]);
        spec.boundary.lateral = BoundaryCondition::Robin {
            alpha: 0.0,
            beta: 1.0,
        };
        let mesh = build_cube_mesh(2).unwrap();
        let lateral = mesh
            .faces
            .iter()
            .position(|f| {
                f.class.is_boundary()
                    && f.barycenter[2].abs() > 1e-12
                    && (f.barycenter[2] - 1.0).abs() > 1e-12
            })
            .unwrap();
        assert!(boundary_condition(&spec, &mesh, lateral).is_err());
    }

    #[test]
    fn sampling_is_pure() {
        let spec = ProblemSpec::uniform(2.0, 0.25, -1.0, [0.5, 0.0, 1.0]);
        let mesh = build_cube_mesh(2).unwrap();
        for e in [0, 7, 23] {
            let a = sample_element(&spec, &mesh, e);
            let b = sample_element(&spec, &mesh, e);
            assert_eq!(a.mu, b.mu);
            assert_eq!(a.reaction, b.reaction);
            assert_eq!(a.source, b.source);
            assert_eq!(a.velocity, b.velocity);
        }
    }
}
