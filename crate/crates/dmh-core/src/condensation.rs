//! Element-local matrices and their static condensation.
//!
//! On a tetrahedron K the flux is expanded in the four lowest-order
//! Raviart-Thomas basis fields
//!
//! ```text
//! tau_i(x) = (x - x_i) / (3 |K|),
//! ```
//!
//! whose degrees of freedom are the outward face flux integrals; the face
//! trace of tau_i picks out exactly face i, so the coupling to the face
//! unknowns is the identity in local numbering. The scalar unknown is the
//! element value. With coefficients frozen at the barycenter the local
//! block system reads
//!
//! ```text
//! [ A  N ] [ J ]   [ -uhat ]
//! [ P  R ] [ u ] = [  g_K  ]
//! ```
//!
//! with A the flux mass matrix in the inverse stabilized diffusivity,
//! N = H - P^T the advection/divergence coupling, P = (1,1,1,1) and
//! R = r |K|. Eliminating J and u per element yields the affine flux map
//! J = L uhat + b plus a scalar recovery map, which is everything the
//! global face assembly needs.

use crate::linalg::{dot, mat3_inverse, mat3_is_spd, mat3_mul_vec, mat4_inverse, sub, Mat4, Vec3};
use crate::mesh::ElementGeometry;
use crate::problem::CoefficientSample;
use crate::quadrature::{self, bary_to_physical};
use crate::stabilization::StabTensor;
use crate::{Error, Result};

/// Relative threshold below which the condensed scalar block counts as
/// singular.
const SINGULAR_M_THRESHOLD: f64 = 1e-14;

/// The element-local matrices of the block system.
#[derive(Debug, Clone)]
pub struct LocalMatrices {
    /// Flux mass matrix (tau_i, (mu_h)^{-1} tau_j), symmetric positive
    /// definite.
    pub a: Mat4,
    /// Advection column H_j = -(tau_j, (mu_h)^{-1} v).
    pub h: [f64; 4],
    /// Divergence row; identically (1,1,1,1) in flux-integral dofs.
    pub p: [f64; 4],
    /// N = H - P^T.
    pub n: [f64; 4],
    /// Reaction block r |K|.
    pub r: f64,
    /// Source g |K|.
    pub g: f64,
    /// Face areas, local numbering.
    pub face_areas: [f64; 4],
    /// Orientation signs of the global face normals, local numbering.
    pub face_signs: [f64; 4],
}

/// The condensed affine flux map J = L uhat + b and the scalar recovery
/// u = (w · uhat + g_K) / M of one element.
#[derive(Debug, Clone)]
pub struct CondensedElement {
    pub element: usize,
    pub l: Mat4,
    pub b: [f64; 4],
    /// w = P A^{-1}; the row sums of A^{-1}.
    pub recovery: [f64; 4],
    /// M = R - P A^{-1} N.
    pub m: f64,
    /// Element source g |K|.
    pub g: f64,
}

impl CondensedElement {
    /// Outward flux integrals through the four faces for given face trace
    /// values.
    pub fn flux(&self, uhat: [f64; 4]) -> [f64; 4] {
        let mut out = self.b;
        for i in 0..4 {
            out[i] += dot4(self.l[i], uhat);
        }
        out
    }

    /// Element scalar value for given face trace values.
    pub fn scalar(&self, uhat: [f64; 4]) -> f64 {
        (dot4(self.recovery, uhat) + self.g) / self.m
    }
}

fn dot4(a: [f64; 4], b: [f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// The four Raviart-Thomas basis fields at a point.
pub fn rt0_basis(geometry: &ElementGeometry, point: Vec3) -> [Vec3; 4] {
    let scale = 1.0 / (3.0 * geometry.volume);
    let mut out = [[0.0; 3]; 4];
    for i in 0..4 {
        let d = sub(point, geometry.vertices[i]);
        out[i] = [d[0] * scale, d[1] * scale, d[2] * scale];
    }
    out
}

/// Divergence of every RT basis field; constant on the element.
pub fn rt0_divergence(geometry: &ElementGeometry) -> f64 {
    1.0 / geometry.volume
}

/// Evaluates an RT0 field from its four flux dofs.
pub fn rt0_field(geometry: &ElementGeometry, dofs: [f64; 4], point: Vec3) -> Vec3 {
    let basis = rt0_basis(geometry, point);
    let mut out = [0.0; 3];
    for i in 0..4 {
        out[0] += dofs[i] * basis[i][0];
        out[1] += dofs[i] * basis[i][1];
        out[2] += dofs[i] * basis[i][2];
    }
    out
}

/// Assembles the local matrices for one element.
///
/// The A entries are quadratic in position for a constant tensor, so the
/// interior degree-2 rule integrates them exactly; H is linear and R, g
/// are plain volume scalings of the barycenter samples.
pub fn assemble_local(
    geometry: &ElementGeometry,
    sample: &CoefficientSample,
    tensor: &StabTensor,
    face_signs: [f64; 4],
) -> Result<LocalMatrices> {
    if !mat3_is_spd(&tensor.tensor) {
        return Err(Error::NotSpd);
    }
    let inv = mat3_inverse(&tensor.tensor).ok_or(Error::NotSpd)?;
    let rule = quadrature::degree2();

    let mut a = [[0.0; 4]; 4];
    let mut h = [0.0; 4];
    for (bary, w) in rule.points.iter().zip(&rule.weights) {
        let x = bary_to_physical(&geometry.vertices, *bary);
        let basis = rt0_basis(geometry, x);
        let mapped: [Vec3; 4] = [
            mat3_mul_vec(&inv, basis[0]),
            mat3_mul_vec(&inv, basis[1]),
            mat3_mul_vec(&inv, basis[2]),
            mat3_mul_vec(&inv, basis[3]),
        ];
        let scaled = w * geometry.volume;
        for i in 0..4 {
            for j in i..4 {
                a[i][j] += scaled * dot(basis[i], mapped[j]);
            }
            h[i] -= scaled * dot(basis[i], mat3_mul_vec(&inv, sample.velocity));
        }
    }
    for i in 0..4 {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }

    let p = [1.0; 4];
    let mut n = h;
    for i in 0..4 {
        n[i] -= p[i];
    }
    Ok(LocalMatrices {
        a,
        h,
        p,
        n,
        r: sample.reaction * geometry.volume,
        g: sample.source * geometry.volume,
        face_areas: geometry.face_areas,
        face_signs,
    })
}

/// Static condensation of one element.
///
/// Solving the first block row for J and inserting into the second gives
/// the scalar factor M = R - P A^{-1} N; back substitution produces
///
/// ```text
/// L = -A^{-1} (N M^{-1} P A^{-1} + I),    b = -A^{-1} N M^{-1} g_K,
/// u = M^{-1} (P A^{-1} uhat + g_K).
/// ```
pub fn condense(element: usize, local: &LocalMatrices) -> Result<CondensedElement> {
    let a_inv = mat4_inverse(&local.a).ok_or(Error::SingularElement {
        element,
        m: 0.0,
    })?;
    // w = P A^{-1} reduces to the column sums of A^{-1} because P = 1^T.
    let mut w = [0.0; 4];
    for row in &a_inv {
        for (wj, &entry) in w.iter_mut().zip(row) {
            *wj += entry;
        }
    }
    let m = local.r - dot4(w, local.n);
    if m == 0.0 || m.abs() < SINGULAR_M_THRESHOLD * local.r.abs() {
        return Err(Error::SingularElement { element, m });
    }
    // an = A^{-1} N
    let mut an = [0.0; 4];
    for i in 0..4 {
        an[i] = dot4(a_inv[i], local.n);
    }
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            l[i][j] = -(an[i] * w[j] / m + a_inv[i][j]);
        }
    }
    let mut b = [0.0; 4];
    for i in 0..4 {
        b[i] = -an[i] * local.g / m;
    }
    Ok(CondensedElement {
        element,
        l,
        b,
        recovery: w,
        m,
        g: local.g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{add, norm, scale};
    use crate::mesh::opposite_face;
    use crate::problem::StabilizationMode;
    use crate::stabilization::stabilized_tensor;

    fn reference_geometry() -> ElementGeometry {
        ElementGeometry::from_vertices([
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
    }

    fn identity_tensor(mu: f64) -> StabTensor {
        stabilized_tensor(mu, [0.0; 3], 0.0, StabilizationMode::None).unwrap()
    }

    fn sample(mu: f64, r: f64, g: f64, v: Vec3) -> CoefficientSample {
        CoefficientSample {
            mu,
            reaction: r,
            source: g,
            velocity: v,
        }
    }

    /// Pseudo-random stream for reproducible draws.
    struct Rng(u64);
    impl Rng {
        fn next(&mut self) -> f64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }
        fn range(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.next()
        }
    }

    fn random_tet(rng: &mut Rng) -> ElementGeometry {
        loop {
            let mut v = [[0.0; 3]; 4];
            for vertex in v.iter_mut() {
                for c in vertex.iter_mut() {
                    *c = rng.range(-1.0, 1.0);
                }
            }
            let vol = {
                let a = sub(v[1], v[0]);
                let b = sub(v[2], v[0]);
                let c = sub(v[3], v[0]);
                dot(a, crate::linalg::cross(b, c)) / 6.0
            };
            if vol < -0.02 {
                v.swap(2, 3);
                return ElementGeometry::from_vertices(v);
            }
            if vol > 0.02 {
                return ElementGeometry::from_vertices(v);
            }
        }
    }

    #[test]
    fn basis_value_at_a_vertex() {
        let geo = reference_geometry();
        // tau_0 at (1,0,0): (x - x_0) / (3 |K|) = (1,0,0) / (1/2) = (2,0,0).
        let tau = rt0_basis(&geo, [1.0, 0.0, 0.0]);
        assert!((tau[0][0] - 2.0).abs() < 1e-14);
        assert!(tau[0][1].abs() < 1e-14 && tau[0][2].abs() < 1e-14);
    }

    #[test]
    fn basis_divergence_is_inverse_volume() {
        let mut rng = Rng(7);
        for _ in 0..10 {
            let geo = random_tet(&mut rng);
            assert!((rt0_divergence(&geo) - 1.0 / geo.volume).abs() < 1e-10);
            // Finite-difference divergence of each basis field.
            let h = 1e-6;
            let x = geo.barycenter;
            for i in 0..4 {
                let mut div = 0.0;
                for axis in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[axis] += h;
                    xm[axis] -= h;
                    div += (rt0_basis(&geo, xp)[i][axis] - rt0_basis(&geo, xm)[i][axis])
                        / (2.0 * h);
                }
                assert!((div - 1.0 / geo.volume).abs() < 1e-4 / geo.volume);
            }
        }
    }

    #[test]
    fn face_flux_duality_on_a_random_tet() {
        // Integrate tau_i · n_j over face j with the edge-midpoint rule,
        // exact for the linear integrand: expect the Kronecker delta.
        let mut rng = Rng(42);
        for _ in 0..5 {
            let geo = random_tet(&mut rng);
            for j in 0..4 {
                let [a, b, c] = opposite_face(j);
                let pa = geo.vertices[a];
                let pb = geo.vertices[b];
                let pc = geo.vertices[c];
                let mids = [
                    scale(add(pa, pb), 0.5),
                    scale(add(pb, pc), 0.5),
                    scale(add(pa, pc), 0.5),
                ];
                for i in 0..4 {
                    let mut integral = 0.0;
                    for mid in mids {
                        let tau = rt0_basis(&geo, mid)[i];
                        integral += dot(tau, geo.normals[j]) / 3.0;
                    }
                    integral *= geo.face_areas[j];
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (integral - expect).abs() < 1e-12,
                        "i={i} j={j}: {integral}"
                    );
                }
            }
        }
    }

    #[test]
    fn identity_tensor_gram_matrix_is_spd_and_symmetric() {
        let geo = reference_geometry();
        let local = assemble_local(
            &geo,
            &sample(1.0, 1.0, 1.0, [0.0; 3]),
            &identity_tensor(1.0),
            [1.0; 4],
        )
        .unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(local.a[i][j], local.a[j][i]);
            }
        }
        // Positive definiteness via random quadratic forms.
        let mut rng = Rng(3);
        for _ in 0..20 {
            let z = [
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ];
            let mut q = 0.0;
            for i in 0..4 {
                q += z[i] * dot4(local.a[i], z);
            }
            if z.iter().any(|&x| x.abs() > 1e-3) {
                assert!(q > 0.0);
            }
        }
        assert_eq!(local.p, [1.0; 4]);
    }

    #[test]
    fn zero_velocity_makes_n_minus_ones() {
        let geo = reference_geometry();
        let local = assemble_local(
            &geo,
            &sample(1.0, 1.0, 1.0, [0.0; 3]),
            &identity_tensor(1.0),
            [1.0; 4],
        )
        .unwrap();
        assert_eq!(local.h, [0.0; 4]);
        assert_eq!(local.n, [-1.0; 4]);
    }

    #[test]
    fn local_integrals_match_a_high_order_quadrature() {
        // Independent reference: the collapsed Gauss rule with 512 points.
        let geo = reference_geometry();
        let local = assemble_local(
            &geo,
            &sample(1.0, 1.0, 1.0, [0.0; 3]),
            &identity_tensor(1.0),
            [1.0; 4],
        )
        .unwrap();
        let oracle = quadrature::collapsed_gauss(8);
        for i in 0..4 {
            for j in 0..4 {
                let want = oracle.integrate(&geo.vertices, geo.volume, |x| {
                    let basis = rt0_basis(&geo, x);
                    dot(basis[i], basis[j])
                });
                assert!(
                    (local.a[i][j] - want).abs() < 1e-12,
                    "A[{i}][{j}]: {} vs {want}",
                    local.a[i][j]
                );
            }
        }
        let want_r = oracle.integrate(&geo.vertices, geo.volume, |_| 1.0);
        assert!((local.r - want_r).abs() < 1e-12);
    }

    #[test]
    fn advection_column_matches_high_order_quadrature() {
        let mut rng = Rng(11);
        let geo = random_tet(&mut rng);
        let v = [0.3, -0.7, 1.1];
        let tensor = stabilized_tensor(0.5, v, 1.7, StabilizationMode::Sg).unwrap();
        let local = assemble_local(&geo, &sample(0.5, 1.0, 1.0, v), &tensor, [1.0; 4]).unwrap();
        let inv = mat3_inverse(&tensor.tensor).unwrap();
        let oracle = quadrature::collapsed_gauss(8);
        for j in 0..4 {
            let want = -oracle.integrate(&geo.vertices, geo.volume, |x| {
                let basis = rt0_basis(&geo, x);
                dot(basis[j], mat3_mul_vec(&inv, v))
            });
            assert!((local.h[j] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn non_spd_tensor_is_rejected() {
        let geo = reference_geometry();
        let mut tensor = identity_tensor(1.0);
        tensor.tensor[1][1] = -1.0;
        let got = assemble_local(&geo, &sample(1.0, 1.0, 1.0, [0.0; 3]), &tensor, [1.0; 4]);
        assert!(matches!(got, Err(Error::NotSpd)));
    }

    #[test]
    fn zero_data_condenses_to_zero_fields() {
        let geo = reference_geometry();
        let local = assemble_local(
            &geo,
            &sample(1.0, 1.0, 0.0, [0.0; 3]),
            &identity_tensor(1.0),
            [1.0; 4],
        )
        .unwrap();
        let cond = condense(0, &local).unwrap();
        let flux = cond.flux([0.0; 4]);
        assert!(flux.iter().all(|&f| f.abs() < 1e-14));
        assert!(cond.scalar([0.0; 4]).abs() < 1e-14);
    }

    #[test]
    fn constant_trace_pure_diffusion_recovers_the_constant() {
        // Pure diffusion (v = 0, r = 0, g = 0) with uhat = c on all
        // faces is an equilibrium: no flux and u = c.
        let geo = reference_geometry();
        let local = assemble_local(
            &geo,
            &sample(2.0, 0.0, 0.0, [0.0; 3]),
            &identity_tensor(2.0),
            [1.0; 4],
        )
        .unwrap();
        let cond = condense(0, &local).unwrap();
        let c = 0.8;
        let flux = cond.flux([c; 4]);
        let u = cond.scalar([c; 4]);
        let (flux_ref, u_ref) = solve_local_block(&local, [c; 4]);
        for i in 0..4 {
            assert!((flux[i] - flux_ref[i]).abs() < 1e-12);
            assert!(flux[i].abs() < 1e-12, "flux {i} = {}", flux[i]);
        }
        assert!((u - u_ref).abs() < 1e-12);
        assert!((u - c).abs() < 1e-12, "u = {u}");
    }

    #[test]
    fn constant_trace_with_reaction_balances_the_flux_divergence() {
        // With r > 0 the recovered scalar satisfies r|K| u = -sum(flux):
        // reaction losses are fed by inflow through the faces.
        let geo = reference_geometry();
        let local = assemble_local(
            &geo,
            &sample(2.0, 3.0, 0.0, [0.0; 3]),
            &identity_tensor(2.0),
            [1.0; 4],
        )
        .unwrap();
        let cond = condense(0, &local).unwrap();
        let c = 0.8;
        let flux = cond.flux([c; 4]);
        let u = cond.scalar([c; 4]);
        let total_flux: f64 = flux.iter().sum();
        assert!((local.r * u + total_flux).abs() < 1e-12);
        assert!(u > 0.0 && u < c);
    }

    /// Dense solve of the uncondensed 5x5 local system
    /// [A N; P R] (J, u) = (-uhat, g); the oracle for the condensed maps.
    fn solve_local_block(local: &LocalMatrices, uhat: [f64; 4]) -> ([f64; 4], f64) {
        let mut a = vec![vec![0.0; 5]; 5];
        let mut b = vec![0.0; 5];
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] = local.a[i][j];
            }
            a[i][4] = local.n[i];
            b[i] = -uhat[i];
            a[4][i] = local.p[i];
        }
        a[4][4] = local.r;
        b[4] = local.g;
        crate::linalg::solve_dense(&mut a, &mut b).unwrap();
        ([b[0], b[1], b[2], b[3]], b[4])
    }

    #[test]
    fn condensed_maps_match_the_direct_local_solve() {
        let mut rng = Rng(2024);
        let mut worst: f64 = 0.0;
        for trial in 0..1000 {
            let geo = random_tet(&mut rng);
            let mu = rng.range(0.05, 3.0);
            let r = rng.range(0.05, 3.0);
            let g = rng.range(-2.0, 2.0);
            let v = [
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ];
            let mode = match trial % 3 {
                0 => StabilizationMode::None,
                1 => StabilizationMode::Sg,
                _ => StabilizationMode::Upwind,
            };
            let pe = crate::stabilization::local_peclet(&geo, v, mu);
            let tensor = stabilized_tensor(mu, v, pe, mode).unwrap();
            let local =
                assemble_local(&geo, &sample(mu, r, g, v), &tensor, [1.0; 4]).unwrap();
            let cond = condense(trial, &local).unwrap();
            let uhat = [
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ];
            let (flux_ref, u_ref) = solve_local_block(&local, uhat);
            let flux = cond.flux(uhat);
            let u = cond.scalar(uhat);
            assert!(cond.m > 0.0, "M must stay positive for coercive data");
            let scale_flux = norm([flux_ref[0], flux_ref[1], flux_ref[2]])
                .max(flux_ref[3].abs())
                .max(1.0);
            for i in 0..4 {
                worst = worst.max((flux[i] - flux_ref[i]).abs() / scale_flux);
            }
            worst = worst.max((u - u_ref).abs() / u_ref.abs().max(1.0));
        }
        assert!(worst < 1e-10, "worst relative deviation {worst}");
    }

    #[test]
    fn flux_map_is_affine() {
        let geo = reference_geometry();
        let v = [0.2, 0.1, 0.9];
        let tensor = stabilized_tensor(1.0, v, 0.45, StabilizationMode::Sg).unwrap();
        let local = assemble_local(&geo, &sample(1.0, 1.0, 1.0, v), &tensor, [1.0; 4]).unwrap();
        let cond = condense(0, &local).unwrap();
        let uhat = [0.3, -0.2, 0.7, 0.1];
        let alpha = 3.5;
        let fl = cond.flux(uhat);
        let fl_scaled = cond.flux(uhat.map(|x| alpha * x));
        for i in 0..4 {
            let linear_part = fl[i] - cond.b[i];
            assert!((fl_scaled[i] - cond.b[i] - alpha * linear_part).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_diffusion_contribution_is_symmetric() {
        let mut rng = Rng(5);
        let geo = random_tet(&mut rng);
        let local = assemble_local(
            &geo,
            &sample(1.3, 0.7, 0.0, [0.0; 3]),
            &identity_tensor(1.3),
            [1.0; 4],
        )
        .unwrap();
        let cond = condense(0, &local).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (cond.l[i][j] - cond.l[j][i]).abs() < 1e-12,
                    "L[{i}][{j}] asymmetric"
                );
            }
        }
    }
}
