//! Continuity and coercivity constants of the underlying generalized
//! saddle-point theory, and the smallness condition that guarantees
//! solvability.
//!
//! The constants are plain arithmetic in the coefficient bounds:
//!
//! ```text
//! M_a = (1 + |v|_inf) / mu_min + |r|_inf + 2,    M_b = 1,
//! M_c = max(kappa, |alpha|_inf),
//! c1  = 1/mu_max - |v|_inf / (2 mu_min),         k_a = min(c0, c1),
//! k_b = 1 / C*,
//! delta = M_a (1 + M_a / k_a) M_c / k_b^2 < 1.
//! ```
//!
//! The source theory states two different formulas for c0 — the lemma
//! uses min(1/mu_max, r_min) while its proof uses
//! r_min - |v|_inf/(2 mu_min) — so both are computed and reported, and
//! every quantity depending on c0 is evaluated for both candidates. The
//! trace constant C* is a caller input (default 1); no attempt is made to
//! estimate it from the mesh.
//!
//! The analysis behind these constants assumes Robin boundary data with a
//! positive weight and a constant segregation coefficient. The solver
//! also accepts Dirichlet and Neumann data, which sit outside the scope
//! of the checker; the constants are still evaluated from whatever Robin
//! weights appear in the boundary map.

use crate::problem::{BoundaryCondition, Coefficient, ProblemSpec, VectorCoefficient};
use crate::{Error, Result};
use std::fmt;

/// Grid used to bound non-constant coefficients by sampling.
const SAMPLING_GRID: usize = 24;

/// Coefficient bounds entering the constants. Constant coefficients give
/// exact bounds; closed-form fields are bounded by lattice sampling.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientBounds {
    pub mu_min: f64,
    pub mu_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub v_inf: f64,
    pub kappa_max: f64,
    pub alpha_inf: f64,
}

fn scalar_range(c: &Coefficient, z_lo: f64, z_hi: f64) -> (f64, f64) {
    match c {
        Coefficient::Const(v) => (*v, *v),
        Coefficient::Field(f) => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let m = SAMPLING_GRID;
            for i in 0..=m {
                for j in 0..=m {
                    for k in 0..=m {
                        let x = [
                            i as f64 / m as f64,
                            j as f64 / m as f64,
                            z_lo + (z_hi - z_lo) * k as f64 / m as f64,
                        ];
                        let v = f(x);
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
            }
            (lo, hi)
        }
    }
}

fn velocity_sup(c: &VectorCoefficient, z_lo: f64, z_hi: f64) -> f64 {
    match c {
        VectorCoefficient::Const(v) => crate::linalg::norm(*v),
        VectorCoefficient::Field(f) => {
            let mut hi = 0.0f64;
            let m = SAMPLING_GRID;
            for i in 0..=m {
                for j in 0..=m {
                    for k in 0..=m {
                        let x = [
                            i as f64 / m as f64,
                            j as f64 / m as f64,
                            z_lo + (z_hi - z_lo) * k as f64 / m as f64,
                        ];
                        hi = hi.max(crate::linalg::norm(f(x)));
                    }
                }
            }
            hi
        }
    }
}

/// Extracts the coefficient bounds of a problem.
pub fn coefficient_bounds(spec: &ProblemSpec) -> Result<CoefficientBounds> {
    let (mu1_lo, mu1_hi) = scalar_range(&spec.omega1.mu, 0.0, 0.5);
    let (mu2_lo, mu2_hi) = scalar_range(&spec.omega2.mu, 0.5, 1.0);
    let (r1_lo, r1_hi) = scalar_range(&spec.omega1.reaction, 0.0, 0.5);
    let (r2_lo, r2_hi) = scalar_range(&spec.omega2.reaction, 0.5, 1.0);
    let mu_min = mu1_lo.min(mu2_lo);
    if mu_min <= 0.0 {
        return Err(Error::InvalidCoefficient {
            name: "mu",
            value: mu_min,
            constraint: "mu_min > 0",
        });
    }
    let v_inf = velocity_sup(&spec.omega1.velocity, 0.0, 0.5)
        .max(velocity_sup(&spec.omega2.velocity, 0.5, 1.0));
    let (_, kappa_max) = scalar_range(&spec.kappa, 0.5, 0.5);
    let alpha_inf = [
        spec.boundary.bottom,
        spec.boundary.top,
        spec.boundary.lateral,
    ]
    .iter()
    .filter_map(|bc| match bc {
        BoundaryCondition::Robin { alpha, .. } => Some(*alpha),
        _ => None,
    })
    .fold(0.0f64, f64::max);
    Ok(CoefficientBounds {
        mu_min,
        mu_max: mu1_hi.max(mu2_hi),
        r_min: r1_lo.min(r2_lo),
        r_max: r1_hi.max(r2_hi),
        v_inf,
        kappa_max,
        alpha_inf,
    })
}

/// Continuity constants (M_a, M_b, M_c).
pub fn continuity_constants(spec: &ProblemSpec) -> Result<(f64, f64, f64)> {
    let b = coefficient_bounds(spec)?;
    let m_a = (1.0 + b.v_inf) / b.mu_min + b.r_max + 2.0;
    let m_c = b.kappa_max.max(b.alpha_inf);
    Ok((m_a, 1.0, m_c))
}

/// Coercivity constants, carrying both published definitions of c0.
#[derive(Debug, Clone, Copy)]
pub struct CoercivityConstants {
    /// c0 as stated next to the advection bound: min(1/mu_max, r_min).
    pub c0_statement: f64,
    /// c0 as used in the proof: r_min - |v|_inf / (2 mu_min).
    pub c0_proof: f64,
    /// c1 = 1/mu_max - |v|_inf / (2 mu_min).
    pub c1: f64,
    /// k_a = min(c0_proof, c1); nonpositive values flag lost coercivity.
    pub k_a: f64,
}

pub fn coercivity_constants(spec: &ProblemSpec) -> Result<CoercivityConstants> {
    let b = coefficient_bounds(spec)?;
    let drift = b.v_inf / (2.0 * b.mu_min);
    let c0_statement = (1.0 / b.mu_max).min(b.r_min);
    let c0_proof = b.r_min - drift;
    let c1 = 1.0 / b.mu_max - drift;
    Ok(CoercivityConstants {
        c0_statement,
        c0_proof,
        c1,
        k_a: c0_proof.min(c1),
    })
}

/// Full report of the solvability conditions for a given trace constant.
#[derive(Debug, Clone, Copy)]
pub struct WellposednessReport {
    pub bounds: CoefficientBounds,
    pub m_a: f64,
    pub m_b: f64,
    pub m_c: f64,
    pub coercivity: CoercivityConstants,
    pub trace_constant: f64,
    /// k_b = 1 / C*.
    pub k_b: f64,
    /// The continuity factor of the interface bound, evaluated with each
    /// c0 candidate (infinite when the denominator closes).
    pub m_cal_statement: f64,
    pub m_cal_proof: f64,
    /// delta = M_a (1 + M_a/k_a) M_c / k_b^2, with k_a from the proof
    /// constants; infinite when coercivity is lost.
    pub delta: f64,
    /// |v|_inf < 2 mu_min c0 with the statement c0.
    pub advection_bound_holds: bool,
    /// c0_proof > 0 and c1 > 0.
    pub coercive: bool,
    /// max(kappa, |alpha|_inf) < 1 / (C* M_cal), per c0 candidate.
    pub interface_bound_statement: bool,
    pub interface_bound_proof: bool,
    /// delta < 1.
    pub smallness_holds: bool,
}

fn m_cal(m_a: f64, bounds: &CoefficientBounds, c0: f64) -> f64 {
    let drift = bounds.v_inf / (2.0 * bounds.mu_min);
    let denominator = c0 - drift;
    if denominator <= 0.0 {
        return f64::INFINITY;
    }
    let numerator = c0 + 2.0 + bounds.r_max + 1.0 / bounds.mu_min + drift;
    m_a * numerator / denominator
}

/// Evaluates all constants and conditions for trace constant `c_star`.
pub fn smallness(spec: &ProblemSpec, c_star: f64) -> Result<WellposednessReport> {
    if c_star <= 0.0 {
        return Err(Error::InvalidTraceConstant(c_star));
    }
    let bounds = coefficient_bounds(spec)?;
    let (m_a, m_b, m_c) = continuity_constants(spec)?;
    let coercivity = coercivity_constants(spec)?;
    let k_b = 1.0 / c_star;
    let m_cal_statement = m_cal(m_a, &bounds, coercivity.c0_statement);
    let m_cal_proof = m_cal(m_a, &bounds, coercivity.c0_proof);
    let delta = if coercivity.k_a > 0.0 {
        m_a * (1.0 + m_a / coercivity.k_a) * m_c / (k_b * k_b)
    } else {
        f64::INFINITY
    };
    Ok(WellposednessReport {
        bounds,
        m_a,
        m_b,
        m_c,
        coercivity,
        trace_constant: c_star,
        k_b,
        m_cal_statement,
        m_cal_proof,
        delta,
        advection_bound_holds: bounds.v_inf < 2.0 * bounds.mu_min * coercivity.c0_statement,
        coercive: coercivity.c0_proof > 0.0 && coercivity.c1 > 0.0,
        interface_bound_statement: m_c < 1.0 / (c_star * m_cal_statement),
        interface_bound_proof: m_c < 1.0 / (c_star * m_cal_proof),
        smallness_holds: delta < 1.0,
    })
}

impl fmt::Display for WellposednessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mu_min                    = {:.6e}", self.bounds.mu_min)?;
        writeln!(f, "mu_max                    = {:.6e}", self.bounds.mu_max)?;
        writeln!(f, "r_min                     = {:.6e}", self.bounds.r_min)?;
        writeln!(f, "r_max                     = {:.6e}", self.bounds.r_max)?;
        writeln!(f, "v_inf                     = {:.6e}", self.bounds.v_inf)?;
        writeln!(f, "kappa_max                 = {:.6e}", self.bounds.kappa_max)?;
        writeln!(f, "alpha_inf                 = {:.6e}", self.bounds.alpha_inf)?;
        writeln!(f, "M_a                       = {:.6e}", self.m_a)?;
        writeln!(f, "M_b                       = {:.6e}", self.m_b)?;
        writeln!(f, "M_c                       = {:.6e}", self.m_c)?;
        writeln!(
            f,
            "c0 (statement)            = {:.6e}",
            self.coercivity.c0_statement
        )?;
        writeln!(
            f,
            "c0 (proof)                = {:.6e}",
            self.coercivity.c0_proof
        )?;
        writeln!(f, "c1                        = {:.6e}", self.coercivity.c1)?;
        writeln!(f, "k_a                       = {:.6e}", self.coercivity.k_a)?;
        writeln!(f, "k_b                       = {:.6e}", self.k_b)?;
        writeln!(f, "trace constant C*         = {:.6e}", self.trace_constant)?;
        writeln!(f, "M_cal (statement c0)      = {:.6e}", self.m_cal_statement)?;
        writeln!(f, "M_cal (proof c0)          = {:.6e}", self.m_cal_proof)?;
        writeln!(f, "delta                     = {:.6e}", self.delta)?;
        writeln!(f, "advection bound holds     = {}", self.advection_bound_holds)?;
        writeln!(f, "coercive                  = {}", self.coercive)?;
        writeln!(
            f,
            "interface bound (stmt c0) = {}",
            self.interface_bound_statement
        )?;
        writeln!(
            f,
            "interface bound (proof c0)= {}",
            self.interface_bound_proof
        )?;
        writeln!(f, "smallness delta < 1       = {}", self.smallness_holds)?;
        write!(
            f,
            "note: the source analysis defines c0 twice; both variants are reported"
        )
    }
}
