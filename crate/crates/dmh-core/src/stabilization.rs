//! Streamline artificial diffusion.
//!
//! Advection dominance is measured per element by the local Peclet number
//!
//! ```text
//! Pe_K = max_i |v_K · e_i| / (2 mu),    i over the six edges of K,
//! ```
//!
//! and countered by augmenting the scalar diffusivity with a rank-one
//! correction acting only along the streamline direction b = v/|v|:
//!
//! ```text
//! mu_h = mu I + mu Phi(Pe_K) b b^T.
//! ```
//!
//! Two stabilization functions are supported: the exponential-fitting
//! choice Phi(X) = X - 1 + Be(2X) with Be(t) = t/(e^t - 1), whose added
//! diffusion is O(h^2), and the plain upwind choice Phi(X) = X, which is
//! O(h). The spectrum of the modified tensor is {mu, mu, mu (1 + Phi)}
//! with the large eigenvalue attached to the streamline direction.

use crate::linalg::{dot, norm, Mat3, Vec3};
use crate::mesh::ElementGeometry;
use crate::problem::StabilizationMode;
use crate::{Error, Result};

/// Velocities below this magnitude are treated as zero; the streamline
/// direction is undefined there and no stabilization is needed.
const VELOCITY_FLOOR: f64 = 1e-14;

/// Switch point between the Taylor expansion and the direct formula for
/// the Bernoulli-type function, guarding against cancellation in e^t - 1.
const BERNOULLI_SERIES_THRESHOLD: f64 = 1e-4;

/// The stabilized diffusion tensor of one element.
#[derive(Debug, Clone, Copy)]
pub struct StabTensor {
    /// The 3x3 symmetric tensor mu I + mu Phi(Pe) b b^T.
    pub tensor: Mat3,
    /// Base scalar diffusivity.
    pub mu: f64,
    /// Local Peclet number used to build the tensor.
    pub peclet: f64,
    /// Streamline unit vector; zero when the advection velocity vanishes.
    pub streamline: Vec3,
}

/// Be(t) = t / (e^t - 1), continuously extended with Be(0) = 1.
///
/// A Taylor branch handles small |t|, where the direct formula cancels
/// catastrophically; the direct branch uses exp_m1 and decays cleanly to
/// zero for large positive t and to -t for large negative t.
pub fn bernoulli(t: f64) -> f64 {
    if t.abs() < BERNOULLI_SERIES_THRESHOLD {
        // t/(e^t - 1) = 1 - t/2 + t^2/12 + O(t^4)
        1.0 - 0.5 * t + t * t / 12.0
    } else {
        let em1 = t.exp_m1();
        if em1.is_infinite() {
            0.0
        } else {
            t / em1
        }
    }
}

/// Stabilization function Phi.
///
/// Positive for positive arguments and vanishing at zero in both modes;
/// the `None` mode always returns zero. Negative arguments are rejected.
pub fn phi(x: f64, mode: StabilizationMode) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::NegativePeclet(x));
    }
    Ok(match mode {
        StabilizationMode::None => 0.0,
        StabilizationMode::Sg => x - 1.0 + bernoulli(2.0 * x),
        StabilizationMode::Upwind => x,
    })
}

/// Local Peclet number: the largest advection-to-diffusion ratio over the
/// element's six edge directions.
pub fn local_peclet(geometry: &ElementGeometry, velocity: Vec3, mu: f64) -> f64 {
    assert!(mu > 0.0, "diffusivity must be positive");
    geometry
        .edges
        .iter()
        .map(|e| dot(velocity, *e).abs())
        .fold(0.0, f64::max)
        / (2.0 * mu)
}

/// Builds the stabilized diffusion tensor mu I + mu Phi(Pe) b b^T.
pub fn stabilized_tensor(
    mu: f64,
    velocity: Vec3,
    peclet: f64,
    mode: StabilizationMode,
) -> Result<StabTensor> {
    if mu <= 0.0 {
        return Err(Error::InvalidCoefficient {
            name: "mu",
            value: mu,
            constraint: "mu > 0",
        });
    }
    let speed = norm(velocity);
    let mut tensor = [[0.0; 3]; 3];
    for i in 0..3 {
        tensor[i][i] = mu;
    }
    if mode == StabilizationMode::None || speed < VELOCITY_FLOOR {
        return Ok(StabTensor {
            tensor,
            mu,
            peclet,
            streamline: [0.0; 3],
        });
    }
    let b = [velocity[0] / speed, velocity[1] / speed, velocity[2] / speed];
    let correction = mu * phi(peclet, mode)?;
    for i in 0..3 {
        for j in 0..3 {
            tensor[i][j] += correction * b[i] * b[j];
        }
    }
    Ok(StabTensor {
        tensor,
        mu,
        peclet,
        streamline: b,
    })
}

/// Eigenvalues of the stabilized tensor, ascending.
///
/// Computed analytically: the streamline direction carries mu (1 + Phi),
/// the orthogonal complement carries the double eigenvalue mu. The factor
/// mu Phi is recovered from the trace, so no mode flag is needed.
pub fn tensor_spectrum(tensor: &StabTensor) -> [f64; 3] {
    if tensor.streamline == [0.0; 3] {
        return [tensor.mu; 3];
    }
    let trace = tensor.tensor[0][0] + tensor.tensor[1][1] + tensor.tensor[2][2];
    let lambda3 = trace - 2.0 * tensor.mu;
    [tensor.mu, tensor.mu, lambda3]
}
