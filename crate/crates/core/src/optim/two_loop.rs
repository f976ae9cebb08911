//! Limited-memory inverse-Hessian application via the two-loop recursion.

use crate::error::{Error, Result};
use crate::numkit::{dot, ParamVector};
use crate::optim::buffers::CurvatureBuffer;

/// Computes the quasi-Newton direction `g = -H * grad`, where `H` is the
/// limited-memory BFGS operator built from the buffered pairs over the
/// positive diagonal seed `h0`. With an empty buffer this degenerates to
/// `-h0 .* grad`.
///
/// Pairs are folded newest-first in the backward loop and oldest-first in
/// the forward loop, with the standard `eta += (sigma_i - beta) * s_i`
/// correction, which reproduces the dense rank-two update applied in buffer
/// order.
pub fn two_loop_direction(
    grad: &ParamVector,
    buf: &CurvatureBuffer,
    h0: &ParamVector,
) -> Result<ParamVector> {
    let tau = buf.len();
    let mut q = grad.clone();
    let mut rhos = vec![0.0; tau];
    let mut sigmas = vec![0.0; tau];

    // Backward pass, newest pair first.
    for (idx, pair) in buf.iter().enumerate().rev() {
        let sty = dot(&pair.s, &pair.y)?;
        if sty <= 0.0 {
            return Err(Error::Internal(format!(
                "two-loop met a pair with s'y = {sty}; buffer admission should prevent this"
            )));
        }
        let rho = 1.0 / sty;
        let sigma = rho * dot(&pair.s, &q)?;
        q.add_scaled(-sigma, &pair.y)?;
        rhos[idx] = rho;
        sigmas[idx] = sigma;
    }

    // Apply the diagonal seed.
    let mut eta = q;
    for (e, h) in eta.as_mut_slice().iter_mut().zip(h0.iter()) {
        *e *= h;
    }

    // Forward pass, oldest pair first.
    for (idx, pair) in buf.iter().enumerate() {
        let beta = rhos[idx] * dot(&pair.y, &eta)?;
        eta.add_scaled(sigmas[idx] - beta, &pair.s)?;
    }

    eta.scale(-1.0);
    Ok(eta)
}
