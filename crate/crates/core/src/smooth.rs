//! Smooth step functions with flat ends, used for partitions of unity and
//! for the reparameterisations inside the join homotopies.

use crate::error::{Error, Result};

/// `exp(-1/t)` for `t > 0`, identically `0` otherwise.  All derivatives
/// vanish at `t = 0`, which is what makes the glued pieces smooth.
pub fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Monotone smooth step: `0` for `tau <= eps`, `1` for `tau >= 1 - eps`.
///
/// Defined as `psi(tau - eps) / (psi(tau - eps) + psi(1 - eps - tau))`.
/// Requires `0 < eps < 1/2` so the denominator never vanishes.
pub fn bump(tau: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "bump eps must lie in (0, 1/2), got {eps}"
        )));
    }
    // `!(tau > eps)` also catches NaN and the -inf produced by log-scaled radii.
    if !(tau > eps) {
        return Ok(0.0);
    }
    if tau >= 1.0 - eps {
        return Ok(1.0);
    }
    let up = psi(tau - eps);
    let down = psi(1.0 - eps - tau);
    Ok(up / (up + down))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_ends_and_midpoint() {
        assert_eq!(bump(0.0, 0.1).unwrap(), 0.0);
        assert_eq!(bump(1.0, 0.1).unwrap(), 1.0);
        assert_eq!(bump(-3.0, 0.1).unwrap(), 0.0);
        assert_eq!(bump(7.0, 0.1).unwrap(), 1.0);
        assert!((bump(0.5, 0.1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn monotone_on_grid() {
        let mut prev = -1.0;
        for k in 0..=10_000 {
            let tau = k as f64 / 10_000.0;
            let b = bump(tau, 0.1).unwrap();
            assert!(b >= prev, "bump not monotone at tau={tau}");
            prev = b;
        }
    }

    #[test]
    fn eps_out_of_range() {
        assert!(bump(0.5, 0.0).is_err());
        assert!(bump(0.5, 0.5).is_err());
    }
}
