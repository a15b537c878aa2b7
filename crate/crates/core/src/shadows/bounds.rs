//! Closed-form sample-complexity calculators. Logarithms are natural and the
//! results are integer ceilings of the formula values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedScheme {
    /// Global Clifford measurements, Frobenius error.
    GlobalClifford,
    /// Pauli-6 measurements, Frobenius error.
    Pauli6Frobenius,
    /// Pauli-6 measurements, trace-norm error.
    Pauli6Trace,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum OverlapScheme {
    /// Global Clifford measurements with pure target states.
    GlobalClifford,
    /// Single-qubit Clifford measurements with pure states on `k` qubits.
    LocalClifford { k: usize },
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < eps < 1 and 0 < delta < 1, got {eps}, {delta}")));
    }
    Ok(())
}

fn ceil_count(x: f64) -> Result<u64> {
    if !x.is_finite() || x > u64::MAX as f64 {
        return Err(Error::InvalidParameter(format!("bound {x} does not fit a 64-bit count")));
    }
    Ok(x.ceil().max(0.0) as u64)
}

/// Measurements sufficient to estimate every reduced `k`-qubit process of an `n`-qubit channel.
pub fn bound_reduced(n: usize, k: usize, eps: f64, delta: f64, scheme: ReducedScheme) -> Result<u64> {
    check_eps_delta(eps, delta)?;
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let (n, k) = (n as f64, k as f64);
    let union = (2.0 * (8.0 * n).powf(2.0 * k) / delta).ln();
    let value = match scheme {
        ReducedScheme::GlobalClifford => 204.0 / (eps * eps) * 4f64.powf(n + k) * union,
        ReducedScheme::Pauli6Frobenius => 68.0 / (eps * eps) * 36f64.powf(k) * union,
        ReducedScheme::Pauli6Trace => 8.0 / 3.0 * 144f64.powf(k) / (eps * eps) * ((24.0 * n).powf(2.0 * k) / delta).ln(),
    };
    ceil_count(value)
}

/// Measurements sufficient to predict `m` channel overlaps.
pub fn bound_overlap(m: u64, eps: f64, delta: f64, scheme: OverlapScheme) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one overlap".into()));
    }
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("need eps > 0 and 0 < delta < 1, got {eps}, {delta}")));
    }
    let shadow_norm = match scheme {
        OverlapScheme::GlobalClifford => 3.0,
        OverlapScheme::LocalClifford { k } => {
            if k == 0 {
                return Err(Error::InvalidParameter("local Clifford bound needs k >= 1".into()));
            }
            4f64.powi(k as i32)
        }
    };
    ceil_count(68.0 / (eps * eps) * (2.0 * m as f64 / delta).ln() * shadow_norm)
}
