//! Expectations over next-period productivity.
//!
//! The default rule is Gauss-Hermite quadrature on `ln A`. With large risk
//! aversion the integrands `A^{-gamma}` concentrate far in the lower tail, so
//! the node count grows with `gamma * sigma`.

use alloc::vec::Vec;

use crate::model::ShockStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ExpectationRule {
    /// Gauss-Hermite quadrature with the given number of nodes.
    GaussHermite { nodes: usize },
    /// Equally weighted seeded draws; for validating the quadrature.
    MonteCarlo { draws: usize, seed: u64, stream: u64 },
}

/// Smallest node count used by [`ExpectationRule::for_risk`].
pub const BASE_NODES: usize = 21;
const MAX_NODES: usize = 151;

impl Default for ExpectationRule {
    fn default() -> Self {
        ExpectationRule::GaussHermite { nodes: BASE_NODES }
    }
}

impl ExpectationRule {
    /// Gauss-Hermite rule accurate for `E[A^{1-gamma}] / E[A^{-gamma}]` to
    /// well below 1e-6 in logs.
    pub fn for_risk(gamma: f64, sigma: f64) -> Self {
        let scale = gamma.abs() * sigma;
        let mut nodes = if scale <= 4.5 {
            BASE_NODES
        } else {
            BASE_NODES + libm::ceil((scale - 4.5) * 10.0) as usize
        };
        if nodes % 2 == 0 {
            nodes += 1;
        }
        ExpectationRule::GaussHermite {
            nodes: nodes.min(MAX_NODES),
        }
    }

    /// Support points `A'` and probability weights for `ln A ~ N(mu, sigma^2)`.
    pub fn support(&self, mu: f64, sigma: f64) -> Result<ShockSupport> {
        match *self {
            ExpectationRule::GaussHermite { nodes } => {
                if nodes == 0 {
                    return Err(Error::param("nodes", "need at least one quadrature node"));
                }
                let (x, w) = gauss_hermite(nodes)?;
                let norm = 1.0 / libm::sqrt(core::f64::consts::PI);
                let values = x
                    .iter()
                    .map(|xi| libm::exp(mu + sigma * core::f64::consts::SQRT_2 * xi))
                    .collect();
                let weights = w.iter().map(|wi| wi * norm).collect();
                Ok(ShockSupport { values, weights })
            }
            ExpectationRule::MonteCarlo {
                draws,
                seed,
                stream,
            } => {
                if draws == 0 {
                    return Err(Error::param("draws", "need at least one draw"));
                }
                let s = ShockStream::new(seed, stream, mu, sigma);
                let values = s
                    .normals(0, draws)
                    .iter()
                    .map(|z| libm::exp(mu + sigma * z))
                    .collect();
                let weights = alloc::vec![1.0 / draws as f64; draws];
                Ok(ShockSupport { values, weights })
            }
        }
    }
}

/// Discrete distribution of next-period productivity.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockSupport {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl ShockSupport {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * f(*a))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|a| a)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Gauss-Hermite nodes and weights for the weight function `exp(-x^2)`,
/// by Newton iteration on the orthonormal Hermite recurrence.
/// Nodes are returned in decreasing order.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const EPS: f64 = 1e-14;
    const MAX_ITER: usize = 100;
    // pi^(-1/4)
    const PIM4: f64 = 0.751_125_544_464_942_5;

    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => libm::sqrt(2.0 * nf + 1.0) - 1.855_75 * libm::pow(2.0 * nf + 1.0, -0.166_67),
            1 => z - 1.14 * libm::pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * libm::sqrt(2.0 / jf) * p2 - libm::sqrt((jf - 1.0) / jf) * p3;
            }
            pp = libm::sqrt(2.0 * nf) * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= EPS * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                iterations: MAX_ITER,
                residual: f64::NAN,
            });
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_rule() {
        let (x, w) = gauss_hermite(3).unwrap();
        let xs = [1.224_744_871_391_589, 0.0, -1.224_744_871_391_589];
        let ws = [0.295_408_975_150_919_35, 1.181_635_900_603_677_4, 0.295_408_975_150_919_35];
        for i in 0..3 {
            assert!((x[i] - xs[i]).abs() < 1e-14);
            assert!((w[i] - ws[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 21, 40, 81, 151] {
            let (_, w) = gauss_hermite(n).unwrap();
            let s: f64 = w.iter().sum();
            assert!((s - libm::sqrt(core::f64::consts::PI)).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn lognormal_moments() {
        let (mu, sigma) = (0.1, 0.2);
        let sup = ExpectationRule::GaussHermite { nodes: 21 }.support(mu, sigma).unwrap();
        for k in [-3.0, -1.0, 1.0, 2.0] {
            let exact = libm::exp(k * mu + 0.5 * k * k * sigma * sigma);
            let q = sup.expect(|a| libm::pow(a, k));
            assert!((q / exact - 1.0).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn adaptive_rule_handles_high_risk_aversion() {
        let sigma = 0.2;
        for gamma in [0.0, 18.66, 21.6, 37.0, 49.5, 55.0] {
            let sup = ExpectationRule::for_risk(gamma, sigma).support(0.0, sigma).unwrap();
            let ratio = sup.expect(|a| libm::pow(a, 1.0 - gamma)) / sup.expect(|a| libm::pow(a, -gamma));
            let log_spread = libm::log(ratio) - libm::log(sup.mean());
            assert!((log_spread + gamma * sigma * sigma).abs() < 1e-6, "gamma={gamma}: {log_spread}");
        }
    }

    #[test]
    fn degenerate_sigma_collapses_support() {
        let sup = ExpectationRule::default().support(0.4, 0.0).unwrap();
        for a in sup.values() {
            assert_eq!(*a, libm::exp(0.4));
        }
    }
}
