use super::integrate::walk;
use super::scenario::Scenario;
use crate::error::Result;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirkhoffResult {
    /// `(1/N) sum_{k<N} phi(f^k x)`.
    pub value: f64,
    /// Spread (max - min) of the running averages over the last quarter of
    /// the iterations. No convergence is claimed.
    pub oscillation: f64,
    pub iterations: usize,
}

pub fn birkhoff_average<F>(sc: &Scenario, phi: F, x: &[f64], n: usize) -> Result<BirkhoffResult>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = sc.dim();
    let mut point = x.to_vec();
    let mut sum = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let tail_start = (3 * n).div_ceil(4).max(1);
    for k in 0..n {
        sum += phi(&point);
        let running = sum / (k + 1) as f64;
        if k + 1 >= tail_start {
            lo = lo.min(running);
            hi = hi.max(running);
        }
        if k + 1 < n {
            let next = walk(sc, &point, 1, |_| Ok(()))?;
            point.copy_from_slice(&next[..dim]);
        }
    }
    Ok(BirkhoffResult {
        value: if n == 0 { 0.0 } else { sum / n as f64 },
        oscillation: if n == 0 { 0.0 } else { hi - lo },
        iterations: n,
    })
}
