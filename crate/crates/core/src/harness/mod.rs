//! Generic quasi-morphism machinery: homogenization along powers,
//! empirical defect estimation, and the circle translation-number
//! evaluator used to exercise both.
//!
//! Every invariant module registers an evaluator by implementing
//! [`QmEvaluator`]. Element handles are opaque to the harness: it only
//! composes them, raises them to powers and asks for their value.

mod translation;

pub use translation::{CircleLift, LiftStep, TranslationEvaluator};

use crate::error::{Error, Result};
use crate::numeric::stream_rng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// A real-valued function on a group together with the group operations
/// needed to probe it.
pub trait QmEvaluator {
    type Element: Clone;

    fn identity(&self) -> Self::Element;

    /// The product `x y`.
    fn compose(&self, x: &Self::Element, y: &Self::Element) -> Result<Self::Element>;

    fn evaluate(&self, x: &Self::Element) -> Result<f64>;

    /// `x^p` for `p >= 1`.
    fn power(&self, x: &Self::Element, p: u64) -> Result<Self::Element> {
        if p == 0 {
            return Ok(self.identity());
        }
        let mut acc = x.clone();
        for _ in 1..p {
            acc = self.compose(&acc, x)?;
        }
        Ok(acc)
    }

    /// Value of `phi(x^p) / p`. Evaluators with a cheaper route than
    /// materializing `x^p` override this.
    fn power_quotient(&self, x: &Self::Element, p: u64) -> Result<f64> {
        let xp = self.power(x, p)?;
        Ok(self.evaluate(&xp)? / p as f64)
    }

    /// Deterministic bound on `|phi_h(x) - phi(x^p)/p|`, when one is known.
    fn homogenization_bound(&self, _p: u64) -> Option<f64> {
        None
    }

    fn inverse(&self, _x: &Self::Element) -> Option<Self::Element> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogenizationResult {
    pub value: f64,
    pub p_used: u64,
    /// `None` when the evaluator has no deterministic bound.
    pub error_bound: Option<f64>,
    pub samples: Vec<(u64, f64)>,
}

/// Evaluates `phi(x^p)/p` along a strictly increasing schedule.
pub fn homogenize<E: QmEvaluator>(
    ev: &E,
    x: &E::Element,
    p_schedule: &[u64],
) -> Result<HomogenizationResult> {
    if p_schedule.is_empty() {
        return Err(Error::validation("p_schedule must be nonempty"));
    }
    if p_schedule[0] == 0 || p_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(
            "p_schedule must be strictly increasing positive integers",
        ));
    }
    let mut samples = Vec::with_capacity(p_schedule.len());
    for &p in p_schedule {
        let q = ev.power_quotient(x, p).map_err(|e| Error::AtPower {
            p,
            source: Box::new(e),
        })?;
        samples.push((p, q));
    }
    let (p_used, value) = *samples.last().expect("nonempty schedule");
    Ok(HomogenizationResult {
        value,
        p_used,
        error_bound: ev.homogenization_bound(p_used),
        samples,
    })
}

/// When power doubling may stop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub start_p: u64,
    pub max_p: u64,
    /// Stop once the evaluator's deterministic bound drops below this.
    pub abs_bound: Option<f64>,
    /// Stop once successive quotients differ by less than this.
    pub successive_tol: Option<f64>,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            start_p: 1,
            max_p: 1 << 10,
            abs_bound: None,
            successive_tol: Some(1e-6),
        }
    }
}

/// Power doubling `p, 2p, 4p, ...` until the stop rule fires or `max_p`
/// is reached.
pub fn homogenize_doubling<E: QmEvaluator>(
    ev: &E,
    x: &E::Element,
    rule: StopRule,
) -> Result<HomogenizationResult> {
    if rule.start_p == 0 || rule.max_p < rule.start_p {
        return Err(Error::validation("stop rule needs 1 <= start_p <= max_p"));
    }
    let mut samples: Vec<(u64, f64)> = Vec::new();
    let mut p = rule.start_p;
    loop {
        let q = ev.power_quotient(x, p).map_err(|e| Error::AtPower {
            p,
            source: Box::new(e),
        })?;
        let prev = samples.last().map(|s| s.1);
        samples.push((p, q));
        let bound_hit = match (rule.abs_bound, ev.homogenization_bound(p)) {
            (Some(target), Some(b)) => b <= target,
            _ => false,
        };
        let settled = match (rule.successive_tol, prev) {
            (Some(tol), Some(prev)) => (q - prev).abs() < tol,
            _ => false,
        };
        if bound_hit || settled || p.saturating_mul(2) > rule.max_p {
            break;
        }
        p *= 2;
    }
    let (p_used, value) = *samples.last().expect("at least one sample");
    Ok(HomogenizationResult {
        value,
        p_used,
        error_bound: ev.homogenization_bound(p_used),
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectEstimate {
    /// Lower bound for the true defect.
    pub max_observed: f64,
    pub n_pairs: usize,
    pub seed: u64,
}

/// Largest `|phi(xy) - phi(x) - phi(y)|` over `n_pairs` sampled pairs.
///
/// Pair `i` draws both elements from the stream `(seed, i)`, so the result
/// depends only on the seed.
pub fn estimate_defect<E, S>(
    ev: &E,
    mut sampler: S,
    n_pairs: usize,
    seed: u64,
) -> Result<DefectEstimate>
where
    E: QmEvaluator,
    S: FnMut(&mut ChaCha12Rng) -> E::Element,
{
    if n_pairs == 0 {
        return Err(Error::validation("n_pairs must be positive"));
    }
    let mut max_observed: f64 = 0.0;
    for i in 0..n_pairs {
        let mut rng = stream_rng(seed, i as u64);
        let x = sampler(&mut rng);
        let y = sampler(&mut rng);
        let xy = ev.compose(&x, &y)?;
        let d = ev.evaluate(&xy)? - ev.evaluate(&x)? - ev.evaluate(&y)?;
        max_observed = max_observed.max(d.abs());
    }
    Ok(DefectEstimate {
        max_observed,
        n_pairs,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// phi(n) = n + sin(n) on the integers: a quasi-morphism with defect <= 3
    /// whose homogenization is the identity.
    struct Wobble;

    impl QmEvaluator for Wobble {
        type Element = i64;
        fn identity(&self) -> i64 {
            0
        }
        fn compose(&self, x: &i64, y: &i64) -> Result<i64> {
            Ok(x + y)
        }
        fn evaluate(&self, x: &i64) -> Result<f64> {
            Ok(*x as f64 + (*x as f64).sin())
        }
        fn power(&self, x: &i64, p: u64) -> Result<i64> {
            Ok(x * p as i64)
        }
        fn inverse(&self, x: &i64) -> Option<i64> {
            Some(-x)
        }
    }

    #[test]
    fn identity_homogenizes_to_zero() {
        let r = homogenize(&Wobble, &0, &[1, 2, 4]).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.samples.iter().all(|s| s.1 == 0.0));
        assert_eq!(r.error_bound, None);
    }

    #[test]
    fn schedule_validation() {
        assert!(homogenize(&Wobble, &1, &[]).is_err());
        assert!(homogenize(&Wobble, &1, &[2, 2]).is_err());
        assert!(homogenize(&Wobble, &1, &[0, 1]).is_err());
    }

    #[test]
    fn homogenization_is_odd_and_close_to_phi() {
        let d = estimate_defect(&Wobble, |r| rand::Rng::random_range(r, -50..50), 400, 1)
            .unwrap()
            .max_observed;
        assert!(d <= 3.0);
        for x in [-7i64, 3, 11] {
            let h = homogenize(&Wobble, &x, &[1, 64, 4096]).unwrap().value;
            let hinv = homogenize(&Wobble, &Wobble.inverse(&x).unwrap(), &[1, 64, 4096])
                .unwrap()
                .value;
            assert!((h + hinv).abs() < 1e-3);
            assert!((Wobble.evaluate(&x).unwrap() - h).abs() <= d + 1e-3);
        }
    }

    #[test]
    fn doubling_stops_on_settled_quotients() {
        let r = homogenize_doubling(
            &Wobble,
            &5,
            StopRule {
                start_p: 1,
                max_p: 1 << 20,
                abs_bound: None,
                successive_tol: Some(1e-3),
            },
        )
        .unwrap();
        assert!(r.p_used < 1 << 20);
        assert!((r.value - 5.0).abs() <= 1.0 / r.p_used as f64);
        assert!(r.samples.windows(2).all(|w| w[1].0 == 2 * w[0].0));
    }

    #[test]
    fn defect_is_seed_deterministic() {
        let s = |r: &mut ChaCha12Rng| rand::Rng::random_range(r, -100i64..100);
        let a = estimate_defect(&Wobble, s, 50, 9).unwrap();
        let b = estimate_defect(&Wobble, s, 50, 9).unwrap();
        assert_eq!(a, b);
    }
}
