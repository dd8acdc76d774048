//! The distribution `W_N(p)`: `X = Σ_{t ≤ N} Y_t Z_t` with `Y_t ~ Ber(p)`,
//! `Z_t` a uniform sign.

use crate::error::{Error, Result};
use crate::rng::{stream, tag};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use std::f64::consts::E;

/// One draw: `K ~ Bin(N, p)` nonzero summands, `X = 2·Bin(K, ½) − K`.
pub fn sample_w<R: Rng + ?Sized>(rng: &mut R, big_n: u64, p: f64) -> i64 {
    if p <= 0.0 || big_n == 0 {
        return 0;
    }
    let k = Binomial::new(big_n, p.min(1.0)).expect("p in [0, 1]").sample(rng);
    if k == 0 {
        return 0;
    }
    let heads = Binomial::new(k, 0.5).expect("valid").sample(rng);
    2 * heads as i64 - k as i64
}

#[derive(Debug, Clone, Serialize)]
pub struct TailCheck {
    pub t: f64,
    /// `|X|` threshold the probability refers to.
    pub threshold: f64,
    pub bound: f64,
    pub empirical: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightStats {
    pub big_n: u64,
    pub p: f64,
    pub samples: usize,
    pub seed: u64,
    /// `pN`.
    pub variance: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub second_moment: f64,
    pub second_moment_se: f64,
    pub abs_mean: f64,
    pub abs_mean_se: f64,
    /// Lower bound on `E|X|` from the lemma statement.
    pub abs_bound_lemma: f64,
    /// The `pN < 1` constant derived in the proof (`1/e`), if applicable.
    pub abs_bound_proof: Option<f64>,
    pub tails: Vec<TailCheck>,
    pub max_abs: i64,
    /// Every comparison within 4 standard errors.
    pub pass: bool,
    pub flags: Vec<String>,
}

pub fn weight_dist_stats(big_n: u64, p: f64, samples: usize, seed: u64) -> Result<WeightStats> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let mut rng = stream(seed, tag::WEIGHTS, 0);
    let xs: Vec<i64> = (0..samples).map(|_| sample_w(&mut rng, big_n, p)).collect();
    let s = samples as f64;
    let moments = |f: &dyn Fn(f64) -> f64| {
        let vals: Vec<f64> = xs.iter().map(|&x| f(x as f64)).collect();
        let mean = vals.iter().sum::<f64>() / s;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s - 1.0);
        (mean, (var / s).sqrt())
    };
    let (mean, mean_se) = moments(&|x| x);
    let (second_moment, second_moment_se) = moments(&|x| x * x);
    let (abs_mean, abs_mean_se) = moments(&|x| x.abs());
    let pn = p * big_n as f64;
    let mut flags = Vec::new();
    let tol = |se: f64| 4.0 * se.max(1e-12);

    if mean.abs() > tol(mean_se) {
        flags.push(format!("E X = {mean} differs from 0"));
    }
    if (second_moment - pn).abs() > tol(second_moment_se) {
        flags.push(format!("E X² = {second_moment} differs from pN = {pn}"));
    }

    let (abs_bound_lemma, abs_bound_proof) = if pn >= 1.0 {
        (2.0 / E.powf(1.5) * pn.sqrt(), None)
    } else if pn > 0.0 {
        let l = (1.0 / (1.0 - pn)).ln();
        (l / (2.0 * E), Some(l / E))
    } else {
        (0.0, Some(0.0))
    };
    // the weaker of the two constants decides pass/fail
    if abs_mean + tol(abs_mean_se) < abs_bound_lemma {
        flags.push(format!("E|X| = {abs_mean} below {abs_bound_lemma}"));
    }

    let count_ge = |thr: f64, strict: bool| {
        xs.iter().filter(|&&x| if strict { x.abs() as f64 > thr } else { x.abs() as f64 >= thr }).count() as f64 / s
    };
    let tails: Vec<TailCheck> = if pn == 0.0 {
        Vec::new()
    } else {
        let ts: &[f64] = if pn >= 1.0 { &[0.5, 1.0, 1.5, 2.0, 3.0] } else { &[1.0, 2.0, 3.0, 4.0, 6.0] };
        ts.iter()
            .map(|&t| {
                let (threshold, bound, empirical) = if pn >= 1.0 {
                    let thr = 2.0 * t * pn.sqrt();
                    (thr, 2.0 * (-t * t).exp(), count_ge(thr, true))
                } else {
                    (1.0 + t, (-t / 2.0).exp(), count_ge(1.0 + t, false))
                };
                let b = bound.min(1.0);
                let violated = empirical > bound + 4.0 * (b * (1.0 - b) / s).sqrt();
                TailCheck { t, threshold, bound, empirical, violated }
            })
            .collect()
    };
    for tc in tails.iter().filter(|tc| tc.violated) {
        flags.push(format!("Pr(|X| beyond {}) = {} exceeds {}", tc.threshold, tc.empirical, tc.bound));
    }
    let max_abs = xs.iter().map(|x| x.abs()).max().unwrap_or(0);
    Ok(WeightStats {
        big_n,
        p,
        samples,
        seed,
        variance: pn,
        mean,
        mean_se,
        second_moment,
        second_moment_se,
        abs_mean,
        abs_mean_se,
        abs_bound_lemma,
        abs_bound_proof,
        tails,
        max_abs,
        pass: flags.is_empty(),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_probability() {
        let s = weight_dist_stats(10, 0.0, 1000, 1).unwrap();
        assert_eq!((s.mean, s.second_moment, s.abs_mean, s.max_abs), (0.0, 0.0, 0.0, 0));
        assert!(s.pass);
    }

    #[test]
    fn dense_regime() {
        let s = weight_dist_stats(100, 0.5, 100_000, 7).unwrap();
        assert!((s.second_moment - 50.0).abs() <= 4.0 * s.second_moment_se, "{s:?}");
        assert!((s.abs_bound_lemma - 3.156).abs() < 1e-3);
        assert!(s.abs_mean >= s.abs_bound_lemma);
        assert!(s.pass, "{:?}", s.flags);
    }

    #[test]
    fn sparse_regime() {
        let s = weight_dist_stats(100, 0.005, 100_000, 7).unwrap();
        assert!((s.abs_bound_lemma - 0.1275).abs() < 1e-4);
        assert!(s.abs_mean >= s.abs_bound_lemma);
        assert!(s.pass, "{:?}", s.flags);
    }
}
