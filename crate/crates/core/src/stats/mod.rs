//! Descriptive statistics and the unpaired two-tailed t-test.

pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use special::{student_t_quantile, student_t_two_sided};

/// Significance level.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty sample")]
    Empty,
    #[error("need at least {need} observations, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("non-finite observation")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary<T = f64> {
    pub n: usize,
    pub mean: T,
    /// Unbiased (n - 1) standard deviation; `None` for a single observation.
    pub sd: Option<T>,
    pub sem: Option<T>,
    pub ci95_halfwidth: Option<T>,
}

impl<T: Scalar> SampleSummary<T> {
    pub fn ci95(&self) -> Result<T, StatsError> {
        self.ci95_halfwidth.ok_or(StatsError::TooFew {
            need: 2,
            got: self.n,
        })
    }
}

pub fn describe<T: Scalar>(samples: &[T]) -> Result<SampleSummary<T>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = samples.len();
    let nf = T::from_usize_lossy(n);
    let mean = samples.iter().copied().sum::<T>() / nf;
    if n < 2 {
        return Ok(SampleSummary {
            n,
            mean,
            sd: None,
            sem: None,
            ci95_halfwidth: None,
        });
    }
    let var = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (nf - T::one());
    let sd = var.sqrt();
    let sem = sd / nf.sqrt();
    let q = student_t_quantile(T::lit(0.975), nf - T::one());
    Ok(SampleSummary {
        n,
        mean,
        sd: Some(sd),
        sem: Some(sem),
        ci95_halfwidth: Some(q * sem),
    })
}

/// Variance treatment of the unpaired test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceModel {
    /// Unequal variances with Welch-Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Pooled variance, `n_a + n_b - 2` degrees of freedom.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult<T = f64> {
    pub t_statistic: T,
    pub degrees_of_freedom: T,
    pub p_value: T,
    pub significant: bool,
}

/// Welch two-tailed t-test.
pub fn t_test_unpaired<T: Scalar>(a: &[T], b: &[T]) -> Result<TTestResult<T>, StatsError> {
    t_test_unpaired_with(a, b, VarianceModel::Welch)
}

/// Two-tailed unpaired t-test.
///
/// When both samples have zero variance the statistic is undefined: equal
/// means give `t = 0, p = 1`; unequal means give `t = +-inf, p = 0`.
pub fn t_test_unpaired_with<T: Scalar>(
    a: &[T],
    b: &[T],
    model: VarianceModel,
) -> Result<TTestResult<T>, StatsError> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(StatsError::TooFew {
                need: 2,
                got: s.len(),
            });
        }
    }
    let sa = describe(a)?;
    let sb = describe(b)?;
    let (na, nb) = (T::from_usize_lossy(sa.n), T::from_usize_lossy(sb.n));
    let one = T::one();
    let va = sa.sd.unwrap_or_default().powi(2);
    let vb = sb.sd.unwrap_or_default().powi(2);
    let diff = sa.mean - sb.mean;

    let (se2, df) = match model {
        VarianceModel::Welch => {
            let (qa, qb) = (va / na, vb / nb);
            let se2 = qa + qb;
            let denom = qa * qa / (na - one) + qb * qb / (nb - one);
            let df = if denom > T::zero() {
                se2 * se2 / denom
            } else {
                na + nb - T::lit(2.0)
            };
            (se2, df)
        }
        VarianceModel::Pooled => {
            let df = na + nb - T::lit(2.0);
            let sp2 = ((na - one) * va + (nb - one) * vb) / df;
            (sp2 * (one / na + one / nb), df)
        }
    };

    let (t, p) = if se2 > T::zero() {
        let t = diff / se2.sqrt();
        (t, student_t_two_sided(t, df).min(one).max(T::zero()))
    } else if diff == T::zero() {
        (T::zero(), one)
    } else {
        (diff.signum() * T::infinity(), T::zero())
    };
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        significant: p < T::lit(ALPHA),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn describe_examples() {
        let s = describe(&[4.0, 4.0, 4.0]).unwrap();
        assert_eq!((s.mean, s.sd, s.sem), (4.0, Some(0.0), Some(0.0)));
        let s = describe(&[1.0f64, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.sd.unwrap() - 1.0).abs() < 1e-15);
        assert!((s.sem.unwrap() - 0.577_350_269_189_625_8).abs() < 1e-15);
        // t_{0.975, 2} = 4.3026527
        assert!((s.ci95().unwrap() - 4.302_652_7 * 0.577_350_269).abs() < 1e-6);
        let s = describe(&[5.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert!(s.sd.is_none());
        assert!(s.ci95().is_err());
        assert_eq!(describe::<f64>(&[]), Err(StatsError::Empty));
        assert_eq!(describe(&[1.0, f64::NAN]), Err(StatsError::NonFinite));
    }

    #[test]
    fn identical_samples() {
        let r = t_test_unpaired(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.significant);
    }

    #[test]
    fn shifted_samples() {
        let r = t_test_unpaired(&[1.0f64, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((r.t_statistic + 1.224_744_871_391_589).abs() < 1e-12);
        assert!((r.degrees_of_freedom - 4.0).abs() < 1e-12);
        // 0.28786413472669 by 40-digit quadrature of the t density (mpmath)
        assert!((r.p_value - 0.287_864_134_726_690_7).abs() < 1e-9);
        let pooled =
            t_test_unpaired_with(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], VarianceModel::Pooled)
                .unwrap();
        assert!((pooled.p_value - r.p_value).abs() < 1e-12);
    }

    #[test]
    fn degenerate_variances() {
        let r = t_test_unpaired(&[0.0, 0.0], &[10.0, 10.0]).unwrap();
        assert_eq!(r.t_statistic, f64::NEG_INFINITY);
        assert!(r.p_value < 1e-6);
        assert!(r.significant);
        let r = t_test_unpaired(&[3.0, 3.0], &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!((r.t_statistic, r.p_value, r.significant), (0.0, 1.0, false));
        // one-sided zero variance still has a finite statistic
        let r = t_test_unpaired(&[1.0f64, 1.0, 1.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((r.degrees_of_freedom - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_small() {
        assert_eq!(
            t_test_unpaired(&[1.0], &[1.0, 2.0]),
            Err(StatsError::TooFew { need: 2, got: 1 })
        );
        assert!(t_test_unpaired(&[1.0, 2.0], &[]).is_err());
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0f64..100.0, 2..8)
    }

    proptest! {
        #[test]
        fn swap_symmetry(a in sample(), b in sample()) {
            let r1 = t_test_unpaired(&a, &b).unwrap();
            let r2 = t_test_unpaired(&b, &a).unwrap();
            prop_assert_eq!(r1.t_statistic, -r2.t_statistic);
            prop_assert_eq!(r1.p_value, r2.p_value);
        }

        #[test]
        fn location_and_scale(a in sample(), b in sample(), shift in -1e3f64..1e3, scale in 0.01f64..100.0) {
            let r = t_test_unpaired(&a, &b).unwrap();
            prop_assume!(r.t_statistic.is_finite() && r.t_statistic.abs() > 1e-6);
            let tr = |s: &[f64], f: &dyn Fn(f64) -> f64| s.iter().map(|&x| f(x)).collect::<Vec<_>>();
            let shifted = t_test_unpaired(&tr(&a, &|x| x + shift), &tr(&b, &|x| x + shift)).unwrap();
            let scaled = t_test_unpaired(&tr(&a, &|x| x * scale), &tr(&b, &|x| x * scale)).unwrap();
            // rounding of x + shift is relative to |shift|, so scale by the spread
            let spread = [&a, &b].iter().map(|s| describe(s).unwrap().sd.unwrap()).fold(f64::INFINITY, f64::min);
            prop_assume!(spread > 1e-3);
            let tol = 1e-12 * (1.0 + shift.abs() / spread);
            prop_assert!((shifted.t_statistic - r.t_statistic).abs() <= tol * r.t_statistic.abs().max(1.0));
            prop_assert!((shifted.p_value - r.p_value).abs() <= tol);
            prop_assert!((scaled.t_statistic - r.t_statistic).abs() <= 1e-12 * r.t_statistic.abs().max(1.0));
            prop_assert!((scaled.p_value - r.p_value).abs() <= 1e-12);
        }

        #[test]
        fn p_in_unit_interval(a in sample(), b in sample()) {
            let r = t_test_unpaired(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.p_value));
            prop_assert_eq!(r.significant, r.p_value < ALPHA);
        }
    }
}
