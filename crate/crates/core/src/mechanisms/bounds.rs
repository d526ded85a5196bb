//! Closed-form error bounds and communication cost.

use super::report::Mechanism;
use crate::error::{domain, Result};
use crate::primitives::check_epsilon;

/// High-probability error bounds for one key. `mean` is `None` when the bound
/// is vacuous because `N` is too small for its denominator to be positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBounds {
    pub frequency: f64,
    pub mean: Option<f64>,
}

fn check(epsilon: f64, n: u64, delta: f64) -> Result<()> {
    check_epsilon(epsilon)?;
    if n == 0 {
        return Err(domain("bound needs at least one report"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Calibration gain of each mechanism's count estimator: the factor by which a
/// deviation of the observed count is amplified.
fn gain(mechanism: Mechanism, epsilon: f64) -> Result<f64> {
    match mechanism {
        Mechanism::Kvue => {
            let e = epsilon.exp();
            Ok((e + 2.0) / (e - 1.0))
        }
        Mechanism::Kvoh => {
            let e = (epsilon / 2.0).exp();
            Ok((e + 1.0) / (e - 1.0))
        }
        Mechanism::F2m => {
            let e = epsilon.exp();
            Ok((e + 1.0) / (e - 1.0))
        }
        Mechanism::PrivKv => Err(domain("no closed-form bound for PrivKV")),
    }
}

/// `r` such that `|N_i* − N_i| ≤ r` with probability at least `1 − δ`.
pub fn count_bound(mechanism: Mechanism, epsilon: f64, n: u64, delta: f64) -> Result<f64> {
    check(epsilon, n, delta)?;
    Ok(gain(mechanism, epsilon)? * (n as f64 / 2.0 * (2.0 / delta).ln()).sqrt())
}

/// Frequency and mean error bounds holding with probability at least
/// `(1 − δ)²`, for `N` reports of a key with true frequency `f_k`.
///
/// For F2M, `epsilon` is the budget of the channel being bounded and the
/// frequency bound is `r/N` from the same Hoeffding argument as the mean.
pub fn theoretical_bound(
    mechanism: Mechanism,
    epsilon: f64,
    n: u64,
    delta: f64,
    f_k: f64,
) -> Result<ErrorBounds> {
    check(epsilon, n, delta)?;
    if !(f_k > 0.0 && f_k <= 1.0) {
        return Err(domain(format!("f_k must lie in (0, 1], got {f_k}")));
    }
    let nf = n as f64;
    let log_term = (2.0 / delta).ln();
    let positive = |v: f64| (v > 0.0).then_some(v);
    match mechanism {
        Mechanism::Kvue => {
            let e = epsilon.exp();
            let spread = (e + 2.0) * (2.0 * log_term).sqrt();
            Ok(ErrorBounds {
                frequency: (e + 2.0) / (e - 1.0) * (2.0 / nf * log_term).sqrt(),
                mean: positive((e - 1.0) * f_k * nf.sqrt() - spread).map(|den| spread / den),
            })
        }
        Mechanism::Kvoh => {
            let e = (epsilon / 2.0).exp();
            let spread = (e + 1.0) * (2.0 * log_term).sqrt();
            Ok(ErrorBounds {
                frequency: (e + 1.0) / (e - 1.0) * (2.0 / nf * log_term).sqrt(),
                mean: positive(f_k * (e - 1.0) * nf.sqrt() - spread).map(|den| spread / den),
            })
        }
        Mechanism::F2m => {
            let e = epsilon.exp();
            let root = log_term.sqrt();
            let num = 2.0 * (f_k + 1.0) * (e + 1.0) * root;
            let den = (2.0 * nf).sqrt() * f_k * f_k * (e - 1.0) - f_k * (e - 1.0) * root;
            Ok(ErrorBounds {
                frequency: (e + 1.0) / (e - 1.0) * (log_term / (2.0 * nf)).sqrt(),
                mean: positive(den).map(|den| num / den),
            })
        }
        Mechanism::PrivKv => Err(domain("no closed-form bound for PrivKV")),
    }
}

/// Communication cost of one report in bits, as tabulated per mechanism.
pub fn report_size_bits(mechanism: Mechanism, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(domain("key domain must be non-empty"));
    }
    let log_d = (d as f64).log2();
    Ok(match mechanism {
        Mechanism::PrivKv | Mechanism::Kvue => (3.0 * d as f64).log2(),
        Mechanism::F2m => 2.0 * log_d,
        Mechanism::Kvoh => 3.0 * log_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kvue_frequency_spot_value() {
        let b = theoretical_bound(Mechanism::Kvue, 1.0, 100_000, 0.05, 0.5).unwrap();
        let e = 1f64.exp();
        let expected = (e + 2.0) / (e - 1.0) * (2.0 / 1e5 * 40f64.ln()).sqrt();
        assert!((b.frequency / expected - 1.0).abs() < 1e-12);
        assert!((b.frequency - 0.0236).abs() < 1e-4);
    }

    #[test]
    fn bounds_vanish_with_n() {
        for m in [Mechanism::Kvue, Mechanism::Kvoh, Mechanism::F2m] {
            let b = theoretical_bound(m, 1.0, 1 << 50, 0.05, 0.3).unwrap();
            assert!(b.frequency < 1e-5);
            assert!(b.mean.unwrap() < 1e-4);
        }
    }

    #[test]
    fn vacuous_mean_bound() {
        let b = theoretical_bound(Mechanism::Kvue, 0.1, 10, 0.05, 0.1).unwrap();
        assert_eq!(b.mean, None);
        let b = theoretical_bound(Mechanism::F2m, 0.1, 10, 0.05, 0.1).unwrap();
        assert_eq!(b.mean, None);
    }

    #[test]
    fn kvoh_frequency_bound_dominates_kvue() {
        for i in 1..=50 {
            let eps = i as f64 * 0.1;
            let ue = theoretical_bound(Mechanism::Kvue, eps, 1000, 0.05, 0.5).unwrap();
            let oh = theoretical_bound(Mechanism::Kvoh, eps, 1000, 0.05, 0.5).unwrap();
            assert!(oh.frequency >= ue.frequency, "eps={eps}");
        }
    }

    #[test]
    fn frequency_bound_is_twice_count_bound_over_n() {
        for m in [Mechanism::Kvue, Mechanism::Kvoh] {
            let n = 5000;
            let r = count_bound(m, 0.8, n, 0.1).unwrap();
            let b = theoretical_bound(m, 0.8, n, 0.1, 0.5).unwrap();
            assert!((b.frequency - 2.0 * r / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert!(theoretical_bound(Mechanism::PrivKv, 1.0, 10, 0.05, 0.5).is_err());
        assert!(theoretical_bound(Mechanism::Kvue, 1.0, 0, 0.05, 0.5).is_err());
        assert!(theoretical_bound(Mechanism::Kvue, 1.0, 10, 1.0, 0.5).is_err());
        assert!(theoretical_bound(Mechanism::Kvue, 1.0, 10, 0.05, 0.0).is_err());
        assert!(report_size_bits(Mechanism::Kvue, 0).is_err());
    }

    #[test]
    fn sizes() {
        assert!((report_size_bits(Mechanism::PrivKv, 100).unwrap() - 300f64.log2()).abs() < 1e-12);
        assert!(
            (report_size_bits(Mechanism::Kvoh, 100).unwrap() - 19.931568569324174).abs() < 1e-12
        );
        assert!((report_size_bits(Mechanism::PrivKv, 1).unwrap() - 3f64.log2()).abs() < 1e-15);
        assert!(
            (report_size_bits(Mechanism::F2m, 100).unwrap() - 2.0 * 100f64.log2()).abs() < 1e-12
        );
    }
}
