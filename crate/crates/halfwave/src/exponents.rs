//! Scalar exponent bookkeeping: criticality, Strichartz admissibility,
//! well-posedness thresholds, and the small-dispersion parameter algebra.
//!
//! Everything here is dimension-generic arithmetic (no grids), so `d` is
//! only required to be positive even though fields stop at `d = 3`.

use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// A Lebesgue exponent in `[1, inf]`, with infinity kept symbolic so that
/// reciprocals are exact zeros rather than rounding artifacts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// A validated finite exponent (must be `>= 1`).
    pub fn finite(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 1.0) {
            return Err(Error::Domain(format!(
                "Lebesgue exponent must be a finite number >= 1, got {value}"
            )));
        }
        Ok(Exponent::Finite(value))
    }

    /// `1/p`, exactly 0 for the symbolic infinity.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(v) => 1.0 / v,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "oo" => Ok(Exponent::Infinity),
            other => {
                let v: f64 = other.parse().map_err(|_| {
                    Error::Domain(format!("cannot parse Lebesgue exponent from {other:?}"))
                })?;
                Exponent::finite(v)
            }
        }
    }
}

/// The fixed data of one Cauchy problem: dimension, nonlinearity power,
/// sign of the nonlinearity, and the regularity under discussion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSetup {
    pub d: usize,
    pub nu: f64,
    pub mu: f64,
    pub gamma: f64,
}

impl ProblemSetup {
    pub fn new(d: usize, nu: f64, mu: f64, gamma: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if !(nu.is_finite() && nu > 1.0) {
            return Err(Error::Domain(format!(
                "nonlinearity power must be finite and exceed 1, got {nu}"
            )));
        }
        if mu != 1.0 && mu != -1.0 {
            return Err(Error::Domain(format!("nonlinearity sign must be +1 or -1, got {mu}")));
        }
        if !gamma.is_finite() {
            return Err(Error::Domain("regularity must be finite".into()));
        }
        Ok(ProblemSetup { d, nu, mu, gamma })
    }
}

/// A yes/no answer together with the clause that decided it.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    pub reason: String,
}

/// The scaling-critical regularity `d/2 - 1/(nu - 1)`.
pub fn critical_exponent(d: usize, nu: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(nu.is_finite() && nu > 1.0) {
        return Err(Error::Domain(format!(
            "nonlinearity power must be finite and exceed 1, got {nu}"
        )));
    }
    Ok(d as f64 / 2.0 - 1.0 / (nu - 1.0))
}

/// The Strichartz regularity gap `d/2 - d/q - 1/p`.
pub fn gamma_pq(d: usize, p: Exponent, q: Exponent) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    Ok(d as f64 / 2.0 - d as f64 * q.recip() - p.recip())
}

/// Whether `(p, q)` is an admissible Strichartz pair in dimension `d`:
/// `p, q in [2, inf]`, `(p, q, d) != (2, inf, 3)`, and
/// `2/p + (d-1)/q <= (d-1)/2`.
pub fn is_admissible(d: usize, p: Exponent, q: Exponent) -> Result<Verdict> {
    if d < 2 {
        return Err(Error::Domain(format!(
            "admissibility requires dimension >= 2, got {d}"
        )));
    }
    if p.value() < 2.0 {
        return Ok(Verdict { holds: false, reason: format!("p = {p} lies below 2") });
    }
    if q.value() < 2.0 {
        return Ok(Verdict { holds: false, reason: format!("q = {q} lies below 2") });
    }
    if d == 3 && p == Exponent::Finite(2.0) && q == Exponent::Infinity {
        return Ok(Verdict {
            holds: false,
            reason: "(p, q, d) = (2, inf, 3) is the excluded endpoint triple".into(),
        });
    }
    let lhs = 2.0 * p.recip() + (d as f64 - 1.0) * q.recip();
    let rhs = (d as f64 - 1.0) / 2.0;
    if lhs > rhs + 1e-12 {
        return Ok(Verdict {
            holds: false,
            reason: format!("scaling condition fails: 2/p + (d-1)/q = {lhs} > {rhs} = (d-1)/2"),
        });
    }
    let reason = if (lhs - rhs).abs() <= 1e-12 {
        "admissible, sharp (scaling condition holds with equality)".to_string()
    } else {
        format!("admissible, strict (2/p + (d-1)/q = {lhs} < {rhs})")
    };
    Ok(Verdict { holds: true, reason })
}

/// Smallest positive integer at or above `gamma`.
fn ceil_pos(gamma: f64) -> i64 {
    (gamma.ceil() as i64).max(1)
}

pub fn is_odd_integer(nu: f64) -> bool {
    (nu - nu.round()).abs() < 1e-12 && (nu.round() as i64).rem_euclid(2) == 1
}

/// Whether `gamma` sits strictly above the local-theory threshold:
/// `gamma > 1 - 1/max(nu-1, 4)` for `d = 2`,
/// `gamma > d/2 - 1/max(nu-1, 2)` for `d >= 3`,
/// plus the smoothness bound `ceil(gamma) <= nu` when `nu` is not an odd
/// integer. The threshold inequality is strict; the verdict says so.
pub fn subcritical_check(setup: &ProblemSetup) -> Result<Verdict> {
    let ProblemSetup { d, nu, gamma, .. } = *setup;
    if d < 2 {
        return Err(Error::Domain(format!(
            "the local-theory threshold is defined for dimension >= 2, got {d}"
        )));
    }
    let threshold = if d == 2 {
        1.0 - 1.0 / (nu - 1.0).max(4.0)
    } else {
        d as f64 / 2.0 - 1.0 / (nu - 1.0).max(2.0)
    };
    if gamma <= threshold {
        let qualifier = if gamma == threshold { " (the inequality is strict)" } else { "" };
        return Ok(Verdict {
            holds: false,
            reason: format!("gamma = {gamma} does not exceed the threshold {threshold}{qualifier}"),
        });
    }
    if !is_odd_integer(nu) {
        let k = ceil_pos(gamma);
        if (k as f64) > nu {
            return Ok(Verdict {
                holds: false,
                reason: format!(
                    "smoothness bound fails: nonlinearity is only C^{nu}-like but \
                     gamma = {gamma} needs {k} derivatives"
                ),
            });
        }
    }
    Ok(Verdict {
        holds: true,
        reason: format!("gamma = {gamma} exceeds the strict threshold {threshold}"),
    })
}

/// Whether `gamma` lies in the range where well-posedness fails:
/// `(-inf, -d/2] U [0, gamma_c)` when `gamma_c > 0`, otherwise
/// `(-inf, -d/2]` intersected with `(-inf, gamma_c)`. The `gamma = 0`
/// endpoint is flagged: it is covered by phase decoherence, not by norm
/// inflation.
pub fn illposed_range_check(setup: &ProblemSetup) -> Result<Verdict> {
    let gamma_c = critical_exponent(setup.d, setup.nu)?;
    let half_d = setup.d as f64 / 2.0;
    let gamma = setup.gamma;
    let verdict = if gamma_c > 0.0 {
        if gamma <= -half_d {
            Verdict {
                holds: true,
                reason: format!("gamma = {gamma} <= -d/2 = {}", -half_d),
            }
        } else if gamma == 0.0 {
            Verdict {
                holds: true,
                reason: "gamma = 0 is in range (boundary: covered by the decoherence case, \
                         not norm inflation)"
                    .into(),
            }
        } else if gamma > 0.0 && gamma < gamma_c {
            Verdict {
                holds: true,
                reason: format!("0 < gamma = {gamma} < gamma_c = {gamma_c}"),
            }
        } else {
            Verdict {
                holds: false,
                reason: format!(
                    "gamma = {gamma} lies outside (-inf, {}] U [0, {gamma_c})",
                    -half_d
                ),
            }
        }
    } else if gamma <= -half_d && gamma < gamma_c {
        Verdict {
            holds: true,
            reason: format!("gamma = {gamma} <= -d/2 = {} and < gamma_c = {gamma_c}", -half_d),
        }
    } else {
        Verdict {
            holds: false,
            reason: format!(
                "gamma = {gamma} lies outside (-inf, min(-d/2, gamma_c)) = \
                 (-inf, min({}, {gamma_c}))",
                -half_d
            ),
        }
    };
    Ok(verdict)
}

/// The scaling parameters of the small-dispersion reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallDispersion {
    /// `theta = (d/2 - gamma) / (gamma_c - gamma)`, always `> 1`.
    pub theta: f64,
    /// `lambda = delta^theta`, the space-time dilation.
    pub lambda: f64,
    /// `lambda^(gamma_c - gamma) * delta^(gamma - d/2)`; equals 1 when
    /// `lambda` is exactly `delta^theta`.
    pub epsilon_pred: f64,
}

/// Resolve `(theta, lambda, epsilon)` for a subcritical target `gamma`
/// and dispersion `delta`.
pub fn smalldisp_parameters(setup: &ProblemSetup, delta: f64) -> Result<SmallDispersion> {
    let gamma_c = critical_exponent(setup.d, setup.nu)?;
    let gamma = setup.gamma;
    if gamma >= gamma_c {
        return Err(Error::Domain(format!(
            "dispersion scaling needs gamma < gamma_c, got gamma = {gamma} >= {gamma_c}"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("dispersion must lie in (0, 1], got {delta}")));
    }
    let theta = (setup.d as f64 / 2.0 - gamma) / (gamma_c - gamma);
    let lambda = delta.powf(theta);
    let epsilon_pred = lambda.powf(gamma_c - gamma) * delta.powf(gamma - setup.d as f64 / 2.0);
    debug_assert!(theta > 1.0 && lambda > 0.0 && lambda <= delta);
    Ok(SmallDispersion { theta, lambda, epsilon_pred })
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: Exponent = Exponent::Infinity;

    fn fin(v: f64) -> Exponent {
        Exponent::finite(v).unwrap()
    }

    #[test]
    fn critical_exponent_substitutions() {
        assert_eq!(critical_exponent(1, 3.0).unwrap(), 0.0);
        assert_eq!(critical_exponent(1, 5.0).unwrap(), 0.25);
        assert_eq!(critical_exponent(2, 3.0).unwrap(), 0.5);
        assert!(critical_exponent(1, 1.0).is_err());
        assert!(critical_exponent(1, 0.5).is_err());
    }

    #[test]
    fn critical_exponent_is_monotone_in_nu_and_d() {
        let nus = [1.5, 2.0, 3.0, 5.0, 9.0];
        for d in 1..=3 {
            for w in nus.windows(2) {
                assert!(
                    critical_exponent(d, w[0]).unwrap() < critical_exponent(d, w[1]).unwrap()
                );
            }
        }
        for nu in nus {
            for d in 1..=2 {
                assert!(
                    critical_exponent(d, nu).unwrap() < critical_exponent(d + 1, nu).unwrap()
                );
            }
        }
    }

    #[test]
    fn gamma_pq_substitutions() {
        assert_eq!(gamma_pq(2, INF, fin(2.0)).unwrap(), 0.0);
        assert!((gamma_pq(4, fin(2.0), fin(6.0)).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        for d in 1..=4 {
            assert!((gamma_pq(d, fin(4.0), fin(2.0)).unwrap() + 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn admissibility_cases() {
        // Sharp endpoint in d = 4.
        let v = is_admissible(4, fin(2.0), fin(6.0)).unwrap();
        assert!(v.holds && v.reason.contains("sharp"), "{}", v.reason);
        // The excluded triple.
        let v = is_admissible(3, fin(2.0), INF).unwrap();
        assert!(!v.holds && v.reason.contains("excluded"), "{}", v.reason);
        // Same pair is fine one dimension up.
        assert!(is_admissible(4, fin(2.0), INF).unwrap().holds);
        // Scaling violation in d = 3.
        let v = is_admissible(3, fin(2.0), fin(4.0)).unwrap();
        assert!(!v.holds && v.reason.contains("scaling"), "{}", v.reason);
        // Below-2 exponents are rejected by the definition, not an error.
        assert!(!is_admissible(2, fin(1.5), fin(4.0)).unwrap().holds);
        // Dimension 1 has no admissible pairs at all.
        assert!(is_admissible(1, fin(2.0), fin(2.0)).is_err());
    }

    #[test]
    fn gamma_pq_positive_for_admissible_pairs_below_infinity() {
        let grid = [2.0, 7.0 / 3.0, 3.0, 4.0, 6.0, 8.0, 16.0];
        for d in 2..=4 {
            for &p in &grid {
                for &q in &grid {
                    let (p, q) = (fin(p), fin(q));
                    if is_admissible(d, p, q).unwrap().holds {
                        let g = gamma_pq(d, p, q).unwrap();
                        assert!(g > 0.0, "gamma_pq({d}, {p}, {q}) = {g} should be positive");
                    }
                }
            }
        }
    }

    #[test]
    fn subcritical_thresholds() {
        let s = |d, nu, gamma| ProblemSetup::new(d, nu, 1.0, gamma).unwrap();
        assert!(subcritical_check(&s(2, 3.0, 0.8)).unwrap().holds);
        assert!(!subcritical_check(&s(2, 3.0, 0.75)).unwrap().holds);
        // d = 3, nu = 3: threshold exactly 1, strictly.
        let at = subcritical_check(&s(3, 3.0, 1.0)).unwrap();
        assert!(!at.holds && at.reason.contains("strict"), "{}", at.reason);
        assert!(subcritical_check(&s(3, 3.0, 1.01)).unwrap().holds);
        // Smoothness bound for fractional nu.
        let v = subcritical_check(&s(2, 2.5, 3.0)).unwrap();
        assert!(!v.holds && v.reason.contains("smoothness"), "{}", v.reason);
        // Odd-integer nonlinearities are smooth; no ceiling bound applies.
        assert!(subcritical_check(&s(3, 3.0, 3.5)).unwrap().holds);
        assert!(subcritical_check(&s(1, 3.0, 1.0)).is_err());
    }

    #[test]
    fn illposed_range_cases() {
        let s = |d, nu, gamma| ProblemSetup::new(d, nu, 1.0, gamma).unwrap();
        assert!(illposed_range_check(&s(1, 5.0, 0.1)).unwrap().holds);
        assert!(!illposed_range_check(&s(1, 5.0, -0.2)).unwrap().holds);
        assert!(illposed_range_check(&s(1, 5.0, -0.5)).unwrap().holds);
        // gamma_c = 0 here: both clauses must hold at once.
        assert!(illposed_range_check(&s(2, 2.0, -1.5)).unwrap().holds);
        assert!(!illposed_range_check(&s(2, 2.0, -0.5)).unwrap().holds);
        // The zero endpoint carries its boundary annotation.
        let v = illposed_range_check(&s(1, 5.0, 0.0)).unwrap();
        assert!(v.holds && v.reason.contains("decoherence"), "{}", v.reason);
    }

    #[test]
    fn smalldisp_parameter_algebra() {
        let s = |d, nu, gamma| ProblemSetup::new(d, nu, 1.0, gamma).unwrap();
        let p = smalldisp_parameters(&s(1, 5.0, 0.0), 1e-2).unwrap();
        assert!((p.theta - 2.0).abs() < 1e-15);
        assert!((p.lambda - 1e-4).abs() < 1e-18);
        assert!((p.epsilon_pred - 1.0).abs() < 1e-12);
        let p = smalldisp_parameters(&s(1, 5.0, 0.1), 1e-3).unwrap();
        assert!((p.theta - 8.0 / 3.0).abs() < 1e-13);
        assert!((p.epsilon_pred - 1.0).abs() < 1e-10);
        assert!(smalldisp_parameters(&s(1, 5.0, 0.25), 1e-2).is_err());
        assert!(smalldisp_parameters(&s(1, 5.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn theta_exceeds_one_across_the_subcritical_sweep() {
        for d in 1..=3usize {
            for nu in [2.0, 3.0, 5.0] {
                let gamma_c = critical_exponent(d, nu).unwrap();
                let mut gamma = -2.0;
                while gamma < gamma_c - 1e-9 {
                    let setup = ProblemSetup::new(d, nu, -1.0, gamma).unwrap();
                    let p = smalldisp_parameters(&setup, 0.05).unwrap();
                    assert!(p.theta > 1.0, "theta = {} at d={d}, nu={nu}, gamma={gamma}", p.theta);
                    assert!(p.lambda <= 0.05);
                    gamma += 0.03;
                }
            }
        }
    }

    #[test]
    fn exponent_parsing_and_reciprocals() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), INF);
        assert_eq!("4".parse::<Exponent>().unwrap(), fin(4.0));
        assert!("0.5".parse::<Exponent>().is_err());
        assert_eq!(INF.recip(), 0.0);
        assert_eq!(fin(4.0).recip(), 0.25);
    }
}
