//! Small-data scattering probe: undo the free flow and watch
//! `v(t) = e^{-it Lambda} u(t)` settle down. If the solution scatters,
//! the ladder `||v(2t) - v(t)||` is a Cauchy tail and must shrink as
//! `t` doubles. Qualitative by design — a periodic box eventually
//! recycles outgoing waves, so non-decay is inconclusive, not a
//! refutation.

use super::{echo, evolve_ladder, rel_diff, Check, ExperimentReport, Series};
use crate::evolution::EquationParams;
use crate::exponents::{critical_exponent, Exponent};
use crate::grid::{Field, GridSpec};
use crate::norms::sobolev_norm;
use crate::spectral::{propagate_linear, synthesize, Recipe};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct ScatteringConfig {
    pub nu: f64,
    pub mu: f64,
    pub n: usize,
    pub length: f64,
    /// Critical-norm size the Gaussian data is scaled to.
    pub eps0: f64,
    /// Last rung of the geometric time ladder 1, 2, 4, ...
    pub t_max: f64,
    pub dt: f64,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        ScatteringConfig {
            nu: 7.0,
            mu: 1.0,
            n: 256,
            length: 80.0,
            eps0: 1e-2,
            t_max: 16.0,
            dt: 0.05,
        }
    }
}

/// The two-dimensional small-data regime: `nu > 5` keeps the critical
/// regularity high enough for the global theory this probes.
pub fn scattering_probe(cfg: &ScatteringConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    if cfg.nu <= 5.0 {
        return Err(Error::Domain(format!(
            "the two-dimensional scattering regime needs nu > 5, got {}",
            cfg.nu
        )));
    }
    if !(cfg.eps0 > 0.0 && cfg.eps0.is_finite()) {
        return Err(Error::Domain("data size must be positive".into()));
    }
    if cfg.t_max < 4.0 {
        return Err(Error::Domain(format!(
            "the ladder needs at least three rungs (t_max >= 4), got {}",
            cfg.t_max
        )));
    }
    let grid = GridSpec::new(2, cfg.n, cfg.length)?;
    let gc = critical_exponent(2, cfg.nu)?;
    let params = EquationParams::new(cfg.nu, cfg.mu, 1.0)?;
    let l2 = Exponent::Finite(2.0);

    let raw = synthesize(grid, Recipe::Gaussian { sigma: 1.0, amplitude: 1.0, center: [0.0; 3] })?;
    let scale = cfg.eps0 / sobolev_norm(&raw, gc, true, l2)?;
    let u0 = raw.scaled(Complex64::new(scale, 0.0));
    let data_norm = sobolev_norm(&u0, gc, true, l2)?;

    let mut ladder = vec![1.0];
    while ladder.last().unwrap() * 2.0 <= cfg.t_max * (1.0 + 1e-12) {
        ladder.push(ladder.last().unwrap() * 2.0);
    }
    let inputs = echo(&[
        ("d", "2".into()),
        ("nu", cfg.nu.to_string()),
        ("mu", cfg.mu.to_string()),
        ("gamma_c", gc.to_string()),
        ("eps0", cfg.eps0.to_string()),
        ("n", cfg.n.to_string()),
        ("length", cfg.length.to_string()),
        ("dt", cfg.dt.to_string()),
        ("t_ladder", ladder.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")),
    ]);

    // ||v(2t) - v(t)||_{H^gc} along the ladder plus the final state, for
    // a given step size.
    let run = |dt: f64| -> Result<(Vec<f64>, Field)> {
        let states = evolve_ladder(&u0, &ladder, dt, &params)?;
        let final_state = states.last().expect("nonempty ladder").clone();
        let vs: Vec<Field> = states
            .iter()
            .zip(&ladder)
            .map(|(u, &t)| propagate_linear(u, -t, 1.0))
            .collect::<Result<_>>()?;
        let diffs = vs
            .windows(2)
            .map(|w| sobolev_norm(&w[1].sub(&w[0])?, gc, false, l2))
            .collect::<Result<Vec<f64>>>()?;
        Ok((diffs, final_state))
    };
    let (diffs, final_full) = match run(cfg.dt) {
        Ok(v) => v,
        Err(e) => {
            return Ok(ExperimentReport::assemble(
                "scattering",
                inputs,
                Series::new(&["t", "difference", "linear_difference"]),
                BTreeMap::new(),
                vec![Check::inconclusive("solver completion", format!("evolution failed: {e}"))],
                0.0,
                started,
                vec![],
            ))
        }
    };
    // Self-convergence is certified on the state itself: the ladder
    // differences can sit arbitrarily close to round-off (they measure a
    // near-cancellation), so their dt-stability is ill-conditioned and
    // says nothing about the solver.
    let (_, final_half) = run(0.5 * cfg.dt)?;
    let solver_margin = {
        let norm = sobolev_norm(&final_half, gc, false, l2)?;
        let err = sobolev_norm(&final_full.sub(&final_half)?, gc, false, l2)?;
        err / norm
    };
    let certified = solver_margin <= 0.1;

    // Control leg: free evolution. Undoing the propagator must return
    // the data itself, so every ladder difference sits at round-off.
    let linear_diffs: Vec<f64> = {
        let vs: Vec<Field> = ladder
            .iter()
            .map(|&t| propagate_linear(&propagate_linear(&u0, t, 1.0)?, -t, 1.0))
            .collect::<Result<_>>()?;
        vs.windows(2)
            .map(|w| sobolev_norm(&w[1].sub(&w[0])?, gc, false, l2))
            .collect::<Result<_>>()?
    };
    let linear_worst = linear_diffs.iter().cloned().fold(0.0, f64::max);
    let u0_hnorm = sobolev_norm(&u0, gc, false, l2)?;

    let mut series = Series::new(&["t", "difference", "linear_difference"]);
    for (i, &diff) in diffs.iter().enumerate() {
        series.push(vec![ladder[i + 1], diff, linear_diffs[i]]);
    }

    let monotone = diffs.windows(2).all(|w| w[1] < w[0]);
    let worst_ratio =
        diffs.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max);
    // A ladder whose differences all sit at transform round-off carries
    // no nonlinear signal; any trend in it is noise.
    let signal_floor = 1e-12 * u0_hnorm;
    let vacuous = diffs.iter().all(|&x| x <= signal_floor);
    let mut checks = vec![Check::gauge(
        "data sits at the requested critical-norm size",
        1e-12 - rel_diff(data_norm, cfg.eps0),
        format!("measured {data_norm:.12e} against requested {:.12e}", cfg.eps0),
    )];
    checks.push(if vacuous {
        Check::inconclusive(
            "scattering-limit differences decrease along the ladder",
            format!(
                "every ladder difference sits below 1e-12 of the data norm ({signal_floor:.3e}); \
                 the nonlinear signal is at round-off for this data size"
            ),
        )
    } else if monotone {
        Check::gauge(
            "scattering-limit differences decrease along the ladder",
            1.0 - worst_ratio,
            format!("largest successive ratio {worst_ratio:.4}"),
        )
    } else {
        Check::inconclusive(
            "scattering-limit differences decrease along the ladder",
            format!(
                "largest successive ratio {worst_ratio:.4} >= 1; on a periodic box outgoing \
                 waves re-enter, so non-decay here does not contradict free-space decay"
            ),
        )
    });
    if monotone && !vacuous {
        let min_factor = diffs.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
        checks.push(if certified {
            Check::gauge(
                "per-doubling decay factor at least 1.5",
                (min_factor - 1.5) / 1.5,
                format!("weakest doubling shrank the tail by {min_factor:.3}x"),
            )
        } else {
            Check::inconclusive(
                "per-doubling decay factor at least 1.5",
                format!("solver margin {solver_margin:.2e} exceeds 10%"),
            )
        });
    }
    checks.push(Check::gauge(
        "free evolution has a stationary scattering limit",
        1e-12 * u0_hnorm - linear_worst,
        format!("largest free-flow ladder difference {linear_worst:.3e}"),
    ));
    checks.push(Check::gauge(
        "solver self-convergence within 10%",
        (0.1 - solver_margin) / 0.1,
        format!(
            "dt vs dt/2 relative state discrepancy {solver_margin:.3e} at t = {}",
            ladder.last().unwrap()
        ),
    ));

    let mut fits = BTreeMap::new();
    if diffs.iter().all(|&x| x > 0.0) {
        let xs: Vec<f64> = ladder[1..].iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = diffs.iter().map(|x| x.ln()).collect();
        fits.insert("cauchy_decay_slope".to_string(), super::fit_line(&xs, &ys)?);
    }

    let notes = vec![
        "periodic-box caveat: wave packets wrap around at long times, weakening free-space \
         dispersion; the verdict is a trend statement, not a limit claim"
            .to_string(),
        "free-evolution control leg included; its ladder differences sit at machine round-off"
            .to_string(),
    ];
    Ok(ExperimentReport::assemble(
        "scattering", inputs, series, fits, checks, solver_margin, started, notes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Verdict;
    use crate::spectral::to_spectral;

    #[test]
    fn small_gaussian_data_relaxes_along_the_ladder() {
        // eps0 large enough that the nonlinear ladder signal clears the
        // round-off floor, small enough to stay in the small-data regime.
        let cfg = ScatteringConfig {
            n: 128,
            length: 40.0,
            eps0: 0.3,
            t_max: 8.0,
            ..ScatteringConfig::default()
        };
        let report = scattering_probe(&cfg).unwrap();
        assert_ne!(report.verdict, Verdict::Fail, "checks: {:#?}", report.checks);
        assert_eq!(report.series.len(), 3, "rungs 2, 4, 8");
        let free = report.series.column("linear_difference").unwrap();
        assert!(free.iter().all(|&x| x < 1e-12), "free flow must be stationary");
    }

    #[test]
    fn zero_data_gives_exactly_zero_differences() {
        let grid = GridSpec::new(2, 32, 20.0).unwrap();
        let zero = Field::new(grid, crate::grid::Space::Physical, vec![Complex64::ZERO; grid.sites()])
            .unwrap();
        let params = EquationParams::new(7.0, 1.0, 1.0).unwrap();
        let states = evolve_ladder(&zero, &[1.0, 2.0], 0.1, &params).unwrap();
        for (u, t) in states.iter().zip([1.0, 2.0]) {
            let v = propagate_linear(u, -t, 1.0).unwrap();
            assert!(to_spectral(&v).unwrap().values().iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn mass_subcritical_powers_are_rejected() {
        let cfg = ScatteringConfig { nu: 3.0, ..ScatteringConfig::default() };
        assert!(scattering_probe(&cfg).is_err());
    }
}
