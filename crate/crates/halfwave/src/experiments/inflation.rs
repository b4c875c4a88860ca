//! Norm-inflation mechanism for `0 < gamma < gamma_c`: the exact
//! dispersionless flow stretches the profile's spectrum linearly in
//! time, so `||phi0 exp(i mu t |phi0|^(nu-1))||_{H^gamma} ~ t^gamma`;
//! mapped through the scaling symmetry this turns data of size
//! `epsilon` into solutions of size `epsilon * t^gamma` at times
//! `lambda * t`. Part (a) fits the exact-flow exponent; part (b)
//! evolves the small-dispersion flow and confirms the rescaled family
//! tracks the same power law.

use super::{
    dyadic_lambda, echo, evolve_ladder, fit_line, gaussian_data, predicted_eps, rel_diff,
    scaled_sobolev_norm, Check, ExperimentReport, Series, SweepConfig,
};
use crate::evolution::{mass, zero_dispersion_flow, EquationParams};
use crate::exponents::{critical_exponent, is_odd_integer, smalldisp_parameters, Exponent, ProblemSetup};
use crate::norms::sobolev_norm;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::time::Instant;

pub fn norm_inflation_run(cfg: &SweepConfig, gamma: f64) -> Result<ExperimentReport> {
    let started = Instant::now();
    cfg.validate_single()?;
    let setup = ProblemSetup::new(cfg.setup.d, cfg.setup.nu, cfg.setup.mu, gamma)?;
    let nu = setup.nu;
    let gc = critical_exponent(setup.d, nu)?;
    if !(gc > 0.0 && gamma > 0.0 && gamma < gc) {
        return Err(Error::Domain(format!(
            "inflation mechanism needs 0 < gamma < gamma_c, got gamma = {gamma}, gamma_c = {gc}"
        )));
    }
    if !is_odd_integer(nu) && gamma > nu - 1.0 {
        return Err(Error::Domain(format!(
            "need nu an odd integer or gamma <= nu - 1, got (nu, gamma) = ({nu}, {gamma})"
        )));
    }
    let delta = *cfg
        .deltas
        .iter()
        .filter(|&&d| d > 0.0)
        .last()
        .ok_or_else(|| Error::Domain("need one nonzero dispersion value".into()))?;
    let (lo, hi) = cfg.fit_window.unwrap_or((5.0, 50.0));
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("bad inner-time window ({lo}, {hi})")));
    }
    let rungs = 10usize;
    let ladder: Vec<f64> =
        (0..rungs).map(|i| lo + (hi - lo) * i as f64 / (rungs - 1) as f64).collect();

    let grid = cfg.grid()?;
    let phi0 = gaussian_data(grid)?;
    let exact_params = EquationParams::new(nu, setup.mu, 0.0)?;
    let theta = smalldisp_parameters(&setup, delta)?.theta;
    let (lambda, m) = dyadic_lambda(delta, theta);

    // Part (a): the dispersionless flow, from the closed formula.
    let ln_t: Vec<f64> = ladder.iter().map(|t| t.ln()).collect();
    let mut exact_norms = Vec::with_capacity(rungs);
    for &t in &ladder {
        let state = zero_dispersion_flow(&phi0, t, &exact_params)?;
        exact_norms.push(sobolev_norm(&state, gamma, false, Exponent::Finite(2.0))?);
    }
    let exact_fit = fit_line(&ln_t, &exact_norms.iter().map(|v| v.ln()).collect::<Vec<_>>())?;
    // Spectral-resolution certificate for the exact leg: the same norm on a
    // doubled grid at the latest (widest-spectrum) time.
    let spectral_drift = {
        let fine = gaussian_data(grid.refined(2)?)?;
        let state = zero_dispersion_flow(&fine, hi, &exact_params)?;
        let refined = sobolev_norm(&state, gamma, false, Exponent::Finite(2.0))?;
        rel_diff(*exact_norms.last().unwrap(), refined)
    };
    let exact_valid = spectral_drift <= 1e-3;
    // Modulus invariance: the L2 norm must not move at all.
    let l2_drift = {
        let state = zero_dispersion_flow(&phi0, hi, &exact_params)?;
        rel_diff(mass(&state).sqrt(), mass(&phi0).sqrt())
    };

    // Part (b): the dispersive flow at small delta, measured in the
    // rescaled frame (u-frame times are lambda * t_inner).
    let params = EquationParams::new(nu, setup.mu, delta)?;
    let eps_measured = scaled_sobolev_norm(&phi0, gamma, lambda, delta, nu, false)?;
    let eps_predicted = predicted_eps(&setup, lambda, delta);
    let run_growth = |dt: f64| -> Result<Vec<f64>> {
        let states = evolve_ladder(&phi0, &ladder, dt, &params)?;
        states
            .iter()
            .map(|s| Ok(scaled_sobolev_norm(s, gamma, lambda, delta, nu, false)? / eps_measured))
            .collect()
    };
    let growth = match run_growth(cfg.dt) {
        Ok(g) => g,
        Err(e) => {
            return Ok(ExperimentReport::assemble(
                "inflation",
                inputs(cfg, gamma, delta, lambda, m, &ladder),
                Series::new(&["t_inner", "exact_norm", "growth_ratio"]),
                BTreeMap::new(),
                vec![Check::inconclusive(
                    "evolved leg completion",
                    format!("solver failed before t_inner = {hi}: {e}"),
                )],
                0.0,
                started,
                vec![],
            ));
        }
    };
    let growth_fit = fit_line(&ln_t, &growth.iter().map(|v| v.ln()).collect::<Vec<_>>())?;

    // Self-convergence at the far end of the ladder.
    let solver_margin = {
        let half = run_growth(0.5 * cfg.dt)?;
        rel_diff(*growth.last().unwrap(), *half.last().unwrap())
    };
    let fit_valid = solver_margin <= 0.1;

    // The t = 0 growth ratio is 1 by definition of the normalization; we
    // confirm it through the same measurement path.
    let ratio0 = scaled_sobolev_norm(&phi0, gamma, lambda, delta, nu, false)? / eps_measured;

    let mut series = Series::new(&["t_inner", "exact_norm", "growth_ratio"]);
    for ((&t, &en), &g) in ladder.iter().zip(&exact_norms).zip(&growth) {
        series.push(vec![t, en, g]);
    }
    let mut fits = BTreeMap::new();
    fits.insert("exact_flow_slope".to_string(), exact_fit);
    fits.insert("evolved_growth_slope".to_string(), growth_fit);

    let eps_ratio = eps_measured / eps_predicted;
    let checks = vec![
        Check::band(
            "exact-flow growth exponent = gamma +/- 0.02",
            exact_fit.slope,
            gamma - 0.02,
            gamma + 0.02,
            exact_valid,
        ),
        {
            // Tracking is a pointwise envelope, not a slope band: pin the
            // exponent at gamma, fit only the amplitude, and require every
            // rung within 20% of that power law. (A slope band would be
            // tighter than the exact leg's own +/- 0.02 and would punish
            // the physical late-time saturation of the mechanism.)
            let ln_a = ln_t
                .iter()
                .zip(&growth)
                .map(|(lt, g)| g.ln() - gamma * lt)
                .sum::<f64>()
                / ln_t.len() as f64;
            let envelope = ln_t
                .iter()
                .zip(&growth)
                .map(|(lt, g)| (g.ln() - gamma * lt - ln_a).abs())
                .fold(0.0f64, f64::max);
            let cap = 1.2f64.ln();
            if fit_valid {
                Check::gauge(
                    "evolved rescaled family tracks t^gamma within 20%",
                    (cap - envelope) / cap,
                    format!("worst relative deviation {:.4}", envelope.exp_m1()),
                )
            } else {
                Check::inconclusive(
                    "evolved rescaled family tracks t^gamma within 20%",
                    format!("solver margin {solver_margin:.2e} exceeds 10%"),
                )
            }
        },
        Check::band(
            "initial data sits at the predicted epsilon scale",
            eps_ratio,
            0.25,
            4.0,
            true,
        ),
        Check::gauge(
            "t = 0 growth ratio is 1",
            (1e-13 - (ratio0 - 1.0).abs()) / 1e-13,
            format!("ratio {ratio0}"),
        ),
        Check::gauge(
            "exact-flow L2 norm is time-invariant",
            (1e-13 - l2_drift) / 1e-13,
            format!("relative drift {l2_drift:.2e} at t = {hi}"),
        ),
        Check::gauge(
            "solver self-convergence within 10%",
            (0.1 - solver_margin) / 0.1,
            format!("dt vs dt/2 growth discrepancy {solver_margin:.3e} at t_inner = {hi}"),
        ),
    ];

    let notes = vec![
        format!("exact-leg spectral refinement drift {spectral_drift:.2e} at t_inner = {hi}"),
        "u-frame norms evaluated by exact change of variables in the inner frame".to_string(),
        format!("u-frame evaluation times are lambda * t_inner with lambda = {lambda:.6e}"),
    ];
    Ok(ExperimentReport::assemble(
        "inflation",
        inputs(cfg, gamma, delta, lambda, m, &ladder),
        series,
        fits,
        checks,
        solver_margin,
        started,
        notes,
    ))
}

fn inputs(
    cfg: &SweepConfig,
    gamma: f64,
    delta: f64,
    lambda: f64,
    m: i32,
    ladder: &[f64],
) -> BTreeMap<String, String> {
    echo(&[
        ("d", cfg.setup.d.to_string()),
        ("nu", cfg.setup.nu.to_string()),
        ("mu", cfg.setup.mu.to_string()),
        ("gamma", gamma.to_string()),
        ("delta", delta.to_string()),
        ("lambda", format!("{lambda:e}")),
        ("m", m.to_string()),
        ("t_inner", format!("{ladder:?}")),
        ("n", cfg.n.to_string()),
        ("length", cfg.length.to_string()),
        ("dt", cfg.dt.to_string()),
    ])
}
