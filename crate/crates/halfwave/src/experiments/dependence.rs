//! Continuous dependence on the data in a subcritical regime: nudging
//! the initial state by `eta * w` must move the whole trajectory by at
//! most `K * eta` in `L^2`, with one `K` serving every `eta`. A
//! stable linear-response constant across two decades of perturbation
//! sizes is the evidence; slightly weaker norms of the final-time gap
//! must vanish with `eta`.

use super::{echo, fit_line, gaussian_data, rel_diff, Check, ExperimentReport, Series};
use crate::evolution::{evolve, mass, EquationParams, MonitorSpec, Trajectory};
use crate::exponents::{subcritical_check, Exponent, ProblemSetup};
use crate::grid::{Field, GridSpec};
use crate::norms::sobolev_norm;
use crate::spectral::{propagate_linear, synthesize, Recipe};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct DependenceConfig {
    pub d: usize,
    pub nu: f64,
    pub mu: f64,
    pub gamma: f64,
    pub n: usize,
    pub length: f64,
    pub t_final: f64,
    pub dt: f64,
    /// Strictly decreasing perturbation sizes.
    pub etas: Vec<f64>,
}

impl Default for DependenceConfig {
    fn default() -> Self {
        DependenceConfig {
            d: 2,
            nu: 3.0,
            mu: 1.0,
            gamma: 1.0,
            n: 256,
            length: 40.0,
            t_final: 0.5,
            dt: 2e-3,
            etas: vec![1e-2, 1e-3, 1e-4],
        }
    }
}

fn l2_distance(a: &Field, b: &Field) -> Result<f64> {
    Ok(mass(&a.sub(b)?).sqrt())
}

pub fn continuous_dependence_probe(cfg: &DependenceConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let setup = ProblemSetup::new(cfg.d, cfg.nu, cfg.mu, cfg.gamma)?;
    let verdict = subcritical_check(&setup)?;
    if !verdict.holds {
        return Err(Error::Domain(format!(
            "dependence probe needs a subcritical setup: {}",
            verdict.reason
        )));
    }
    if cfg.etas.len() < 2
        || cfg.etas.iter().any(|&e| !(e > 0.0) || !e.is_finite())
        || cfg.etas.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::Domain(
            "perturbation sizes must be a strictly decreasing positive list (length >= 2)".into(),
        ));
    }
    if !(cfg.t_final > 0.0 && cfg.dt > 0.0) {
        return Err(Error::Domain("window and step must be positive".into()));
    }
    let grid = GridSpec::new(cfg.d, cfg.n, cfg.length)?;
    let params = EquationParams::new(cfg.nu, cfg.mu, 1.0)?;
    let l2 = Exponent::Finite(2.0);

    let u0 = gaussian_data(grid)?;
    let w_raw = synthesize(grid, Recipe::Gaussian { sigma: 1.5, amplitude: 1.0, center: [0.0; 3] })?;
    let w_h = sobolev_norm(&w_raw, cfg.gamma, false, l2)?;
    let w = w_raw.scaled(Complex64::new(1.0 / w_h, 0.0));
    let w_l2 = mass(&w).sqrt();

    let steps = (cfg.t_final / cfg.dt).round().max(1.0) as usize;
    let monitor = MonitorSpec { stride: (steps / 25).max(1), gammas: vec![], ceiling: None };
    let run = |data: &Field, dt: f64| -> Result<Trajectory> {
        evolve(data, cfg.t_final, dt, &params, &monitor)
    };

    let base = run(&u0, cfg.dt)?;
    // Sup over the recorded nodes of the trajectory gap, divided by eta.
    let response = |traj: &Trajectory, pert: &Trajectory, eta: f64| -> Result<f64> {
        let mut sup: f64 = 0.0;
        for (a, b) in traj.states.iter().zip(&pert.states) {
            sup = sup.max(l2_distance(a, b)?);
        }
        Ok(sup / eta)
    };

    let mut series = Series::new(&["eta", "k_sup", "hlow_final"]);
    let mut ks = Vec::new();
    let mut hlows = Vec::new();
    for &eta in &cfg.etas {
        let data = u0.add(&w.scaled(Complex64::new(eta, 0.0)))?;
        let pert = run(&data, cfg.dt)?;
        let k = response(&base, &pert, eta)?;
        let hlow = sobolev_norm(
            &pert.states.last().unwrap().sub(base.states.last().unwrap())?,
            cfg.gamma - 0.5,
            false,
            l2,
        )?;
        ks.push(k);
        hlows.push(hlow);
        series.push(vec![eta, k, hlow]);
    }

    // Step-halving certificate on the smallest perturbation, where the
    // trajectory gap is most delicate relative to round-off.
    let eta_min = *cfg.etas.last().unwrap();
    let solver_margin = {
        let data = u0.add(&w.scaled(Complex64::new(eta_min, 0.0)))?;
        let base_half = run(&u0, 0.5 * cfg.dt)?;
        let pert_half = run(&data, 0.5 * cfg.dt)?;
        let k_half = {
            // dt/2 records twice as many nodes; compare on the coarse ones.
            let mut sup: f64 = 0.0;
            for &t in &base.times {
                let jj = base_half
                    .times
                    .iter()
                    .position(|&s| (s - t).abs() <= 1e-9 * cfg.t_final)
                    .ok_or_else(|| Error::Domain("refined trajectory misses a node".into()))?;
                sup = sup.max(l2_distance(&base_half.states[jj], &pert_half.states[jj])?);
            }
            sup / eta_min
        };
        rel_diff(*ks.last().unwrap(), k_half)
    };
    let certified = solver_margin <= 0.1;

    // eta = 0 perturbs nothing: the two trajectories are the same
    // computation and the gap must be exactly zero.
    let zero_gap = {
        let data = u0.add(&w.scaled(Complex64::new(0.0, 0.0)))?;
        let pert = run(&data, cfg.dt)?;
        let mut sup: f64 = 0.0;
        for (a, b) in base.states.iter().zip(&pert.states) {
            sup = sup.max(l2_distance(a, b)?);
        }
        sup
    };

    // Free flow moves the perturbation isometrically in L^2.
    let iso_drift = {
        let mut worst: f64 = 0.0;
        for &t in base.times.iter().skip(1) {
            let moved = mass(&propagate_linear(&w, t, 1.0)?).sqrt();
            worst = worst.max(rel_diff(moved, w_l2));
        }
        worst
    };

    let worst_pair = ks
        .windows(2)
        .map(|p| p[1] / p[0])
        .max_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()))
        .unwrap();
    let hlow_worst = hlows.windows(2).map(|p| p[1] / p[0]).fold(f64::NEG_INFINITY, f64::max);

    let checks = vec![
        Check::band(
            "linear-response constant stable across perturbation sizes",
            worst_pair,
            0.8,
            1.2,
            certified,
        ),
        Check::gauge(
            "weaker-norm final gap vanishes with the perturbation",
            (0.5 - hlow_worst) / 0.5,
            format!("largest successive ratio of the weaker-norm gaps {hlow_worst:.3e}"),
        ),
        Check::gauge(
            "zero perturbation leaves the trajectory untouched",
            if zero_gap == 0.0 { 1.0 } else { -1.0 },
            format!("recorded gap {zero_gap:.3e}"),
        ),
        Check::gauge(
            "free flow transports the perturbation isometrically",
            1e-12 - iso_drift,
            format!("largest relative drift of the perturbation's size {iso_drift:.3e}"),
        ),
        Check::gauge(
            "solver self-convergence within 10%",
            (0.1 - solver_margin) / 0.1,
            format!("dt vs dt/2 movement of the response constant {solver_margin:.3e}"),
        ),
    ];

    let mut fits = BTreeMap::new();
    let xs: Vec<f64> = cfg.etas.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = ks.iter().zip(&cfg.etas).map(|(k, e)| (k * e).ln()).collect();
    fits.insert("linear_response_slope".to_string(), fit_line(&xs, &ys)?);

    let inputs = echo(&[
        ("d", cfg.d.to_string()),
        ("nu", cfg.nu.to_string()),
        ("mu", cfg.mu.to_string()),
        ("gamma", cfg.gamma.to_string()),
        ("n", cfg.n.to_string()),
        ("length", cfg.length.to_string()),
        ("t_final", cfg.t_final.to_string()),
        ("dt", cfg.dt.to_string()),
        ("etas", cfg.etas.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")),
    ]);
    let notes = vec![format!(
        "perturbation profile: Gaussian of width 1.5 normalized to unit H^{} size",
        cfg.gamma
    )];
    Ok(ExperimentReport::assemble(
        "dependence", inputs, series, fits, checks, solver_margin, started, notes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Verdict;

    #[test]
    fn subcritical_setup_responds_linearly() {
        let cfg = DependenceConfig {
            n: 64,
            length: 30.0,
            t_final: 0.25,
            dt: 2.5e-3,
            ..DependenceConfig::default()
        };
        let report = continuous_dependence_probe(&cfg).unwrap();
        assert_ne!(report.verdict, Verdict::Fail, "checks: {:#?}", report.checks);
        assert_eq!(report.series.len(), 3);
        let slope = report.fits["linear_response_slope"].slope;
        assert!((slope - 1.0).abs() < 0.1, "sup-gap should scale linearly, slope {slope}");
        let zero = report.checks.iter().find(|c| c.name.contains("zero perturbation")).unwrap();
        assert_eq!(zero.verdict, Verdict::Pass);
    }

    #[test]
    fn supercritical_setups_are_rejected() {
        let cfg = DependenceConfig { gamma: 0.2, ..DependenceConfig::default() };
        assert!(continuous_dependence_probe(&cfg).is_err());
    }

    #[test]
    fn eta_lists_must_decrease() {
        let cfg = DependenceConfig { etas: vec![1e-3, 1e-2], ..DependenceConfig::default() };
        assert!(continuous_dependence_probe(&cfg).is_err());
    }
}
