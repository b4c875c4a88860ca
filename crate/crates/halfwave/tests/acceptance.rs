//! Acceptance suite: ten end-to-end criteria covering conservation,
//! exact-flow identities, solver cross-validation, the small-dispersion
//! rate, initial-data scaling, norm inflation, decoherence, negative
//! regularity growth, the norm machinery, and the inequality probes.
//! Each test prints a single PASS/FAIL line (visible with --nocapture)
//! and asserts the stated tolerances.

use std::time::Instant;

use halfwave::evolution::{
    evolve, mass, picard_solve, strang_step, zero_dispersion_flow, EquationParams, MonitorSpec,
};
use halfwave::experiments::{
    decoherence::decoherence_run,
    inflation::norm_inflation_run,
    negative_gamma::negative_gamma_run,
    norm_scaling::initial_norm_scaling,
    probes::{chain_rule_suite, product_rule_suite, ProbeSuiteConfig},
    small_dispersion::small_dispersion_sweep,
    strichartz::{strichartz_probe, StrichartzConfig},
    ExperimentReport, SweepConfig, Verdict,
};
use halfwave::exponents::{Exponent, ProblemSetup};
use halfwave::norms::{
    besov_comparability_band, besov_norm, dyadic_range, lp_project, lq_norm, sobolev_norm, Block,
};
use halfwave::spectral::{
    propagate_linear, random_band_limited, synthesize, to_physical, Recipe,
};
use halfwave::{Field, GridSpec};

fn criterion(n: usize, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("{tag} criterion {n}: {detail}");
    assert!(ok, "criterion {n}: {detail}");
}

fn l2(f: &Field) -> f64 {
    lq_norm(f, Exponent::Finite(2.0)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn gaussian(grid: GridSpec) -> Field {
    synthesize(grid, Recipe::Gaussian { sigma: 1.0, amplitude: 1.0, center: [0.0; 3] }).unwrap()
}

/// Every check whose name contains `needle` must exist and pass.
fn checks_pass(report: &ExperimentReport, needle: &str) -> bool {
    let mut found = false;
    for c in &report.checks {
        if c.name.contains(needle) {
            found = true;
            if c.verdict != Verdict::Pass {
                return false;
            }
        }
    }
    found
}

#[test]
fn criterion_01_conservation() {
    let started = Instant::now();
    let u0 = gaussian(GridSpec::new(1, 1024, 60.0).unwrap());
    let params = EquationParams::new(3.0, 1.0, 1.0).unwrap();
    // Record on a shared time comb so the two step sizes are comparable.
    let drifts = |dt: f64, stride: usize| {
        let spec = MonitorSpec { stride, gammas: vec![], ceiling: None };
        let traj = evolve(&u0, 5.0, dt, &params, &spec).unwrap();
        let m0 = traj.monitors[0].mass;
        let e0 = traj.monitors[0].energy;
        let mut mass_drift = 0.0f64;
        let mut energy_drift = 0.0f64;
        for row in &traj.monitors {
            mass_drift = mass_drift.max(rel(row.mass, m0));
            energy_drift = energy_drift.max(rel(row.energy, e0));
        }
        (mass_drift, energy_drift)
    };
    let (mass_drift, energy_drift) = drifts(1e-3, 500);
    let (_, energy_half) = drifts(5e-4, 1000);
    let ratio = energy_drift / energy_half.max(f64::MIN_POSITIVE);
    let elapsed = started.elapsed().as_secs_f64();

    let mut bad = Vec::new();
    if !(mass_drift <= 1e-10) {
        bad.push(format!("mass drift {mass_drift:.3e} > 1e-10"));
    }
    if !(energy_drift <= 1e-5) {
        bad.push(format!("energy drift {energy_drift:.3e} > 1e-5"));
    }
    if !(3.6..=4.4).contains(&ratio) {
        bad.push(format!("dt-halving ratio {ratio:.3} outside [3.6, 4.4]"));
    }
    if elapsed > 10.0 {
        bad.push(format!("runtime {elapsed:.1}s > 10s"));
    }
    criterion(
        1,
        bad.is_empty(),
        &if bad.is_empty() {
            format!(
                "mass drift {mass_drift:.2e}, energy drift {energy_drift:.2e}, \
                 halving ratio {ratio:.2}, {elapsed:.1}s"
            )
        } else {
            bad.join("; ")
        },
    );
}

#[test]
fn criterion_02_exact_flow_identities() {
    let grid = GridSpec::new(1, 256, 30.0).unwrap();
    let phi0 = to_physical(&random_band_limited(grid, 11, 0.5, 1.0).unwrap()).unwrap();
    let params = EquationParams::new(3.0, 1.0, 0.0).unwrap();

    // Pointwise modulus invariance of the dispersionless flow.
    let flowed = zero_dispersion_flow(&phi0, 3.7, &params).unwrap();
    let scale = phi0.max_abs();
    let mod_dev = phi0
        .values()
        .iter()
        .zip(flowed.values())
        .map(|(a, b)| (a.norm() - b.norm()).abs())
        .fold(0.0f64, f64::max)
        / scale;

    // Dispersionless split-step must reproduce the closed formula.
    let mut u = phi0.clone();
    for _ in 0..100 {
        u = strang_step(&u, 0.01, &params).unwrap();
    }
    let exact = zero_dispersion_flow(&phi0, 1.0, &params).unwrap();
    let split_gap = l2(&u.sub(&exact).unwrap()) / l2(&exact);

    // Unitarity of the free propagator.
    let n0 = l2(&phi0);
    let unitarity = [(2.3, 0.7), (10.0, 1.0), (1.0, 1e-3)]
        .iter()
        .map(|&(t, delta)| rel(l2(&propagate_linear(&phi0, t, delta).unwrap()), n0))
        .fold(0.0f64, f64::max);

    let mut bad = Vec::new();
    if !(mod_dev <= 1e-15) {
        bad.push(format!("modulus deviation {mod_dev:.3e} > 1e-15"));
    }
    if !(split_gap <= 1e-13) {
        bad.push(format!("delta=0 split-step gap {split_gap:.3e} > 1e-13"));
    }
    if !(unitarity <= 1e-12) {
        bad.push(format!("propagator norm drift {unitarity:.3e} > 1e-12"));
    }
    criterion(
        2,
        bad.is_empty(),
        &if bad.is_empty() {
            format!(
                "modulus dev {mod_dev:.1e}, split-step gap {split_gap:.1e}, \
                 unitarity drift {unitarity:.1e}"
            )
        } else {
            bad.join("; ")
        },
    );
}

#[test]
fn criterion_03_picard_cross_validation() {
    let started = Instant::now();
    let u0 = gaussian(GridSpec::new(1, 256, 30.0).unwrap());
    let params = EquationParams::new(3.0, 1.0, 1.0).unwrap();
    let run = |t_final: f64| picard_solve(&u0, t_final, 101, &params, 1e-11, 80).unwrap();

    let (traj_long, rep_long) = run(0.1);
    let (_, rep_short) = run(0.05);
    let spec = MonitorSpec { stride: 1000, gammas: vec![], ceiling: None };
    let split = evolve(&u0, 0.1, 1e-4, &params, &spec).unwrap();
    let gap =
        l2(&traj_long.last_state().sub(split.last_state()).unwrap()) / l2(split.last_state());

    let worst = |factors: &[f64]| factors.iter().cloned().fold(0.0f64, f64::max);
    let f_long = worst(&rep_long.factors);
    let f_short = worst(&rep_short.factors);
    let elapsed = started.elapsed().as_secs_f64();

    let mut bad = Vec::new();
    if !(gap <= 1e-5) {
        bad.push(format!("Picard vs split-step L2 gap {gap:.3e} > 1e-5"));
    }
    if !(rep_long.factors.len() >= 3 && f_long < 1.0) {
        bad.push(format!("contraction factors not geometric: max {f_long:.3}"));
    }
    if !(f_short < f_long) {
        bad.push(format!(
            "contraction must tighten as the horizon shrinks: {f_short:.3} !< {f_long:.3}"
        ));
    }
    if elapsed > 30.0 {
        bad.push(format!("runtime {elapsed:.1}s > 30s"));
    }
    criterion(
        3,
        bad.is_empty(),
        &if bad.is_empty() {
            format!(
                "L2 gap {gap:.2e}, contraction {f_long:.3} (T=0.1) vs {f_short:.3} (T=0.05), \
                 {} iterations, {elapsed:.1}s",
                rep_long.iterations
            )
        } else {
            bad.join("; ")
        },
    );
}

#[test]
fn criterion_04_small_dispersion_rate() {
    let started = Instant::now();
    let cfg = SweepConfig {
        setup: ProblemSetup::new(1, 5.0, 1.0, 0.0).unwrap(),
        deltas: vec![1e-1, 10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5), 1e-3, 0.0],
        n: 2048,
        length: 30.0,
        dt: 2e-3,
        fit_window: None,
    };
    let report = small_dispersion_sweep(&cfg, 1.0, 1).unwrap();
    let slope = report.fits["hk_slope"].slope;
    let elapsed = started.elapsed().as_secs_f64();

    let mut bad = Vec::new();
    if report.verdict != Verdict::Pass {
        bad.push(format!("verdict {}: {:?}", report.verdict, report.checks));
    }
    if !(0.9..=1.15).contains(&slope) {
        bad.push(format!("H1 distance slope {slope:.4} outside [0.9, 1.15]"));
    }
    if !checks_pass(&report, "formal gate") {
        bad.push("slope >= 1/2 gate not certified".to_string());
    }
    if elapsed > 300.0 {
        bad.push(format!("runtime {elapsed:.1}s > 300s"));
    }
    criterion(
        4,
        bad.is_empty(),
        &if bad.is_empty() {
            format!("H1 distance slope {slope:.3} in [0.9, 1.15], {elapsed:.1}s")
        } else {
            bad.join("; ")
        },
    );
}

#[test]
fn criterion_05_initial_norm_scaling() {
    let mut bad = Vec::new();
    let mut spreads = Vec::new();
    for gamma in [0.0, 0.1, -1.0] {
        let cfg = SweepConfig {
            setup: ProblemSetup::new(1, 5.0, 1.0, gamma).unwrap(),
            deltas: (4..=8).map(|k| 2.0f64.powi(-k)).collect(),
            n: 256,
            length: 30.0,
            dt: 1e-2,
            fit_window: None,
        };
        let report = initial_norm_scaling(&cfg, gamma).unwrap();
        if report.verdict != Verdict::Pass {
            bad.push(format!("gamma {gamma}: verdict {}", report.verdict));
        }
        let ratios = report.series.column("ratio").unwrap();
        let spread = ratios.iter().cloned().fold(0.0f64, f64::max)
            / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(spread <= 2.0) {
            bad.push(format!("gamma {gamma}: ratio spread {spread:.3} > 2"));
        }
        spreads.push(format!("{spread:.3}"));
        if gamma == 0.0 && !checks_pass(&report, "exact change of variables") {
            bad.push("gamma 0: exact L2 value missed beyond 1e-8".to_string());
        }
    }
    criterion(
        5,
        bad.is_empty(),
        &if bad.is_empty() {
            format!(
                "ratio spreads {} for gamma 0, 0.1, -1 (factor-2 cap), gamma=0 exact",
                spreads.join(", ")
            )
        } else {
            bad.join("; ")
        },
    );
}

#[test]
fn criterion_06_norm_inflation() {
    let started = Instant::now();
    let cfg = SweepConfig {
        setup: ProblemSetup::new(1, 5.0, 1.0, 0.1).unwrap(),
        deltas: vec![1e-3],
        n: 1024,
        length: 40.0,
        dt: 5e-3,
        fit_window: Some((5.0, 50.0)),
    };
    let report = norm_inflation_run(&cfg, 0.1).unwrap();
    let exact_slope = report.fits["exact_flow_slope"].slope;
    let elapsed = started.elapsed().as_secs_f64();

    let mut bad = Vec::new();
    if report.verdict != Verdict::Pass {
        bad.push(format!("verdict {}: {:?}", report.verdict, report.checks));
    }
    if !((exact_slope - 0.1).abs() <= 0.02) {
        bad.push(format!("exact-flow exponent {exact_slope:.4} not 0.1 +/- 0.02"));
    }
    if !checks_pass(&report, "tracks t^gamma within 20%") {
        bad.push("evolved rescaled family left the 20% envelope".to_string());
    }
    if elapsed > 600.0 {
        bad.push(format!("runtime {elapsed:.1}s > 600s"));
    }
    criterion(
        6,
        bad.is_empty(),
        &if bad.is_empty() {
            format!(
                "exact-flow exponent {exact_slope:.3} (target 0.1 +/- 0.02), \
                 evolved family within 20%, {elapsed:.1}s"
            )
        } else {
            bad.join("; ")
        },
    );
}

#[test]
fn criterion_07_decoherence() {
    let cfg = SweepConfig {
        setup: ProblemSetup::new(1, 5.0, 1.0, 0.0).unwrap(),
        deltas: vec![1e-3],
        n: 512,
        length: 40.0,
        dt: 5e-3,
        fit_window: Some((5.0, 25.0)),
    };
    // Amplitudes 0.7 / 0.85: the dispersive correction to the distance
    // grows with the quartic phase-buildup rate (~ a^4 t^2 delta), and at
    // t = 25 a unit-amplitude pair physically overshoots the 5% oracle
    // tolerance; this pair still separates fully (phase gap ~ 7 rad).
    let report = decoherence_run(&cfg, 0.7, 0.85).unwrap();

    let mut bad = Vec::new();
    if report.verdict != Verdict::Pass {
        bad.push(format!("verdict {}: {:?}", report.verdict, report.checks));
    }
    if !checks_pass(&report, "matches the dispersionless oracle") {
        bad.push("t=25 distance missed the quadrature oracle by more than 5%".to_string());
    }
    if !checks_pass(&report, "initial distance") {
        bad.push("initial distance identity violated".to_string());
    }
    criterion(
        7,
        bad.is_empty(),
        &if bad.is_empty() {
            "t=25 distance within 5% of the quadrature oracle, \
             initial distance = C eps |a - a'| exact"
                .to_string()
        } else {
            bad.join("; ")
        },
    );
}

#[test]
fn criterion_08_negative_regularity_growth() {
    let cfg = |n: usize, length: f64, gamma: f64| SweepConfig {
        setup: ProblemSetup::new(1, 5.0, 1.0, gamma).unwrap(),
        deltas: vec![1e-2],
        n,
        length,
        dt: 1e-2,
        fit_window: None,
    };
    let power = negative_gamma_run(&cfg(8192, 2048.0, -1.0), -1.0).unwrap();
    let slope = power.fits["growth_slope"].slope;
    let sqrtlog = negative_gamma_run(&cfg(2048, 512.0, -0.5), -0.5).unwrap();

    let mut bad = Vec::new();
    if power.verdict != Verdict::Pass {
        bad.push(format!("gamma -1 verdict {}: {:?}", power.verdict, power.checks));
    }
    if !((slope + 0.5).abs() <= 0.1) {
        bad.push(format!("gamma -1 growth exponent {slope:.4} not -1/2 +/- 0.1"));
    }
    if !sqrtlog.fits.contains_key("sqrtlog_slope") {
        bad.push("gamma -1/2 did not select the sqrt-log branch".to_string());
    }
    if !checks_pass(&sqrtlog, "sqrt-log branch") {
        bad.push("sqrt-log trend not verified".to_string());
    }
    if sqrtlog.verdict == Verdict::Fail {
        bad.push(format!("gamma -1/2 verdict fail: {:?}", sqrtlog.checks));
    }
    criterion(
        8,
        bad.is_empty(),
        &if bad.is_empty() {
            format!(
                "gamma -1 exponent {slope:.3} (target -0.5 +/- 0.1); \
                 gamma -1/2 sqrt-log branch selected, trend slope {:.3e}",
                sqrtlog.fits["sqrtlog_slope"].slope
            )
        } else {
            bad.join("; ")
        },
    );
}

#[test]
fn criterion_09_norm_machinery() {
    let grid = GridSpec::new(1, 256, 30.0).unwrap();
    let two = Exponent::Finite(2.0);
    let gamma = 0.8;
    let (c1, c2) = besov_comparability_band(gamma);
    let (_, hi) = dyadic_range(grid);

    let mut worst_plancherel = 0.0f64;
    let mut worst_partition = 0.0f64;
    let mut worst_interp = 0.0f64;
    let mut comparability_ok = true;
    for seed in 1..=100u64 {
        let f = random_band_limited(grid, seed, 0.5, 1.0).unwrap();
        let norm_spec = l2(&f);

        // Plancherel: the exact L2 value agrees in both representations.
        let norm_phys = l2(&to_physical(&f).unwrap());
        worst_plancherel = worst_plancherel.max(rel(norm_phys, norm_spec));

        // The dyadic blocks and the low lump resolve the identity.
        let mut rebuilt = lp_project(&f, Block::Zero).unwrap();
        for j in 1..=hi {
            rebuilt = rebuilt.add(&lp_project(&f, Block::Dyadic(j)).unwrap()).unwrap();
        }
        let resid = l2(&rebuilt.sub(&f).unwrap()) / norm_spec;
        worst_partition = worst_partition.max(resid);

        // Besov vs Sobolev inside the precomputed band.
        let sob = sobolev_norm(&f, gamma, true, two).unwrap();
        let bes = besov_norm(&f, gamma, true, two).unwrap();
        if !(c1 * sob * (1.0 - 1e-10) <= bes && bes <= c2 * sob * (1.0 + 1e-10)) {
            comparability_ok = false;
        }

        // Interpolation: H^(1/2) <= sqrt(L2 * H^1).
        let h0 = sobolev_norm(&f, 0.0, false, two).unwrap();
        let h1 = sobolev_norm(&f, 1.0, false, two).unwrap();
        let hh = sobolev_norm(&f, 0.5, false, two).unwrap();
        worst_interp = worst_interp.max(hh / (h0 * h1).sqrt());
    }

    let mut bad = Vec::new();
    if !(worst_plancherel <= 1e-12) {
        bad.push(format!("Plancherel drift {worst_plancherel:.3e} > 1e-12"));
    }
    if !(worst_partition <= 1e-12) {
        bad.push(format!("partition-of-unity residual {worst_partition:.3e} > 1e-12"));
    }
    if !comparability_ok {
        bad.push(format!("Besov/Sobolev ratio left [{c1:.4}, {c2:.4}] at gamma {gamma}"));
    }
    if !(worst_interp <= 1.0 + 1e-12) {
        bad.push(format!("interpolation inequality violated: ratio {worst_interp:.6}"));
    }
    criterion(
        9,
        bad.is_empty(),
        &if bad.is_empty() {
            format!(
                "100 random fields: Plancherel {worst_plancherel:.1e}, partition residual \
                 {worst_partition:.1e}, Besov/Sobolev in [{c1:.3}, {c2:.3}], \
                 interpolation ratio <= {worst_interp:.6}"
            )
        } else {
            bad.join("; ")
        },
    );
}

#[test]
fn criterion_10_probe_suites() {
    let strich_cfg = StrichartzConfig {
        n: 128,
        length: 40.0,
        seeds: 12,
        time_nodes: 9,
        ..Default::default()
    };
    let pair = (Exponent::Finite(6.0), Exponent::Finite(6.0));
    let strich = strichartz_probe(&strich_cfg, pair, 1.0).unwrap();

    let probe_cfg = ProbeSuiteConfig { d: 1, n: 256, length: 30.0, seeds: 16, seed0: 0 };
    let product = product_rule_suite(&probe_cfg).unwrap();
    let chain = chain_rule_suite(&probe_cfg).unwrap();

    let mut bad = Vec::new();
    for (name, report) in [("strichartz", &strich), ("product", &product), ("chain", &chain)] {
        if report.verdict == Verdict::Fail {
            bad.push(format!("{name} verdict fail: {:?}", report.checks));
        }
        if !checks_pass(report, "stable under sample doubling") {
            bad.push(format!("{name}: max ratio moved more than 10% under sample doubling"));
        }
        if !checks_pass(report, "finite") {
            bad.push(format!("{name}: unbounded ratio flagged"));
        }
    }
    criterion(
        10,
        bad.is_empty(),
        &if bad.is_empty() {
            "Strichartz, product-rule and chain-rule ratios stable under sample \
             doubling (<= 10%), all ratios finite"
                .to_string()
        } else {
            bad.join("; ")
        },
    );
}
