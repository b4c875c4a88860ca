//! Sampled inequality suites for the product and composition
//! estimates. Each suite draws band-limited random pairs, records the
//! measured left/right sides per exponent split, and passes when the
//! empirical max ratio is stable under doubling the sample — evidence
//! of boundedness, not a constant claim. Series columns store inverse
//! exponents (`0` encodes `inf`) so a row is plain finite numbers.

use super::{echo, Check, ExperimentReport, Series};
use crate::exponents::Exponent;
use crate::grid::GridSpec;
use crate::norms::{probe_chain_rule, probe_kato_ponce, ChainSplit, KatoPonceSplit, RatioReport};
use crate::Result;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct ProbeSuiteConfig {
    pub d: usize,
    pub n: usize,
    pub length: f64,
    pub seeds: usize,
    /// Base of the random-data enumeration.
    pub seed0: u64,
}

impl Default for ProbeSuiteConfig {
    fn default() -> Self {
        ProbeSuiteConfig { d: 1, n: 1024, length: 60.0, seeds: 48, seed0: 0 }
    }
}

const FIN2: Exponent = Exponent::Finite(2.0);
const FIN3: Exponent = Exponent::Finite(3.0);
const FIN4: Exponent = Exponent::Finite(4.0);
const FIN6: Exponent = Exponent::Finite(6.0);
const INF: Exponent = Exponent::Infinity;

/// Max-ratio movement when the sample grows from its first half to the
/// full size; stability of the empirical ceiling is the verdict.
fn stability(ratios: &[f64]) -> (f64, f64, f64) {
    let half = ratios[..ratios.len() / 2].iter().cloned().fold(0.0, f64::max);
    let full = ratios.iter().cloned().fold(0.0, f64::max);
    (half, full, (full - half) / half)
}

fn band_fraction() -> f64 {
    // Low enough that products and fourth powers stay below the padded
    // Nyquist line, making every quadrature in the ratios exact.
    0.45
}

pub fn product_rule_suite(cfg: &ProbeSuiteConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let grid = GridSpec::new(cfg.d, cfg.n, cfg.length)?;
    if cfg.seeds < 4 {
        return Err(crate::Error::Domain("need at least 4 seeds for a stability verdict".into()));
    }
    let splits = [
        KatoPonceSplit { r: FIN2, p1: FIN4, q1: FIN4, p2: FIN4, q2: FIN4 },
        KatoPonceSplit { r: FIN2, p1: FIN2, q1: INF, p2: INF, q2: FIN2 },
    ];
    let gammas = [0.0, 0.5, 1.0];

    type Row = (usize, f64, KatoPonceSplit, RatioReport);
    let rows: Vec<Row> = (0..cfg.seeds)
        .into_par_iter()
        .map(|seed| -> Result<Vec<Row>> {
            let u = crate::spectral::random_band_limited(grid, cfg.seed0 + 2 * seed as u64 + 1, band_fraction(), 1.0)?;
            let v = crate::spectral::random_band_limited(grid, cfg.seed0 + 2 * seed as u64 + 2, band_fraction(), 1.0)?;
            let mut out = Vec::new();
            for &gamma in &gammas {
                for split in splits {
                    out.push((seed, gamma, split, probe_kato_ponce(&u, &v, gamma, split)?));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut series = Series::new(&[
        "seed", "gamma", "inv_r", "inv_p1", "inv_q1", "inv_p2", "inv_q2", "lhs", "rhs", "ratio",
    ]);
    for (seed, gamma, s, rr) in &rows {
        series.push(vec![
            *seed as f64,
            *gamma,
            s.r.recip(),
            s.p1.recip(),
            s.q1.recip(),
            s.p2.recip(),
            s.q2.recip(),
            rr.lhs,
            rr.rhs,
            rr.ratio,
        ]);
    }

    let mut checks = Vec::new();
    let mut worst_movement: f64 = 0.0;
    for &gamma in &gammas {
        for (si, split) in splits.iter().enumerate() {
            let group: Vec<f64> = rows
                .iter()
                .filter(|(_, g, s, _)| *g == gamma && s.p1 == split.p1 && s.q1 == split.q1)
                .map(|(_, _, _, rr)| rr.ratio)
                .collect();
            let (half, full, movement) = stability(&group);
            worst_movement = worst_movement.max(movement);
            checks.push(Check::gauge(
                &format!("max ratio stable under sample doubling (gamma {gamma}, split {si})"),
                (0.1 - movement) / 0.1,
                format!("half-sample max {half:.6}, full-sample max {full:.6}"),
            ));
        }
    }
    // With the derivative weight switched off, the two-sided bound
    // degenerates to a plain Holder inequality, exact on these grids.
    let holder_margin = rows
        .iter()
        .filter(|(_, g, s, _)| *g == 0.0 && !s.q1.is_infinite() && !s.p2.is_infinite())
        .map(|(_, _, _, rr)| 1.0 + 1e-12 - rr.ratio)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::gauge(
        "zero-regularity rows obey the exact product inequality",
        holder_margin,
        "finite-exponent splits at gamma = 0 are pure Holder rows".into(),
    ));
    checks.push(Check::gauge(
        "all sampled ratios finite",
        if rows.iter().all(|(_, _, _, rr)| rr.ratio.is_finite()) { 1.0 } else { -1.0 },
        "no unbounded growth across the sample".into(),
    ));

    let inputs = echo(&[
        ("d", cfg.d.to_string()),
        ("n", cfg.n.to_string()),
        ("length", cfg.length.to_string()),
        ("seeds", cfg.seeds.to_string()),
        ("seed0", cfg.seed0.to_string()),
        ("gammas", "0,0.5,1".into()),
        ("band_fraction", band_fraction().to_string()),
    ]);
    Ok(ExperimentReport::assemble(
        "kato-ponce-probe",
        inputs,
        series,
        BTreeMap::new(),
        checks,
        worst_movement,
        started,
        vec!["two exponent splits per row: (2; 4,4 | 4,4) and (2; 2,inf | inf,2)".to_string()],
    ))
}

pub fn chain_rule_suite(cfg: &ProbeSuiteConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let grid = GridSpec::new(cfg.d, cfg.n, cfg.length)?;
    if cfg.seeds < 4 {
        return Err(crate::Error::Domain("need at least 4 seeds for a stability verdict".into()));
    }
    let splits = [ChainSplit { r: FIN2, p: FIN4, q: FIN4 }, ChainSplit { r: FIN2, p: FIN6, q: FIN3 }];
    let gammas = [0.3, 0.7];
    let nus = [2.0, 3.0, 5.0];

    type Row = (usize, f64, f64, ChainSplit, RatioReport);
    let rows: Vec<Row> = (0..cfg.seeds)
        .into_par_iter()
        .map(|seed| -> Result<Vec<Row>> {
            let u = crate::spectral::random_band_limited(grid, cfg.seed0 + 2 * seed as u64 + 1, band_fraction(), 1.0)?;
            let mut out = Vec::new();
            for &gamma in &gammas {
                for &nu in &nus {
                    for split in splits {
                        out.push((seed, gamma, nu, split, probe_chain_rule(&u, nu, gamma, split)?));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut series =
        Series::new(&["seed", "gamma", "nu", "inv_r", "inv_p", "inv_q", "lhs", "rhs", "ratio"]);
    for (seed, gamma, nu, s, rr) in &rows {
        series.push(vec![
            *seed as f64,
            *gamma,
            *nu,
            s.r.recip(),
            s.p.recip(),
            s.q.recip(),
            rr.lhs,
            rr.rhs,
            rr.ratio,
        ]);
    }

    let mut checks = Vec::new();
    let mut worst_movement: f64 = 0.0;
    for &gamma in &gammas {
        for &nu in &nus {
            for (si, split) in splits.iter().enumerate() {
                let group: Vec<f64> = rows
                    .iter()
                    .filter(|(_, g, nv, s, _)| *g == gamma && *nv == nu && s.p == split.p)
                    .map(|(_, _, _, _, rr)| rr.ratio)
                    .collect();
                let (half, full, movement) = stability(&group);
                worst_movement = worst_movement.max(movement);
                checks.push(Check::gauge(
                    &format!(
                        "max ratio stable under sample doubling (gamma {gamma}, nu {nu}, split {si})"
                    ),
                    (0.1 - movement) / 0.1,
                    format!("half-sample max {half:.6}, full-sample max {full:.6}"),
                ));
            }
        }
    }
    checks.push(Check::gauge(
        "all sampled ratios finite",
        if rows.iter().all(|(.., rr)| rr.ratio.is_finite()) { 1.0 } else { -1.0 },
        "no unbounded growth across the sample".into(),
    ));

    let inputs = echo(&[
        ("d", cfg.d.to_string()),
        ("n", cfg.n.to_string()),
        ("length", cfg.length.to_string()),
        ("seeds", cfg.seeds.to_string()),
        ("seed0", cfg.seed0.to_string()),
        ("gammas", "0.3,0.7".into()),
        ("nus", "2,3,5".into()),
        ("band_fraction", band_fraction().to_string()),
    ]);
    Ok(ExperimentReport::assemble(
        "chain-rule-probe",
        inputs,
        series,
        BTreeMap::new(),
        checks,
        worst_movement,
        started,
        vec!["two exponent splits per row: (2; 4,4) and (2; 6,3)".to_string()],
    ))
}
