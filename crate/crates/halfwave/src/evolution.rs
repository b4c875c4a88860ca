//! Time evolution: the exact dispersionless phase flow, a Strang
//! split-step integrator whose substeps are both exact flows, a Picard
//! (Duhamel) iterator for cross-validation, conserved-quantity monitors,
//! and the scaling map between solution frames.
//!
//! The integrated equation is `i du/dt + delta*Lambda u = -mu |u|^(nu-1) u`,
//! equivalently `du/dt = i*delta*Lambda u + i*mu |u|^(nu-1) u`. Both the
//! nonlinear phase `exp(+i mu t |u|^(nu-1))` and the Duhamel kernel
//! `+i mu` below are fixed by that sign; together with the energy
//! `E = 1/2 ||Lambda^(1/2) u||^2 + mu/(nu+1) * integral |u|^(nu+1)`
//! they form a consistent set (dE/dt = 0 along the flow).

use crate::grid::{Field, Space};
use crate::norms::sobolev_norm;
use crate::spectral::{
    forward_transform, inverse_transform, nonlinear_power, pad_factor, padded_abs_quadrature,
    padded_max_abs, propagate_linear, resample_dyadic, to_physical, to_spectral,
};
use crate::exponents::Exponent;
use crate::{Error, Result};
use num_complex::Complex64;

/// Coefficients of the evolution equation. `delta = 1` is the full
/// equation; `delta = 0` the dispersionless phase flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationParams {
    pub nu: f64,
    pub mu: f64,
    pub delta: f64,
}

impl EquationParams {
    pub fn new(nu: f64, mu: f64, delta: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 1.0) {
            return Err(Error::Domain(format!(
                "nonlinearity power must be finite and exceed 1, got {nu}"
            )));
        }
        if mu != 1.0 && mu != -1.0 {
            return Err(Error::Domain(format!("nonlinearity sign must be +1 or -1, got {mu}")));
        }
        if !(delta.is_finite() && (0.0..=1.0).contains(&delta)) {
            return Err(Error::Domain(format!("dispersion must lie in [0, 1], got {delta}")));
        }
        Ok(EquationParams { nu, mu, delta })
    }
}

/// `|z|^p` with fast paths when `p` is an even integer.
#[inline]
fn modulus_power(z: Complex64, p: f64) -> f64 {
    let half = 0.5 * p;
    let m = half.round();
    if (half - m).abs() < 1e-12 && m >= 1.0 {
        z.norm_sqr().powi(m as i32)
    } else {
        let r = z.norm();
        if r == 0.0 {
            0.0
        } else {
            r.powf(p)
        }
    }
}

/// Multiply `u` pointwise by `exp(+i mu t |u|^(nu-1))`.
fn phase_flow(u: &Field, t: f64, params: &EquationParams) -> Field {
    let p = params.nu - 1.0;
    let mut out = u.clone();
    for z in out.values_mut() {
        let s = modulus_power(*z, p);
        *z *= Complex64::from_polar(1.0, params.mu * t * s);
    }
    out
}

/// The exact solution of the dispersionless equation:
/// `phi0 * exp(+i mu t |phi0|^(nu-1))`. The modulus is a pointwise
/// invariant, so every `L^q` norm of the modulus is conserved exactly.
pub fn zero_dispersion_flow(phi0: &Field, t: f64, params: &EquationParams) -> Result<Field> {
    phi0.expect_space(Space::Physical)?;
    if !t.is_finite() {
        return Err(Error::Domain("flow time must be finite".into()));
    }
    Ok(phase_flow(phi0, t, params))
}

/// One Strang step: half a nonlinear phase flow, the full linear
/// propagator, half a nonlinear phase flow. Both substeps are exact
/// unitary flows, so mass is conserved to roundoff. Negative `dt` steps
/// backwards (the scheme is time-reversible).
pub fn strang_step(u: &Field, dt: f64, params: &EquationParams) -> Result<Field> {
    u.expect_space(Space::Physical)?;
    if !dt.is_finite() {
        return Err(Error::Domain("step size must be finite".into()));
    }
    let half = phase_flow(u, 0.5 * dt, params);
    // delta = 0 makes the propagator the identity; skipping the transform
    // keeps the dispersionless step bit-comparable to the exact flow.
    let moved = if dt * params.delta == 0.0 {
        half
    } else {
        propagate_linear(&half, dt, params.delta)?
    };
    let out = phase_flow(&moved, 0.5 * dt, params);
    out.check_finite("split step output")?;
    Ok(out)
}

/// Blow-up proxy: halt when the monitored norm exceeds
/// `factor * its initial value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ceiling {
    pub gamma: f64,
    pub factor: f64,
}

impl Ceiling {
    /// The stock ceiling: a millionfold increase of the `H^gamma` norm.
    pub fn default_for(gamma: f64) -> Self {
        Ceiling { gamma, factor: 1e6 }
    }
}

/// What to record along a trajectory: sampling stride (in steps),
/// the list of inhomogeneous `H^gamma` norms to log, and an optional
/// blow-up ceiling.
#[derive(Debug, Clone, Default)]
pub struct MonitorSpec {
    /// Record every `stride` steps (0 and 1 both mean every step); the
    /// initial and final states are always recorded.
    pub stride: usize,
    pub gammas: Vec<f64>,
    pub ceiling: Option<Ceiling>,
}

/// Conserved quantities and requested norms at one recorded node.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRow {
    pub mass: f64,
    pub energy: f64,
    pub norms: Vec<f64>,
}

/// A recorded evolution: strictly increasing times, one state and one
/// monitor row per node.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub monitors: Vec<MonitorRow>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &Field {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// Check the structural invariants (matched lengths, increasing times).
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.states.len() || self.times.len() != self.monitors.len() {
            return Err(Error::Domain(format!(
                "trajectory arrays disagree: {} times, {} states, {} monitor rows",
                self.times.len(),
                self.states.len(),
                self.monitors.len()
            )));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("trajectory times must increase strictly".into()));
        }
        Ok(())
    }
}

/// `M(u) = integral |u|^2`, exact in either representation.
pub fn mass(u: &Field) -> f64 {
    let measure = match u.space() {
        Space::Physical => u.grid().cell(),
        Space::Spectral => u.grid().freq_cell(),
    };
    u.sum_sq() * measure
}

/// `E(u) = 1/2 ||Lambda^(1/2) u||^2 + mu/(nu+1) integral |u|^(nu+1)`.
/// The kinetic term is a spectral sum; the potential term is quadrature
/// on the dealiasing grid of the nonlinearity.
pub fn energy(u: &Field, params: &EquationParams) -> Result<f64> {
    let spec = to_spectral(u)?;
    let grid = spec.grid();
    let mut kinetic = 0.0;
    for (flat, z) in spec.values().iter().enumerate() {
        kinetic += grid.freq_sq(flat).sqrt() * z.norm_sqr();
    }
    kinetic *= 0.5 * grid.freq_cell();
    let p = params.nu + 1.0;
    let potential = padded_abs_quadrature(u, pad_factor(params.nu), |r| {
        if r == 0.0 {
            0.0
        } else {
            r.powf(p)
        }
    })?;
    Ok(kinetic + params.mu / p * potential)
}

fn monitor_row(u: &Field, params: &EquationParams, spec: &MonitorSpec) -> Result<MonitorRow> {
    let mut norms = Vec::with_capacity(spec.gammas.len());
    for &gamma in &spec.gammas {
        norms.push(sobolev_norm(u, gamma, false, Exponent::Finite(2.0))?);
    }
    Ok(MonitorRow { mass: mass(u), energy: energy(u, params)?, norms })
}

/// March `u0` to `t_final` with fixed step `dt`, recording states and
/// monitors at the requested stride. `dt` must divide `t_final` within
/// roundoff. Halts with an error if the state turns non-finite (solver
/// blowup) or a monitored norm crosses the ceiling.
pub fn evolve(
    u0: &Field,
    t_final: f64,
    dt: f64,
    params: &EquationParams,
    monitor: &MonitorSpec,
) -> Result<Trajectory> {
    u0.expect_space(Space::Physical)?;
    u0.check_finite("initial data")?;
    if !(t_final.is_finite() && t_final > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!(
            "evolution needs t_final > 0 and dt > 0, got ({t_final}, {dt})"
        )));
    }
    let steps_real = t_final / dt;
    let steps = steps_real.round();
    if steps < 1.0 || (steps * dt - t_final).abs() > 1e-9 * t_final.max(dt) {
        return Err(Error::Domain(format!(
            "dt = {dt} does not divide t_final = {t_final} (steps would be {steps_real})"
        )));
    }
    let steps = steps as usize;
    let stride = monitor.stride.max(1);
    let ceiling_base = match monitor.ceiling {
        Some(c) => Some((c, sobolev_norm(u0, c.gamma, false, Exponent::Finite(2.0))?)),
        None => None,
    };
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u0.clone()],
        monitors: vec![monitor_row(u0, params, monitor)?],
    };
    let mut u = u0.clone();
    for i in 1..=steps {
        let t = i as f64 * dt;
        u = strang_step(&u, dt, params).map_err(|e| match e {
            Error::NonFinite(_) => {
                Error::Domain(format!("solver blowup: non-finite state at t = {t}"))
            }
            other => other,
        })?;
        if i % stride == 0 || i == steps {
            if let Some((c, base)) = ceiling_base {
                let value = sobolev_norm(&u, c.gamma, false, Exponent::Finite(2.0))?;
                if value > c.factor * base {
                    return Err(Error::Ceiling {
                        t,
                        gamma: c.gamma,
                        value,
                        ceiling: c.factor * base,
                    });
                }
            }
            traj.times.push(t);
            traj.states.push(u.clone());
            traj.monitors.push(monitor_row(&u, params, monitor)?);
        }
    }
    Ok(traj)
}

/// Convergence record of a Picard run: iterations used, the ratio of
/// successive increments (contraction factors), and the last increment.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub iterations: usize,
    pub factors: Vec<f64>,
    pub final_increment: f64,
}

/// Iterate the Duhamel map
/// `Phi(u)(t) = e^(i t delta Lambda) u0 + i mu int_0^t e^(i (t-s) delta Lambda) |u|^(nu-1) u ds`
/// from the free evolution, on `n_nodes` uniform nodes spanning `[0, T]`,
/// with trapezoidal quadrature. Stops when the sup-over-nodes `L^2`
/// distance between successive iterates drops below `tol`.
pub fn picard_solve(
    u0: &Field,
    t_final: f64,
    n_nodes: usize,
    params: &EquationParams,
    tol: f64,
    max_iter: usize,
) -> Result<(Trajectory, PicardReport)> {
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {t_final}")));
    }
    if n_nodes < 8 {
        return Err(Error::Domain(format!("need at least 8 quadrature nodes, got {n_nodes}")));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::Domain("tolerance must be positive and max_iter nonzero".into()));
    }
    let phys0 = to_physical(u0)?;
    phys0.check_finite("initial data")?;
    let grid = phys0.grid();
    let dt_node = t_final / (n_nodes - 1) as f64;
    let times: Vec<f64> = (0..n_nodes).map(|i| i as f64 * dt_node).collect();
    let spec0 = forward_transform(&phys0)?;
    // Per-node free propagator phases, reused every iteration.
    let sites = grid.sites();
    let omegas: Vec<f64> = (0..sites).map(|flat| params.delta * grid.freq_sq(flat).sqrt()).collect();
    let free_phase = |t: f64, flat: usize| Complex64::from_polar(1.0, t * omegas[flat]);
    let mut states: Vec<Field> = times
        .iter()
        .map(|&t| {
            let mut s = spec0.clone();
            for (flat, z) in s.values_mut().iter_mut().enumerate() {
                *z *= free_phase(t, flat);
            }
            inverse_transform(&s)
        })
        .collect::<Result<_>>()?;
    let weight = Complex64::new(0.0, params.mu * dt_node);
    let mut factors = Vec::new();
    let mut prev_increment: Option<f64> = None;
    for iter in 1..=max_iter {
        let sweep = (|| -> Result<(Vec<Field>, f64)> {
            // Spectral nonlinearity at every node.
            let mut f_hats = Vec::with_capacity(n_nodes);
            for s in &states {
                f_hats.push(forward_transform(&nonlinear_power(s, params.nu)?)?);
            }
            // Running trapezoid prefix of e^(-i s delta Lambda) F(u(s)).
            let mut running = vec![Complex64::new(0.0, 0.0); sites];
            let mut next_states = Vec::with_capacity(n_nodes);
            let mut increment = 0.0f64;
            for (i, &t) in times.iter().enumerate() {
                let mut spec = Field::zeros(grid, Space::Spectral);
                if i == 0 {
                    for flat in 0..sites {
                        let g = f_hats[0].values()[flat];
                        running[flat] = 0.5 * g;
                        spec.values_mut()[flat] = spec0.values()[flat];
                    }
                } else {
                    for flat in 0..sites {
                        let g = free_phase(-t, flat) * f_hats[i].values()[flat];
                        let integral = running[flat] + 0.5 * g;
                        running[flat] += g;
                        spec.values_mut()[flat] =
                            free_phase(t, flat) * (spec0.values()[flat] + weight * integral);
                    }
                }
                let state = inverse_transform(&spec)?;
                state.check_finite("Picard iterate")?;
                let diff = state.sub(&states[i])?;
                increment = increment.max((diff.sum_sq() * grid.cell()).sqrt());
                next_states.push(state);
            }
            Ok((next_states, increment))
        })();
        let (next_states, increment) = match sweep {
            Ok(v) => v,
            // Overflow of an iterate is conclusive divergence of the
            // fixed-point map, not an I/O-style failure.
            Err(Error::NonFinite(_)) => {
                factors.push(f64::INFINITY);
                return Err(Error::NoConvergence { iterations: iter, factors });
            }
            Err(other) => return Err(other),
        };
        states = next_states;
        if let Some(prev) = prev_increment {
            if prev > 0.0 {
                factors.push(increment / prev);
            }
        }
        prev_increment = Some(increment);
        if increment < tol {
            let mut monitors = Vec::with_capacity(n_nodes);
            for s in &states {
                monitors.push(MonitorRow {
                    mass: mass(s),
                    energy: energy(s, params)?,
                    norms: Vec::new(),
                });
            }
            let traj = Trajectory { times, states, monitors };
            let report = PicardReport { iterations: iter, factors, final_increment: increment };
            return Ok((traj, report));
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, factors })
}

/// Map a solution of the dispersion-`delta` equation to the unit-dispersion
/// frame: `u(x) = lambda^(-1/(nu-1)) * phi((delta/lambda) x)` on the box
/// shrunk by `delta/lambda`, which must be a power of two so the dilation
/// is an exact spectral relabeling. The time relabeling `t -> lambda t`
/// is the caller's bookkeeping.
pub fn rescale_solution(phi: &Field, lambda: f64, delta: f64, nu: f64) -> Result<Field> {
    if !(lambda.is_finite() && lambda > 0.0 && delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!(
            "scaling needs positive (lambda, delta), got ({lambda}, {delta})"
        )));
    }
    if !(nu.is_finite() && nu > 1.0) {
        return Err(Error::Domain(format!("nonlinearity power must exceed 1, got {nu}")));
    }
    let ratio = delta / lambda;
    let p = ratio.log2();
    let p_round = p.round();
    if (p - p_round).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "delta/lambda = {ratio} is not a power of two; the dilation would need \
             interpolation (2^{p} requested)"
        )));
    }
    let amplitude = lambda.powf(-1.0 / (nu - 1.0));
    let resampled = resample_dyadic(phi, -(p_round as i32))?;
    Ok(resampled.scaled(Complex64::new(amplitude, 0.0)))
}

/// Fit the smallest `C` with
/// `||u(t)||_{H^beta} <= ||u(0)||_{H^beta} * exp(C * int_0^t ||u||_inf^(nu-1))`
/// along a recorded trajectory — a growth diagnostic, not an assertion
/// about any particular constant.
pub fn persistence_diagnostic(traj: &Trajectory, beta: f64, nu: f64) -> Result<f64> {
    traj.validate()?;
    if traj.len() < 2 {
        return Err(Error::Domain("diagnostic needs at least two nodes".into()));
    }
    let base = sobolev_norm(&traj.states[0], beta, false, Exponent::Finite(2.0))?;
    if base == 0.0 {
        return Err(Error::Domain("diagnostic undefined for zero initial data".into()));
    }
    let sup_powers: Vec<f64> = traj
        .states
        .iter()
        .map(|s| Ok(padded_max_abs(s, 2)?.powf(nu - 1.0)))
        .collect::<Result<_>>()?;
    let mut integral = 0.0;
    let mut fitted: f64 = 0.0;
    for i in 1..traj.len() {
        let dt = traj.times[i] - traj.times[i - 1];
        integral += 0.5 * dt * (sup_powers[i - 1] + sup_powers[i]);
        let norm_i = sobolev_norm(&traj.states[i], beta, false, Exponent::Finite(2.0))?;
        if integral > 0.0 {
            fitted = fitted.max((norm_i / base).ln() / integral);
        }
    }
    Ok(fitted)
}
