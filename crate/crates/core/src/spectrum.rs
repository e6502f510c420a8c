//! Bottom of the Dirichlet spectrum of `-Delta_f` outside a ball, and the
//! bottom of the essential spectrum, for rotationally symmetric models.
//!
//! Three routes are provided:
//!
//! * finite differences on the radial Sturm-Liouville form
//!   `-(v u')' = lambda v u` on `[r0, R]`, Dirichlet at both ends;
//! * oscillation of `y'' + (v'/v) y' + lambda y = 0`: the threshold
//!   `lambda` above which solutions keep changing sign;
//! * Rayleigh quotients of explicit test functions (upper bounds) and
//!   barrier functions `u = e^{beta r}` (lower bounds).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::ManifoldSpec;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::tridiag;

/// Inner radii swept by [`ess_spectrum_bottom`].
pub const ESS_INNER_RADII: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
/// Largest lambda tried before giving up on oscillation.
pub const LAMBDA_CEILING: f64 = 1e6;
/// Length of the interval sampled by [`barrier_lower_bound`].
pub const BARRIER_SPAN: f64 = 1e3;
pub const BARRIER_STEP: f64 = 1e-2;

const RESCALE_HIGH: f64 = 1e100;
const RESCALE_LOW: f64 = 1e-100;
const MAX_TRACE_POINTS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub truncation_radii: Vec<f64>,
    /// Mesh points per unit length for the finite-difference route.
    pub mesh_points: usize,
    pub osc_window: f64,
    pub n_osc: usize,
    pub bisect_tol: f64,
    pub ode_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            truncation_radii: vec![50.0, 100.0, 200.0, 400.0],
            mesh_points: 64,
            osc_window: 2000.0,
            n_osc: 5,
            bisect_tol: 1e-4,
            ode_step: 1e-2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.truncation_radii.len() < 2 {
            return bad("at least two truncation radii are needed".into());
        }
        if self
            .truncation_radii
            .iter()
            .any(|&r| !(r > 0.0) || !r.is_finite())
        {
            return bad("truncation radii must be positive".into());
        }
        if self.truncation_radii.windows(2).any(|w| w[1] <= w[0]) {
            return bad("truncation radii must increase".into());
        }
        if self.mesh_points == 0 || self.n_osc == 0 {
            return bad("mesh_points and n_osc must be positive".into());
        }
        for (name, x) in [
            ("osc_window", self.osc_window),
            ("bisect_tol", self.bisect_tol),
            ("ode_step", self.ode_step),
        ] {
            if !(x > 0.0) || !x.is_finite() {
                return bad(format!("{name} = {x} must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    FiniteDifference,
    Oscillation,
    TestFunction,
    Barrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedEigenvalue {
    pub radius: f64,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerRadiusEstimate {
    pub r0: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_size: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub truncated: Vec<TruncatedEigenvalue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_changes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inner_radii: Vec<InnerRadiusEstimate>,
}

/// Bracket for `lambda_1^f(M \ B_{r0})` (or for `inf sigma_ess`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub lambda1_lower: f64,
    pub lambda1_upper: f64,
    pub method: Method,
    pub r0: f64,
    pub diagnostics: Diagnostics,
}

impl SpectrumEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lambda1_lower + self.lambda1_upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lambda1_lower <= x && x <= self.lambda1_upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationVerdict {
    pub oscillatory: bool,
    pub sign_changes: usize,
    pub window: (f64, f64),
    /// Times `(y, y')` was renormalized to stay in floating-point range.
    pub rescalings: usize,
    pub step: f64,
}

/// One sample of the probe solution; the true value is `y * 10^log10_scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub t: f64,
    pub y: f64,
    pub log10_scale: i32,
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(format!("{what} = {x} must be positive")))
    }
}

/// Smallest Dirichlet eigenvalue of `-(v u')' = lambda v u` on `[r0, big_r]`.
///
/// Central differences with `v` at cell midpoints give `A u = lambda B u`,
/// `B = diag(v_i)`; the symmetric reduction `B^{-1/2} A B^{-1/2}` is formed
/// from `ln v` so nothing under- or overflows.
fn truncated_eigenvalue(
    spec: &ManifoldSpec,
    r0: f64,
    big_r: f64,
    mesh_points: usize,
) -> Result<f64> {
    let intervals = (((big_r - r0) * mesh_points as f64).ceil() as usize).max(2);
    let h = (big_r - r0) / intervals as f64;
    let inv_h2 = 1.0 / (h * h);
    let lv = |r: f64| spec.ln_sphere_density(r);
    let nodes: Vec<f64> = (1..intervals).map(|i| lv(r0 + i as f64 * h)).collect();
    let mids: Vec<f64> = (0..intervals)
        .map(|i| lv(r0 + (i as f64 + 0.5) * h))
        .collect();
    if nodes.iter().chain(mids.iter()).any(|x| !x.is_finite()) {
        return Err(Error::DomainError(format!(
            "sphere density vanishes or overflows on [{r0}, {big_r}]"
        )));
    }
    let m = nodes.len();
    let diag: Vec<f64> = (0..m)
        .map(|i| ((mids[i] - nodes[i]).exp() + (mids[i + 1] - nodes[i]).exp()) * inv_h2)
        .collect();
    let off: Vec<f64> = (0..m - 1)
        .map(|i| -(mids[i + 1] - 0.5 * (nodes[i] + nodes[i + 1])).exp() * inv_h2)
        .collect();
    Ok(tridiag::smallest_eigenvalue(&diag, &off, 1e-10))
}

/// Finite-difference bracket for `lambda_1^f(M \ B_{r0})`.
///
/// Each truncation radius gives an upper bound that decreases with `R`.
/// The upper edge is the value at the largest radius; the lower edge
/// subtracts the gap between the last two radii (a heuristic, clamped at 0).
pub fn lambda1_exterior_fd(
    spec: &ManifoldSpec,
    r0: f64,
    cfg: &SolverConfig,
) -> Result<SpectrumEstimate> {
    check_positive(r0, "inner radius r0")?;
    cfg.validate()?;
    if spec.warping().value(r0) <= 0.0 {
        return Err(Error::DomainError(format!("g({r0}) must be positive")));
    }
    if cfg.truncation_radii[0] <= r0 {
        return Err(Error::InvalidParameter(format!(
            "truncation radius {} must exceed r0 = {r0}",
            cfg.truncation_radii[0]
        )));
    }
    let mut truncated = Vec::with_capacity(cfg.truncation_radii.len());
    for &big_r in &cfg.truncation_radii {
        let eigenvalue = truncated_eigenvalue(spec, r0, big_r, cfg.mesh_points)?;
        if let Some(prev) = truncated.last() {
            let prev: &TruncatedEigenvalue = prev;
            if eigenvalue > prev.eigenvalue + 10.0 * cfg.bisect_tol {
                return Err(Error::MeshFailure {
                    r_previous: prev.radius,
                    previous: prev.eigenvalue,
                    r_current: big_r,
                    current: eigenvalue,
                });
            }
        }
        truncated.push(TruncatedEigenvalue {
            radius: big_r,
            eigenvalue,
        });
    }
    let last = truncated[truncated.len() - 1].eigenvalue;
    let prev = truncated[truncated.len() - 2].eigenvalue;
    let upper = last.max(0.0);
    let lower = (last - (prev - last).max(0.0)).max(0.0).min(upper);
    Ok(SpectrumEstimate {
        lambda1_lower: lower,
        lambda1_upper: upper,
        method: Method::FiniteDifference,
        r0,
        diagnostics: Diagnostics {
            mesh_size: Some(1.0 / cfg.mesh_points as f64),
            truncated,
            ..Default::default()
        },
    })
}

/// Integrates `y'' + drift(t) y' + lambda y = 0` from `y(t0) = 0, y'(t0) = 1`
/// over `[t0, t0 + osc_window]` with fixed-step RK4, counting strict sign
/// changes of `y`. The step is `min(ode_step, 0.25 / sqrt(lambda))` so the
/// oscillation is resolved for large `lambda`. `(y, y')` is renormalized when
/// it leaves `[1e-100, 1e100]`; the ODE is linear, so zeros are unaffected.
fn integrate_probe<Q: Fn(f64) -> f64>(
    drift: Q,
    t0: f64,
    lambda: f64,
    cfg: &SolverConfig,
    stop_early: bool,
    mut trace: Option<&mut Vec<TracePoint>>,
) -> OscillationVerdict {
    let span = cfg.osc_window;
    let mut h = cfg.ode_step;
    if lambda > 0.0 {
        h = h.min(0.25 / lambda.sqrt());
    }
    let steps = (span / h).ceil() as usize;
    let h = span / steps as f64;
    let stride = (steps / MAX_TRACE_POINTS).max(1);

    let rhs = |t: f64, y: f64, p: f64| (p, -drift(t) * p - lambda * y);
    let (mut y, mut p) = (0.0_f64, 1.0_f64);
    let mut scale = 0i32;
    let mut sign = 1.0_f64;
    let mut changes = 0usize;
    let mut rescalings = 0usize;
    if let Some(tr) = trace.as_deref_mut() {
        tr.push(TracePoint {
            t: t0,
            y,
            log10_scale: 0,
        });
    }
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let (k1y, k1p) = rhs(t, y, p);
        let (k2y, k2p) = rhs(t + 0.5 * h, y + 0.5 * h * k1y, p + 0.5 * h * k1p);
        let (k3y, k3p) = rhs(t + 0.5 * h, y + 0.5 * h * k2y, p + 0.5 * h * k2p);
        let (k4y, k4p) = rhs(t + h, y + h * k3y, p + h * k3p);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);

        let size = y.abs().max(p.abs());
        if size > RESCALE_HIGH {
            y *= RESCALE_LOW;
            p *= RESCALE_LOW;
            scale += 100;
            rescalings += 1;
        } else if size < RESCALE_LOW && size > 0.0 {
            y *= RESCALE_HIGH;
            p *= RESCALE_HIGH;
            scale -= 100;
            rescalings += 1;
        }
        if y != 0.0 && y.signum() != sign {
            sign = y.signum();
            changes += 1;
        }
        if let Some(tr) = trace.as_deref_mut() {
            if (k + 1) % stride == 0 || k + 1 == steps {
                tr.push(TracePoint {
                    t: t0 + (k + 1) as f64 * h,
                    y,
                    log10_scale: scale,
                });
            }
        }
        if stop_early && changes >= cfg.n_osc {
            break;
        }
    }
    OscillationVerdict {
        oscillatory: changes >= cfg.n_osc,
        sign_changes: changes,
        window: (t0, t0 + span),
        rescalings,
        step: h,
    }
}

/// Oscillation probe for an arbitrary drift `q(t)`: `y'' + q y' + lambda y = 0`.
pub fn oscillation_probe_with<Q: Fn(f64) -> f64>(
    drift: Q,
    t0: f64,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<OscillationVerdict> {
    cfg.validate()?;
    if !lambda.is_finite() || !t0.is_finite() {
        return Err(Error::InvalidParameter(
            "t0 and lambda must be finite".into(),
        ));
    }
    Ok(integrate_probe(drift, t0, lambda, cfg, true, None))
}

fn check_window(spec: &ManifoldSpec, t0: f64, cfg: &SolverConfig) -> Result<()> {
    check_positive(t0, "t0")?;
    cfg.validate()?;
    for t in [t0, t0 + 0.5 * cfg.osc_window, t0 + cfg.osc_window] {
        if !spec.ln_sphere_density(t).is_finite() {
            return Err(Error::DomainError(format!(
                "sphere density is not positive at t = {t}"
            )));
        }
    }
    Ok(())
}

/// Radial equation `y'' + (v'/v) y' + lambda y = 0` of `spec`.
pub fn oscillation_probe(
    spec: &ManifoldSpec,
    t0: f64,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<OscillationVerdict> {
    check_window(spec, t0, cfg)?;
    oscillation_probe_with(|t| spec.drift(t), t0, lambda, cfg)
}

/// Same solution as [`oscillation_probe`] over the full window, with samples
/// for plotting.
pub fn oscillation_trace(
    spec: &ManifoldSpec,
    t0: f64,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<(OscillationVerdict, Vec<TracePoint>)> {
    check_window(spec, t0, cfg)?;
    let mut trace = Vec::new();
    let verdict = integrate_probe(|t| spec.drift(t), t0, lambda, cfg, false, Some(&mut trace));
    Ok((verdict, trace))
}

/// Infimum of the oscillatory `lambda` for the radial equation started at
/// `t0`, bisected to `bisect_tol`; an upper-bound proxy for
/// `lambda_1^f(M \ B_{t0})`.
pub fn oscillation_threshold(
    spec: &ManifoldSpec,
    t0: f64,
    cfg: &SolverConfig,
) -> Result<SpectrumEstimate> {
    check_window(spec, t0, cfg)?;
    let probe = |lambda: f64| integrate_probe(|t| spec.drift(t), t0, lambda, cfg, true, None);

    let mut lo = 0.0;
    let mut hi = 1.0_f64;
    let mut at_hi = probe(hi);
    while !at_hi.oscillatory {
        if hi >= LAMBDA_CEILING {
            return Err(Error::NoOscillationFound {
                lambda_max: LAMBDA_CEILING,
            });
        }
        lo = hi;
        hi = (2.0 * hi).min(LAMBDA_CEILING);
        at_hi = probe(hi);
    }
    while hi - lo > cfg.bisect_tol {
        let mid = 0.5 * (lo + hi);
        let v = probe(mid);
        if v.oscillatory {
            hi = mid;
            at_hi = v;
        } else {
            lo = mid;
        }
    }
    let star = 0.5 * (lo + hi);
    Ok(SpectrumEstimate {
        lambda1_lower: (star - cfg.bisect_tol).max(0.0),
        lambda1_upper: star + cfg.bisect_tol,
        method: Method::Oscillation,
        r0: t0,
        diagnostics: Diagnostics {
            sign_changes: Some(at_hi.sign_changes),
            window: Some(at_hi.window),
            ..Default::default()
        },
    })
}

/// `inf_{[r0, r0 + 1000]} (-Delta_f u / u)` for `u = e^{beta r}`, i.e.
/// `-beta^2 - beta (v'/v)`, sampled every `BARRIER_STEP`. When the barrier is
/// positive this bounds `lambda_1^f(M \ B_{r0})` from below.
pub fn barrier_lower_bound(spec: &ManifoldSpec, r0: f64, beta: f64) -> Result<f64> {
    check_positive(r0, "r0")?;
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta = {beta}")));
    }
    let steps = (BARRIER_SPAN / BARRIER_STEP).round() as usize;
    let mut inf = f64::INFINITY;
    for k in 0..=steps {
        let r = r0 + k as f64 * BARRIER_STEP;
        let q = spec.drift(r);
        if !q.is_finite() {
            return Err(Error::DomainError(format!("drift undefined at r = {r}")));
        }
        inf = inf.min(-beta * beta - beta * q);
    }
    Ok(inf)
}

/// Radial test function `u = e^{h_j} chi_r` supported in `[omega_r, r + delta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunction {
    pub omega_r: f64,
    pub alpha: f64,
    pub j: f64,
    pub r: f64,
    pub delta: f64,
}

impl TestFunction {
    pub fn new(omega_r: f64, alpha: f64, j: f64, r: f64, delta: f64) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(omega_r > 0.0) || !(delta > 0.0) || !(alpha >= 0.0) {
            return bad("need omega_r > 0, delta > 0, alpha >= 0");
        }
        if !(omega_r < j && j <= r) {
            return bad("need omega_r < j <= r");
        }
        if omega_r + delta > r {
            return bad("the inner and outer ramps overlap (omega_r + delta > r)");
        }
        if ![omega_r, alpha, j, r, delta].iter().all(|x| x.is_finite()) {
            return bad("parameters must be finite");
        }
        Ok(TestFunction {
            omega_r,
            alpha,
            j,
            r,
            delta,
        })
    }

    /// Cutoff: ramps up over `[omega_r, omega_r + delta]`, down over `[r, r + delta]`.
    pub fn chi(&self, t: f64) -> f64 {
        if t <= self.omega_r || t >= self.r + self.delta {
            0.0
        } else if t < self.omega_r + self.delta {
            (t - self.omega_r) / self.delta
        } else if t > self.r {
            1.0 - (t - self.r) / self.delta
        } else {
            1.0
        }
    }

    fn chi_slope(&self, t: f64) -> f64 {
        if t <= self.omega_r || t >= self.r + self.delta {
            0.0
        } else if t < self.omega_r + self.delta {
            1.0 / self.delta
        } else if t > self.r {
            -1.0 / self.delta
        } else {
            0.0
        }
    }

    /// `alpha t` up to `j`, then `2 alpha j - alpha t`.
    pub fn h(&self, t: f64) -> f64 {
        if t <= self.j {
            self.alpha * t
        } else {
            2.0 * self.alpha * self.j - self.alpha * t
        }
    }

    fn h_slope(&self, t: f64) -> f64 {
        if t <= self.j {
            self.alpha
        } else {
            -self.alpha
        }
    }

    fn kinks(&self) -> [f64; 5] {
        [
            self.omega_r,
            self.omega_r + self.delta,
            self.j,
            self.r,
            self.r + self.delta,
        ]
    }

    /// `(t, chi(t), h(t))` on a uniform grid over the support, for plotting.
    pub fn samples(&self, points: usize) -> Vec<(f64, f64, f64)> {
        let (a, b) = (self.omega_r, self.r + self.delta);
        let points = points.max(2);
        (0..points)
            .map(|k| a + (b - a) * k as f64 / (points - 1) as f64)
            .map(|t| (t, self.chi(t), self.h(t)))
            .collect()
    }

    /// `int (u')^2 v / int u^2 v` over the support.
    pub fn rayleigh_quotient(&self, spec: &ManifoldSpec, q: &QuadratureConfig) -> Result<f64> {
        q.validate()?;
        let (a, b) = (self.omega_r, self.r + self.delta);
        let mut breaks = spec.breakpoints();
        breaks.extend(self.kinks());
        let log_weight = |t: f64| 2.0 * self.h(t) + spec.ln_sphere_density(t);
        let shift = (0..=1024)
            .map(|k| a + (b - a) * k as f64 / 1024.0)
            .chain(self.kinks())
            .map(log_weight)
            .filter(|x| x.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::DomainError(
                "test function weight is not finite".into(),
            ));
        }
        // The slopes jump at the kinks, so each piece reads them at its midpoint.
        let mut cuts: Vec<f64> = self.kinks().to_vec();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut num = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let (hs, cs) = (self.h_slope(mid), self.chi_slope(mid));
            num += integrate(
                |t| {
                    let s = hs * self.chi(t) + cs;
                    (log_weight(t) - shift).exp() * s * s
                },
                w[0],
                w[1],
                &breaks,
                q,
            )?;
        }
        let den = integrate(
            |t| {
                let c = self.chi(t);
                (log_weight(t) - shift).exp() * c * c
            },
            a,
            b,
            &breaks,
            q,
        )?;
        if !(den > 0.0) {
            return Err(Error::PrecisionLoss {
                at: b,
                reason: "test function has zero weighted mass".into(),
            });
        }
        Ok(num / den)
    }
}

/// Rayleigh quotient of `u = e^{h_j} chi_r` with `Omega = B_{omega_r}`; an
/// upper bound for `lambda_1^f(M \ B_{omega_r})`.
pub fn test_function_bound(
    spec: &ManifoldSpec,
    omega_r: f64,
    alpha: f64,
    j: f64,
    r: f64,
    delta: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    TestFunction::new(omega_r, alpha, j, r, delta)?.rayleigh_quotient(spec, q)
}

/// `inf sigma_ess(-Delta_f) = sup_r0 lambda_1^f(M \ B_r0)`, approximated by
/// the oscillation threshold at each radius in [`ESS_INNER_RADII`].
pub fn ess_spectrum_bottom(spec: &ManifoldSpec, cfg: &SolverConfig) -> Result<SpectrumEstimate> {
    let mut best: Option<SpectrumEstimate> = None;
    let mut inner = Vec::with_capacity(ESS_INNER_RADII.len());
    let mut lower = 0.0_f64;
    for r0 in ESS_INNER_RADII {
        let est = oscillation_threshold(spec, r0, cfg)?;
        inner.push(InnerRadiusEstimate {
            r0,
            lambda: est.midpoint(),
        });
        lower = lower.max(est.lambda1_lower);
        if best
            .as_ref()
            .is_none_or(|b| est.lambda1_upper > b.lambda1_upper)
        {
            best = Some(est);
        }
    }
    let best = best.expect("at least one inner radius");
    Ok(SpectrumEstimate {
        lambda1_lower: lower.min(best.lambda1_upper),
        lambda1_upper: best.lambda1_upper,
        method: Method::Oscillation,
        r0: best.r0,
        diagnostics: Diagnostics {
            inner_radii: inner,
            ..best.diagnostics
        },
    })
}
