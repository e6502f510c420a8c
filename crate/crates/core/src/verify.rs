//! Reproducible verification suite: each criterion returns a table of checks
//! with the measured value beside the reference value.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    lemma_split, mean_curvature_bounds, nonexistence_verdict, GrowthRegime, HypersurfaceData,
};
use crate::error::Result;
use crate::manifold::{hermite_cap, make_model, unit_sphere_volume, ManifoldSpec, ModelFamily};
use crate::profile::{Formula, RadialProfile};
use crate::quadrature::QuadratureConfig;
use crate::spectrum::{
    barrier_lower_bound, ess_spectrum_bottom, lambda1_exterior_fd, oscillation_probe_with,
    oscillation_threshold, SolverConfig,
};
use crate::volume::{ball_volume, mu_v, mu_w, total_volume, TotalVolume};

pub const SEED: u64 = 0x5EED_2024;
pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Measured {
    Value(f64),
    Count { passed: usize, total: usize },
    Flag(bool),
    Error { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub measured: Measured,
    pub expected: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Wall-clock time; left out of reports so they stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionOutcome {
    fn new(id: u8, title: &str, checks: Vec<Check>, start: Instant) -> Self {
        CriterionOutcome {
            id,
            title: title.to_string(),
            pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
            checks,
            elapsed: start.elapsed(),
        }
    }

    /// One line: `criterion  3 PASS  growth exponent mu_w (3/3 checks, 1.2 s)`.
    pub fn summary_line(&self) -> String {
        let passed = self.checks.iter().filter(|c| c.pass).count();
        format!(
            "criterion {:>2} {}  {} ({}/{} checks, {:.1} s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            passed,
            self.checks.len(),
            self.elapsed.as_secs_f64()
        )
    }
}

fn within(
    label: impl Into<String>,
    value: Result<f64>,
    target: f64,
    tol: f64,
    reference: &str,
) -> Check {
    let label = label.into();
    match value {
        Ok(v) => Check {
            label,
            measured: Measured::Value(v),
            expected: format!("{reference} ± {tol:e}"),
            pass: (v - target).abs() <= tol,
        },
        Err(e) => failed(label, e, reference),
    }
}

fn at_most(label: impl Into<String>, value: Result<f64>, limit: f64) -> Check {
    let label = label.into();
    match value {
        Ok(v) => Check {
            label,
            measured: Measured::Value(v),
            expected: format!("<= {limit}"),
            pass: v <= limit,
        },
        Err(e) => failed(label, e, &format!("<= {limit}")),
    }
}

fn failed(label: String, e: crate::error::Error, reference: &str) -> Check {
    Check {
        label,
        measured: Measured::Error {
            error: e.to_string(),
        },
        expected: reference.to_string(),
        pass: false,
    }
}

fn count(label: impl Into<String>, passed: usize, total: usize) -> Check {
    Check {
        label: label.into(),
        measured: Measured::Count { passed, total },
        expected: format!("{total}/{total}"),
        pass: passed == total,
    }
}

fn flag(label: impl Into<String>, value: bool, expected: bool) -> Check {
    Check {
        label: label.into(),
        measured: Measured::Flag(value),
        expected: expected.to_string(),
        pass: value == expected,
    }
}

fn paper(alpha: f64, n: usize) -> Result<ManifoldSpec> {
    make_model(ModelFamily::PaperEquality { alpha, r0: 1.0 }, n)
}

/// Equality model: threshold `1/4` and finite-difference upper edge.
pub fn criterion_1() -> CriterionOutcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut checks = Vec::new();
    for n in [2, 3, 5] {
        let t = Instant::now();
        let spec = paper(1.0, n);
        let thr = spec
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|s| oscillation_threshold(s, 1.0, &cfg));
        checks.push(within(
            format!("lambda_1 threshold, n={n}"),
            thr.map(|e| e.midpoint()),
            0.25,
            1e-3,
            "1/4",
        ));
        let fd = spec
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|s| lambda1_exterior_fd(s, 1.0, &cfg));
        checks.push(at_most(
            format!("FD upper edge at R=400, n={n}"),
            fd.map(|e| e.lambda1_upper),
            0.26,
        ));
        checks.push(flag(
            format!("runtime below 10 s, n={n}"),
            t.elapsed().as_secs_f64() < 10.0,
            true,
        ));
    }
    CriterionOutcome::new(1, "equality model spectrum", checks, start)
}

/// Equality model across `alpha`: essential spectrum bottom and barrier.
pub fn criterion_2() -> CriterionOutcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut checks = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        let target = alpha * alpha / 4.0;
        let spec = paper(alpha, 3);
        let ess = spec
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|s| ess_spectrum_bottom(s, &cfg));
        checks.push(within(
            format!("inf sigma_ess, alpha={alpha}"),
            ess.map(|e| e.midpoint()),
            target,
            (4e-3 * alpha * alpha).max(1e-3),
            &format!("alpha^2/4 = {target}"),
        ));
        let barrier = spec
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|s| barrier_lower_bound(s, 1.0, alpha / 2.0));
        checks.push(within(
            format!("barrier beta=alpha/2, alpha={alpha}"),
            barrier,
            target,
            1e-10,
            &format!("{target}"),
        ));
    }
    CriterionOutcome::new(2, "essential spectrum and barrier", checks, start)
}

/// Tail decay exponent of the equality model.
pub fn criterion_3() -> CriterionOutcome {
    let start = Instant::now();
    let q = QuadratureConfig::default();
    let mut checks = Vec::new();
    for n in [2, 3, 5] {
        let est = paper(1.0, n).and_then(|s| mu_w(&s, 1e3, &q));
        checks.push(within(
            format!("μ_w = 1 (n={n})"),
            est.as_ref().map(|e| e.value).map_err(Clone::clone),
            1.0,
            0.02,
            "1",
        ));
        checks.push(at_most(
            format!("μ_w window spread (n={n})"),
            est.map(|e| e.spread),
            0.01,
        ));
    }
    CriterionOutcome::new(3, "growth exponent mu_w", checks, start)
}

/// Closed-form ball volumes and total volume of the equality model.
pub fn criterion_4() -> CriterionOutcome {
    let start = Instant::now();
    let q = QuadratureConfig::default();
    let (alpha, r0) = (1.0_f64, 1.0_f64);
    let mut checks = Vec::new();
    for n in [2, 3, 5] {
        let spec = match paper(alpha, n) {
            Ok(s) => s,
            Err(e) => {
                checks.push(failed(format!("model n={n}"), e, "valid"));
                continue;
            }
        };
        let omega = unit_sphere_volume(n);
        let cap = match ball_volume(&spec, r0, &q) {
            Ok(v) => v,
            Err(e) => {
                checks.push(failed(format!("cap volume n={n}"), e, "finite"));
                continue;
            }
        };
        for r in [2.0, 5.0, 10.0, 50.0] {
            let exact = cap + omega / alpha * ((-alpha * r0).exp() - (-alpha * r).exp());
            let rel = ball_volume(&spec, r, &q).map(|v| (v - exact).abs() / exact);
            checks.push(at_most(
                format!("Vol_f(B_{r}) relative error, n={n}"),
                rel,
                1e-6,
            ));
        }
        let exact = cap + omega / (alpha * (alpha * r0).exp());
        let rel = total_volume(&spec, &q).and_then(|t| match t {
            TotalVolume::Finite { value } => Ok((value - exact).abs() / exact),
            other => Err(crate::error::Error::WrongVolumeRegime(format!("{other:?}"))),
        });
        checks.push(at_most(
            format!("Vol_f(M) relative error, n={n}"),
            rel,
            1e-6,
        ));
    }
    CriterionOutcome::new(4, "closed-form volume", checks, start)
}

/// Gaussian soliton: constant radial Bakry-Emery curvature.
pub fn criterion_5() -> CriterionOutcome {
    let start = Instant::now();
    let mut checks = Vec::new();
    for n in [2, 3] {
        let spec = make_model(ModelFamily::GaussianSoliton, n);
        for r in [0.5, 1.0, 2.0, 5.0] {
            let v = spec
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|s| s.radial_bakry_emery(r));
            checks.push(within(format!("Ric_f(r={r}), n={n}"), v, 0.5, 1e-10, "1/2"));
        }
    }
    CriterionOutcome::new(5, "gaussian soliton curvature", checks, start)
}

/// Unweighted Euclidean space: zero growth exponent and zero spectrum bottom.
pub fn criterion_6() -> CriterionOutcome {
    let start = Instant::now();
    let q = QuadratureConfig::default();
    let cfg = SolverConfig::default();
    let mut checks = Vec::new();
    for n in [2, 3] {
        let spec = make_model(ModelFamily::Euclidean, n);
        let mv = spec
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|s| mu_v(s, 1e4, &q));
        checks.push(within(
            format!("mu_v, n={n}"),
            mv.map(|e| e.value),
            0.0,
            0.02,
            "0",
        ));
        let ess = spec
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|s| ess_spectrum_bottom(s, &cfg));
        checks.push(at_most(
            format!("inf sigma_ess, n={n}"),
            ess.map(|e| e.midpoint()),
            1e-3,
        ));
    }
    CriterionOutcome::new(6, "euclidean sanity", checks, start)
}

/// Piecewise-constant drift with values in `[-alpha, alpha]` on unit cells.
struct CellDrift {
    values: Vec<f64>,
}

impl CellDrift {
    fn at(&self, t: f64) -> f64 {
        let i = (t.max(0.0) as usize).min(self.values.len() - 1);
        self.values[i]
    }
}

/// Oscillation above and non-oscillation below the constant-coefficient threshold.
pub fn criterion_7() -> CriterionOutcome {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let cells = cfg.osc_window.ceil() as usize + 1;
    let trials = 200;

    let mut osc_ok = 0;
    for _ in 0..trials {
        let alpha: f64 = rng.gen_range(0.1..3.0);
        let lambda = (alpha * alpha + rng.gen_range(0.1..4.0)) / 4.0;
        let drift = CellDrift {
            values: (0..cells).map(|_| rng.gen_range(-alpha..=alpha)).collect(),
        };
        if matches!(oscillation_probe_with(|t| drift.at(t), 0.0, lambda, &cfg), Ok(v) if v.oscillatory)
        {
            osc_ok += 1;
        }
    }

    let mut calm_ok = 0;
    for _ in 0..trials {
        let alpha: f64 = rng.gen_range(0.5..3.0);
        let gap = rng.gen_range(0.1..(alpha * alpha).min(4.0));
        let lambda = (alpha * alpha - gap) / 4.0;
        if matches!(oscillation_probe_with(|_| -alpha, 0.0, lambda, &cfg), Ok(v) if !v.oscillatory)
        {
            calm_ok += 1;
        }
    }
    let checks = vec![
        count("oscillatory when 4 lambda - alpha^2 >= 0.1", osc_ok, trials),
        count(
            "non-oscillatory when 4 lambda - alpha^2 <= -0.1",
            calm_ok,
            trials,
        ),
    ];
    CriterionOutcome::new(7, "oscillation property suite", checks, start)
}

/// A randomly drawn admissible model with its tail drift bound `alpha`.
#[derive(Debug, Clone)]
pub struct AdmissibleProfile {
    pub spec: ManifoldSpec,
    pub alpha: f64,
}

/// Hermite cap on `[0, r_c]` followed by an exponential or power warping
/// tail, with a linear weight. Draws until the cap stays positive.
pub fn random_admissible_profile(rng: &mut ChaCha8Rng) -> AdmissibleProfile {
    loop {
        let n: usize = rng.gen_range(2..=5);
        let nm1 = n as f64 - 1.0;
        let r_c: f64 = rng.gen_range(0.5..2.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (tail, slope, alpha) = if rng.gen_bool(0.5) {
            let rate: f64 = rng.gen_range(-0.5..0.5);
            let drift = sign * rng.gen_range(0.05..2.0);
            let slope = nm1 * rate - drift;
            (
                Formula::Exponential { scale: 1.0, rate },
                slope,
                drift.abs(),
            )
        } else {
            let exponent: f64 = rng.gen_range(0.25..1.5);
            let slope = sign * rng.gen_range(0.05..1.5);
            let alpha = (nm1 * exponent / r_c - slope).abs().max(slope.abs());
            (
                Formula::Power {
                    scale: 1.0,
                    exponent,
                },
                slope,
                alpha,
            )
        };
        let piece = crate::profile::Piece {
            start: r_c,
            end: f64::INFINITY,
            formula: tail,
        };
        let cap = hermite_cap(piece.value(r_c), piece.d1(r_c));
        let Ok(warping) = RadialProfile::new(vec![(0.0, cap), (r_c, tail)]) else {
            continue;
        };
        let Ok(weight) = RadialProfile::single(Formula::Linear {
            slope,
            intercept: 0.0,
        }) else {
            continue;
        };
        if let Ok(spec) = ManifoldSpec::new(n, warping, weight, "random-admissible") {
            return AdmissibleProfile { spec, alpha };
        }
    }
}

/// Growth exponent matching the volume regime: `mu_v` or `mu_w` at `r_max`.
pub fn regime_exponent(spec: &ManifoldSpec, r_max: f64, q: &QuadratureConfig) -> Result<f64> {
    match total_volume(spec, q)? {
        TotalVolume::Finite { .. } => mu_w(spec, r_max, q).map(|e| e.value),
        _ => mu_v(spec, r_max, q).map(|e| e.value),
    }
}

/// The computed spectrum bottom never exceeds `min(mu^2, alpha^2)/4`.
pub fn criterion_8() -> CriterionOutcome {
    let start = Instant::now();
    let q = QuadratureConfig::default();
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut checks = Vec::new();
    for i in 0..20 {
        let p = random_admissible_profile(&mut rng);
        let bound = regime_exponent(&p.spec, 1e4, &q).and_then(|mu| {
            let limit = (mu * mu).min(p.alpha * p.alpha) / 4.0 + 5e-3;
            ess_spectrum_bottom(&p.spec, &cfg).map(|e| e.midpoint() - limit)
        });
        checks.push(at_most(
            format!("profile {i}: inf sigma_ess - bound"),
            bound,
            0.0,
        ));
    }
    CriterionOutcome::new(8, "bound compliance sweep", checks, start)
}

/// Splitting inequality: random checks and the equality case.
pub fn criterion_9() -> CriterionOutcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let random_m = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.5) {
            rng.gen_range(f64::MIN_POSITIVE..=100.0)
        } else {
            rng.gen_range(-101.0..-1.01)
        }
    };
    let trials = 100_000;
    let mut ok = 0;
    for _ in 0..trials {
        let (a, b) = (rng.gen_range(-100.0..=100.0), rng.gen_range(-100.0..=100.0));
        let m = random_m(&mut rng);
        if matches!(lemma_split(a, b, m), Ok((l, r)) if l - r >= -1e-9) {
            ok += 1;
        }
    }
    let eq_trials = 1000;
    let mut worst = 0.0_f64;
    let mut eq_ok = 0;
    for _ in 0..eq_trials {
        let m = random_m(&mut rng);
        let b: f64 = rng.gen_range(-10.0..=10.0);
        // a = -k^2 b with k^2 = (1+m)/m
        let a = -(1.0 + m) / m * b;
        if let Ok((l, r)) = lemma_split(a, b, m) {
            let gap = (l - r).abs();
            worst = worst.max(gap);
            if gap <= 1e-9 {
                eq_ok += 1;
            }
        }
    }
    let checks = vec![
        count("lhs >= rhs - 1e-9", ok, trials),
        count("equality case |lhs - rhs| <= 1e-9", eq_ok, eq_trials),
        at_most("worst equality gap", Ok(worst), 1e-9),
    ];
    CriterionOutcome::new(9, "splitting inequality", checks, start)
}

/// Curvature-bound examples and monotonicity sweeps.
pub fn criterion_10() -> CriterionOutcome {
    let start = Instant::now();
    let data = |n, m, mu, ric_inf, ric_nm_inf| HypersurfaceData {
        n,
        m,
        mu,
        ric_inf,
        grad_inf_sq: 0.0,
        ric_nm_inf,
    };
    let mut checks = Vec::new();
    let b = mean_curvature_bounds(&data(3, 1.0, 0.0, 0.5, 0.5));
    checks.push(within(
        "H_f^2 lower bound, Ric_f^{nm} >= 0 example",
        b.map(|b| b.hf_sq_lower),
        1.5,
        0.0,
        "1.5",
    ));
    let forced = |d| {
        mean_curvature_bounds(&d)
            .map(|b| b.forced_f_minimal)
            .unwrap_or(false)
    };
    checks.push(flag(
        "forced f-minimal, mu=0, ric_nm=0.5",
        forced(data(3, 1.0, 0.0, 0.5, 0.5)),
        true,
    ));
    checks.push(flag(
        "forced f-minimal, mu=2, ric_nm=1",
        forced(data(3, 1.0, 2.0, 0.0, 1.0)),
        true,
    ));
    let verdict = |k, r| nonexistence_verdict(k, r).unwrap_or(false);
    checks.push(flag(
        "nonexistence k=1, mu_v=1.9",
        verdict(1.0, GrowthRegime::InfiniteVolume { mu_v: 1.9 }),
        true,
    ));
    checks.push(flag(
        "nonexistence k=0.25, polynomial",
        verdict(0.25, GrowthRegime::Polynomial),
        true,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let sweeps = 10_000;
    let (mut m_ok, mut v_ok, mut f_ok) = (0, 0, 0);
    for _ in 0..sweeps {
        let n = rng.gen_range(2..=10);
        let mu: f64 = rng.gen_range(0.0..4.0);
        // The upper bound grows with m only while its bracket is nonnegative.
        let ric_nm = rng.gen_range(-2.0..=mu * mu / 4.0);
        let ric = rng.gen_range(-2.0..2.0);
        let m1: f64 = rng.gen_range(0.01..10.0);
        let m2 = m1 + rng.gen_range(0.0..10.0);
        let d1 = data(n, m1, mu, ric, ric_nm);
        let d2 = HypersurfaceData { m: m2, ..d1 };
        if let (Ok(b1), Ok(b2)) = (mean_curvature_bounds(&d1), mean_curvature_bounds(&d2)) {
            if b2.hf_sq_upper >= b1.hf_sq_upper {
                m_ok += 1;
            }
        }

        let any_nm = rng.gen_range(-2.0..4.0);
        if let Ok(b) = mean_curvature_bounds(&data(n, m1, mu, ric, any_nm)) {
            if !b.forced_f_minimal || b.hf_sq_upper <= 1e-12 {
                f_ok += 1;
            }
        }

        let k: f64 = rng.gen_range(0.01..4.0);
        let e: f64 = rng.gen_range(0.0..5.0);
        let e_less = e * rng.gen_range(0.0..1.0);
        let pick = rng.gen_range(0..4);
        let regime = |x| match pick {
            0 => GrowthRegime::InfiniteVolume { mu_v: x },
            1 => GrowthRegime::FiniteVolume { mu_w: x },
            2 => GrowthRegime::LogDerivative { alpha: x },
            _ => GrowthRegime::ExponentialRate { alpha: x },
        };
        let hi = nonexistence_verdict(k, regime(e)).unwrap_or(false);
        let lo = nonexistence_verdict(k, regime(e_less)).unwrap_or(false);
        if !hi || lo {
            v_ok += 1;
        }
    }
    checks.push(count("hf_sq_upper nondecreasing in m", m_ok, sweeps));
    checks.push(count(
        "forced f-minimal implies hf_sq_upper <= 1e-12",
        f_ok,
        sweeps,
    ));
    checks.push(count("verdict monotone in exponent", v_ok, sweeps));
    CriterionOutcome::new(10, "curvature bound calculators", checks, start)
}

pub fn run_criterion(id: u8) -> Option<CriterionOutcome> {
    Some(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        _ => return None,
    })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .filter_map(|&id| run_criterion(id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        for c in [criterion_5(), criterion_9(), criterion_10()] {
            assert!(c.pass, "{}: {:?}", c.summary_line(), c.checks);
        }
    }

    #[test]
    fn random_profiles_are_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let mut b = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let (pa, pb) = (
                random_admissible_profile(&mut a),
                random_admissible_profile(&mut b),
            );
            assert_eq!(pa.alpha, pb.alpha);
            assert_eq!(
                pa.spec.sphere_density(3.0).unwrap(),
                pb.spec.sphere_density(3.0).unwrap()
            );
        }
    }

    #[test]
    fn failed_computation_is_a_failed_check() {
        let c = within(
            "x",
            Err(crate::error::Error::InvalidParameter("bad".into())),
            0.0,
            1.0,
            "0",
        );
        assert!(!c.pass);
        assert!(matches!(c.measured, Measured::Error { .. }));
    }
}
