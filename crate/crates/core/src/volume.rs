//! Weighted volumes of balls, annuli and the whole manifold, computed from
//! the sphere density by the coarea formula, and the growth exponents
//! `mu_v`, `mu_w` and `mu_delta`.
//!
//! Quantities that grow or decay exponentially are integrated in log space
//! (`ln int v = S + ln int exp(ln v - S)`), so the exponents stay finite at
//! radii where `Vol_f(B_r)` or the tail mass would overflow or underflow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::ManifoldSpec;
use crate::quadrature::{integrate, QuadratureConfig};

/// Ratio of the geometric sampling grid.
pub const GRID_RATIO: f64 = 1.1;
/// Log-derivative threshold below which a grid point counts as geometric decay.
pub const TAIL_EPS: f64 = 1e-6;
/// Consecutive certified grid points needed to classify the tail.
pub const TAIL_RUN: usize = 32;
/// Outermost radius scanned by [`total_volume`].
pub const TAIL_HORIZON: f64 = 1e4;

const MAX_TAIL_CHUNKS: usize = 100_000;
const SHIFT_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TotalVolume {
    Finite { value: f64 },
    Infinite,
    Undetermined,
}

impl TotalVolume {
    pub fn finite(&self) -> Option<f64> {
        match *self {
            TotalVolume::Finite { value } => Some(value),
            _ => None,
        }
    }
}

/// Tail-window summary of a sampled sequence, used as a surrogate for
/// `liminf` (`value` = window minimum) or `limsup` (window maximum).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub value: f64,
    pub window: (f64, f64),
    /// max - min of the sequence over the window.
    pub spread: f64,
    /// `(r, sequence value)` over the whole sampled grid.
    pub samples: Vec<(f64, f64)>,
}

/// `(liminf, limsup)` surrogates of `mu_delta(r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaExponents {
    pub delta: f64,
    pub lower: TailEstimate,
    pub upper: TailEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeSample {
    pub r: f64,
    pub vol_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeReport {
    pub samples: Vec<VolumeSample>,
    pub total: TotalVolume,
    pub mu_v: Option<TailEstimate>,
    pub mu_w: Option<TailEstimate>,
    pub grid: Vec<f64>,
}

impl VolumeReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,vol_f\n");
        for s in &self.samples {
            out.push_str(&format!("{},{}\n", s.r, s.vol_f));
        }
        out
    }
}

fn density(spec: &ManifoldSpec, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        spec.sphere_density(t).unwrap_or(0.0)
    }
}

fn check_nonneg(r: f64, what: &str) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(format!("{what} = {r} must be >= 0")))
    }
}

/// `Vol_f(B_r) = int_0^r v(t) dt`.
pub fn ball_volume(spec: &ManifoldSpec, r: f64, q: &QuadratureConfig) -> Result<f64> {
    check_nonneg(r, "radius")?;
    q.validate()?;
    integrate(|t| density(spec, t), 0.0, r, &spec.breakpoints(), q)
}

/// `Vol_f(A_delta(dB_r)) = int_r^{r+delta} v(t) dt`.
pub fn annulus_volume(
    spec: &ManifoldSpec,
    r: f64,
    delta: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    check_nonneg(r, "radius")?;
    if !(delta > 0.0) {
        return Err(Error::DomainError(format!(
            "width delta = {delta} must be > 0"
        )));
    }
    q.validate()?;
    integrate(|t| density(spec, t), r, r + delta, &spec.breakpoints(), q)
}

/// `ln int_a^b v`, shifted by the sampled maximum of `ln v` on `[a, b]`.
fn ln_integral(spec: &ManifoldSpec, a: f64, b: f64, q: &QuadratureConfig) -> Result<f64> {
    let lo = if a > 0.0 { a } else { b * 1e-9 };
    let shift = (0..=SHIFT_SAMPLES)
        .map(|k| lo + (b - lo) * k as f64 / SHIFT_SAMPLES as f64)
        .map(|t| spec.ln_sphere_density(t))
        .filter(|x| x.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::PrecisionLoss {
            at: b,
            reason: "sphere density is not representable on the interval".into(),
        });
    }
    let mass = integrate(
        |t| {
            if t <= 0.0 {
                0.0
            } else {
                (spec.ln_sphere_density(t) - shift).exp()
            }
        },
        a,
        b,
        &spec.breakpoints(),
        q,
    )?;
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::PrecisionLoss {
            at: b,
            reason: format!("shifted mass {mass} on [{a}, {b}]"),
        });
    }
    Ok(shift + mass.ln())
}

/// `ln Vol_f(B_r)`, finite even where `Vol_f(B_r)` overflows.
pub fn ln_ball_volume(spec: &ManifoldSpec, r: f64, q: &QuadratureConfig) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::DomainError(format!("radius r = {r} must be > 0")));
    }
    ln_integral(spec, 0.0, r, q)
}

pub fn ln_annulus_volume(
    spec: &ManifoldSpec,
    r: f64,
    delta: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    check_nonneg(r, "radius")?;
    if !(delta > 0.0) {
        return Err(Error::DomainError(format!(
            "width delta = {delta} must be > 0"
        )));
    }
    ln_integral(spec, r, r + delta, q)
}

/// `ln (Vol_f(M) - Vol_f(B_r)) = ln int_r^inf v`, integrated directly in
/// chunks scaled to the local decay rate. The integration stops once the
/// geometric remainder `v(b) / |(ln v)'(b)|` drops below `rel_tol` of the
/// accumulated mass; that remainder is then added (exact for exponential tails).
pub fn ln_tail_volume(spec: &ManifoldSpec, r: f64, q: &QuadratureConfig) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::DomainError(format!("radius r = {r} must be > 0")));
    }
    let shift = spec.ln_sphere_density(r);
    if !shift.is_finite() {
        return Err(Error::PrecisionLoss {
            at: r,
            reason: "sphere density is not representable".into(),
        });
    }
    let breaks = spec.breakpoints();
    let mut acc = 0.0;
    let mut a = r;
    for _ in 0..MAX_TAIL_CHUNKS {
        let rate = -spec.drift(a);
        let width = if rate > 0.0 {
            (8.0 / rate).clamp(1e-3, 1e3)
        } else {
            1.0
        };
        let b = a + width;
        acc += integrate(
            |t| (spec.ln_sphere_density(t) - shift).exp(),
            a,
            b,
            &breaks,
            q,
        )?;
        a = b;
        let ld = spec.drift(a);
        if ld < 0.0 {
            let rem = (spec.ln_sphere_density(a) - shift).exp() / -ld;
            if rem <= q.rel_tol * acc {
                acc += rem;
                if !(acc > 0.0) || !acc.is_finite() {
                    break;
                }
                return Ok(shift + acc.ln());
            }
        }
        if !acc.is_finite() {
            break;
        }
    }
    Err(Error::PrecisionLoss {
        at: r,
        reason: "tail mass did not converge".into(),
    })
}

/// Points `r0 * GRID_RATIO^k` up to `r_end` inclusive.
fn geometric_grid(r0: f64, r_end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let r = r0 * GRID_RATIO.powi(k);
        if r > r_end * (1.0 + 1e-12) {
            break;
        }
        out.push(r);
        k += 1;
    }
    out
}

/// Classifies `Vol_f(M)`. Scans a geometric grid out to [`TAIL_HORIZON`]:
/// `TAIL_RUN` consecutive points with `(ln v)' <= -TAIL_EPS` certify a
/// geometric tail, whose remainder past the last point `R` is bounded by
/// `v(R) / rate` (rate = smallest decay observed along the run); once that
/// bound is below tolerance the volume is `Finite`. `Infinite` requires
/// `(ln v)' >= 0` on the last `TAIL_RUN` grid points. Anything else is
/// `Undetermined`.
pub fn total_volume(spec: &ManifoldSpec, q: &QuadratureConfig) -> Result<TotalVolume> {
    q.validate()?;
    let mut neg_run = 0usize;
    let mut pos_run = 0usize;
    let mut run_rate = f64::INFINITY;
    for r in geometric_grid(0.01, TAIL_HORIZON) {
        let ld = spec.drift(r);
        if ld <= -TAIL_EPS {
            neg_run += 1;
            pos_run = 0;
            run_rate = run_rate.min(-ld);
        } else {
            neg_run = 0;
            run_rate = f64::INFINITY;
            pos_run = if ld >= 0.0 { pos_run + 1 } else { 0 };
        }
        if neg_run >= TAIL_RUN {
            let vol = ball_volume(spec, r, q)?;
            let rem = density(spec, r) / run_rate;
            if rem <= q.abs_tol.max(q.rel_tol * vol) {
                return Ok(TotalVolume::Finite { value: vol + rem });
            }
        }
    }
    Ok(if pos_run >= TAIL_RUN {
        TotalVolume::Infinite
    } else {
        TotalVolume::Undetermined
    })
}

/// Sampling grid for the exponents: geometric, ending exactly at `r_max`,
/// reaching down to `r_max / 16`.
fn exponent_grid(r_max: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..)
        .map(|k| r_max / GRID_RATIO.powi(k))
        .take_while(|&r| r >= r_max / 16.0)
        .collect();
    g.reverse();
    g
}

fn summarize(samples: Vec<(f64, f64)>, r_max: f64, take_max: bool) -> Result<TailEstimate> {
    let window: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(r, _)| r >= r_max / 2.0 * (1.0 - 1e-12))
        .collect();
    if window.len() < 2 {
        return Err(Error::PrecisionLoss {
            at: samples.last().map_or(r_max, |s| s.0),
            reason: "fewer than two samples in the tail window".into(),
        });
    }
    let min = window.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let max = window.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(TailEstimate {
        value: if take_max { max } else { min },
        window: (window[0].0, window[window.len() - 1].0),
        spread: max - min,
        samples,
    })
}

fn check_r_max(r_max: f64) -> Result<()> {
    if r_max > 0.0 && r_max.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "r_max = {r_max} must be > 0"
        )))
    }
}

/// Surrogate for `liminf (1/r) ln Vol_f(B_r)`; only meaningful when the
/// total volume is infinite.
pub fn mu_v(spec: &ManifoldSpec, r_max: f64, q: &QuadratureConfig) -> Result<TailEstimate> {
    check_r_max(r_max)?;
    if let TotalVolume::Finite { value } = total_volume(spec, q)? {
        return Err(Error::WrongVolumeRegime(format!(
            "mu_v needs infinite volume, Vol_f(M) = {value}"
        )));
    }
    mu_v_unchecked(spec, r_max, q)
}

pub(crate) fn mu_v_unchecked(
    spec: &ManifoldSpec,
    r_max: f64,
    q: &QuadratureConfig,
) -> Result<TailEstimate> {
    let samples = exponent_grid(r_max)
        .into_iter()
        .map(|r| Ok((r, ln_ball_volume(spec, r, q)? / r)))
        .collect::<Result<Vec<_>>>()?;
    summarize(samples, r_max, false)
}

/// Surrogate for `liminf -(1/r) ln (Vol_f(M) - Vol_f(B_r))`; requires a
/// finite total volume.
pub fn mu_w(spec: &ManifoldSpec, r_max: f64, q: &QuadratureConfig) -> Result<TailEstimate> {
    check_r_max(r_max)?;
    match total_volume(spec, q)? {
        TotalVolume::Finite { .. } => mu_w_unchecked(spec, r_max, q),
        other => Err(Error::WrongVolumeRegime(format!(
            "mu_w needs finite volume, got {other:?}"
        ))),
    }
}

pub(crate) fn mu_w_unchecked(
    spec: &ManifoldSpec,
    r_max: f64,
    q: &QuadratureConfig,
) -> Result<TailEstimate> {
    let mut samples = Vec::new();
    for r in exponent_grid(r_max) {
        match ln_tail_volume(spec, r, q) {
            Ok(lt) => samples.push((r, -lt / r)),
            // The grid stops where the tail mass is no longer resolvable.
            Err(Error::PrecisionLoss { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    summarize(samples, r_max, false)
}

/// Tail-window min and max of `mu_delta(r) = (1/r) ln Vol_f(A_delta(dB_r))`.
pub fn mu_delta(
    spec: &ManifoldSpec,
    delta: f64,
    r_max: f64,
    q: &QuadratureConfig,
) -> Result<DeltaExponents> {
    check_r_max(r_max)?;
    if !(delta > 0.0) {
        return Err(Error::DomainError(format!(
            "width delta = {delta} must be > 0"
        )));
    }
    q.validate()?;
    let mut samples = Vec::new();
    for r in exponent_grid(r_max) {
        match ln_annulus_volume(spec, r, delta, q) {
            Ok(la) => samples.push((r, la / r)),
            Err(Error::PrecisionLoss { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(DeltaExponents {
        delta,
        lower: summarize(samples.clone(), r_max, false)?,
        upper: summarize(samples, r_max, true)?,
    })
}

/// Ball volumes at `radii` plus the total-volume verdict and whichever
/// growth exponent applies.
pub fn volume_report(
    spec: &ManifoldSpec,
    radii: &[f64],
    r_max: f64,
    q: &QuadratureConfig,
) -> Result<VolumeReport> {
    let mut grid: Vec<f64> = radii.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let samples = grid
        .iter()
        .map(|&r| {
            Ok(VolumeSample {
                r,
                vol_f: ball_volume(spec, r, q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total = total_volume(spec, q)?;
    let (mu_v, mu_w) = match total {
        TotalVolume::Finite { .. } => (None, Some(mu_w_unchecked(spec, r_max, q)?)),
        TotalVolume::Infinite => (Some(mu_v_unchecked(spec, r_max, q)?), None),
        TotalVolume::Undetermined => (None, None),
    };
    Ok(VolumeReport {
        samples,
        total,
        mu_v,
        mu_w,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{make_model, unit_sphere_volume, ModelFamily};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn paper(alpha: f64, n: usize) -> ManifoldSpec {
        make_model(ModelFamily::PaperEquality { alpha, r0: 1.0 }, n).unwrap()
    }

    #[test]
    fn ball_volume_examples() {
        let e2 = make_model(ModelFamily::Euclidean, 2).unwrap();
        assert_relative_eq!(
            ball_volume(&e2, 2.0, &q()).unwrap(),
            4.0 * PI,
            max_relative = 1e-12
        );
        assert_eq!(ball_volume(&e2, 0.0, &q()).unwrap(), 0.0);
        assert!(matches!(
            ball_volume(&e2, -1.0, &q()),
            Err(Error::DomainError(_))
        ));

        // Closed form past the cap: Vol(B_1) + omega (e^{-1} - e^{-r}).
        let p = paper(1.0, 3);
        let cap = ball_volume(&p, 1.0, &q()).unwrap();
        for r in [2.0_f64, 7.5, 30.0] {
            let closed = cap + 4.0 * PI * ((-1.0_f64).exp() - (-r).exp());
            assert_relative_eq!(
                ball_volume(&p, r, &q()).unwrap(),
                closed,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn annulus_examples() {
        let p = paper(1.0, 3);
        assert_relative_eq!(
            annulus_volume(&p, 2.0, 1.0, &q()).unwrap(),
            4.0 * PI * ((-2.0_f64).exp() - (-3.0_f64).exp()),
            max_relative = 1e-10
        );
        let e2 = make_model(ModelFamily::Euclidean, 2).unwrap();
        assert_relative_eq!(
            annulus_volume(&e2, 1.0, 1.0, &q()).unwrap(),
            3.0 * PI,
            max_relative = 1e-12
        );
        assert!(annulus_volume(&e2, 1.0, 1e-12, &q()).unwrap() < 1e-10);
        assert!(annulus_volume(&e2, 1.0, 0.0, &q()).is_err());
    }

    #[test]
    fn total_volume_examples() {
        let p = paper(1.0, 3);
        let cap = ball_volume(&p, 1.0, &q()).unwrap();
        let expected = cap + 4.0 * PI * (-1.0_f64).exp();
        match total_volume(&p, &q()).unwrap() {
            TotalVolume::Finite { value } => {
                assert_relative_eq!(value, expected, max_relative = 1e-8)
            }
            other => panic!("expected finite, got {other:?}"),
        }
        let e2 = make_model(ModelFamily::Euclidean, 2).unwrap();
        assert_eq!(total_volume(&e2, &q()).unwrap(), TotalVolume::Infinite);
        // int_{R^3} e^{-|x|^2/4} dx = (4 pi)^{3/2}
        let gs = make_model(ModelFamily::GaussianSoliton, 3).unwrap();
        let v = total_volume(&gs, &q()).unwrap().finite().unwrap();
        assert_relative_eq!(v, (4.0 * PI).powf(1.5), max_relative = 1e-8);
    }

    #[test]
    fn slow_power_decay_is_undetermined() {
        use crate::manifold::hermite_cap;
        use crate::profile::{Formula, RadialProfile};
        // n = 2, g = r^{-2} past r = 1: v ~ r^{-2} decays, but not geometrically.
        let g = RadialProfile::new(vec![
            (0.0, hermite_cap(1.0, -2.0)),
            (
                1.0,
                Formula::Power {
                    scale: 1.0,
                    exponent: -2.0,
                },
            ),
        ])
        .unwrap();
        let f = RadialProfile::single(Formula::Linear {
            slope: 0.0,
            intercept: 0.0,
        })
        .unwrap();
        let spec = ManifoldSpec::new(2, g, f, "power-decay").unwrap();
        assert_eq!(
            total_volume(&spec, &q()).unwrap(),
            TotalVolume::Undetermined
        );
    }

    #[test]
    fn growth_exponents() {
        let e2 = make_model(ModelFamily::Euclidean, 2).unwrap();
        let mv = mu_v(&e2, 1e3, &q()).unwrap();
        assert!(mv.value.abs() < 0.02, "{mv:?}");
        let gs = make_model(ModelFamily::GaussianSoliton, 2).unwrap();
        assert!(matches!(
            mu_v(&gs, 1e3, &q()),
            Err(Error::WrongVolumeRegime(_))
        ));
        assert!(matches!(
            mu_w(&e2, 1e3, &q()),
            Err(Error::WrongVolumeRegime(_))
        ));

        for n in [2, 3, 5] {
            let mw = mu_w(&paper(1.0, n), 1e3, &q()).unwrap();
            assert!((mw.value - 1.0).abs() < 0.02 && mw.spread < 0.01, "{mw:?}");
        }
        let mw2 = mu_w(&paper(2.0, 3), 1e3, &q()).unwrap();
        assert!((mw2.value - 2.0).abs() < 0.04, "{mw2:?}");

        // Superexponential decay: psi(r) ~ r / 4 keeps growing.
        let gw = mu_w(&gs, 1e3, &q()).unwrap();
        assert!(gw.value > 100.0 && gw.spread > 100.0, "{gw:?}");
    }

    #[test]
    fn exponential_growth_mu_v() {
        use crate::manifold::hermite_cap;
        use crate::profile::{Formula, RadialProfile};
        // g = c e^{r/(n-1)} past r0 = 1, f = 0: v ~ omega c^{n-1} e^{r}.
        let n = 3;
        let rate = 1.0 / (n as f64 - 1.0);
        let g1 = 1.0;
        let scale = g1 / rate.exp();
        let g = RadialProfile::new(vec![
            (0.0, hermite_cap(g1, rate * g1)),
            (1.0, Formula::Exponential { scale, rate }),
        ])
        .unwrap();
        let f = RadialProfile::single(Formula::Linear {
            slope: 0.0,
            intercept: 0.0,
        })
        .unwrap();
        let spec = ManifoldSpec::new(n, g, f, "exp-growth").unwrap();
        let mv = mu_v(&spec, 1e3, &q()).unwrap();
        assert!((mv.value - 1.0).abs() < 0.02, "{mv:?}");
    }

    #[test]
    fn mu_delta_examples() {
        let d = mu_delta(&paper(1.0, 3), 1.0, 1e3, &q()).unwrap();
        assert!((d.lower.value + 1.0).abs() < 0.02 && (d.upper.value + 1.0).abs() < 0.02);
        assert!(d.lower.value <= d.upper.value);
        let e = mu_delta(
            &make_model(ModelFamily::Euclidean, 2).unwrap(),
            1.0,
            1e3,
            &q(),
        )
        .unwrap();
        assert!(
            e.lower.value.abs() < 0.02 && e.upper.value.abs() < 0.02,
            "{e:?}"
        );
    }

    #[test]
    fn tail_matches_closed_form() {
        let p = paper(1.0, 4);
        for r in [1.0, 10.0, 300.0] {
            let lt = ln_tail_volume(&p, r, &q()).unwrap();
            let closed = unit_sphere_volume(4).ln() - r;
            assert!((lt - closed).abs() < 1e-8, "r = {r}: {lt} vs {closed}");
        }
    }

    #[test]
    fn report_and_csv() {
        let e2 = make_model(ModelFamily::Euclidean, 2).unwrap();
        let rep = volume_report(&e2, &[2.0, 1.0, 2.0], 100.0, &q()).unwrap();
        assert_eq!(rep.samples.len(), 2);
        assert!(rep.mu_v.is_some() && rep.mu_w.is_none());
        let csv = rep.to_csv();
        assert!(csv.starts_with("r,vol_f\n1,"));
        let p = volume_report(&paper(1.0, 3), &[1.0], 100.0, &q()).unwrap();
        assert!(p.mu_w.is_some() && p.mu_v.is_none());
    }
}
