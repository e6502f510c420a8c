//! Adaptive Simpson quadrature over piecewise-smooth integrands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equal panels each smooth segment is cut into before adapting.
const INITIAL_PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_depth: 40,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_depth < 10 {
            return Err(Error::InvalidParameter(format!(
                "max_depth = {} < 10",
                self.max_depth
            )));
        }
        Ok(())
    }
}

struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Self {
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        Panel {
            a,
            m,
            b,
            fa,
            fm,
            fb,
            whole: (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        }
    }
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    p: Panel,
    tol: f64,
    depth: usize,
    max_depth: usize,
) -> Result<f64> {
    let lm = 0.5 * (p.a + p.m);
    let rm = 0.5 * (p.m + p.b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    let right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    let halves = left + right;
    let delta = halves - p.whole;
    if !delta.is_finite() {
        return Err(Error::QuadratureFailure {
            a: p.a,
            b: p.b,
            max_depth,
        });
    }
    // Below this the difference is rounding noise, not truncation error.
    let mass = (p.b - p.a) / 6.0 * (p.fa.abs() + 4.0 * p.fm.abs() + p.fb.abs());
    let floor = 64.0 * f64::EPSILON * halves.abs().max(mass);
    if delta.abs() <= 15.0 * tol.max(floor) {
        return Ok(halves + delta / 15.0);
    }
    if depth >= max_depth {
        return Err(Error::QuadratureFailure {
            a: p.a,
            b: p.b,
            max_depth,
        });
    }
    let l = Panel {
        a: p.a,
        m: lm,
        b: p.m,
        fa: p.fa,
        fm: flm,
        fb: p.fm,
        whole: left,
    };
    let r = Panel {
        a: p.m,
        m: rm,
        b: p.b,
        fa: p.fm,
        fm: frm,
        fb: p.fb,
        whole: right,
    };
    Ok(adapt(f, l, 0.5 * tol, depth + 1, max_depth)?
        + adapt(f, r, 0.5 * tol, depth + 1, max_depth)?)
}

/// `int_a^b f`, splitting at every point of `breaks` inside `(a, b)` so no
/// panel straddles a kink of the integrand.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    q: &QuadratureConfig,
) -> Result<f64> {
    if b == a {
        return Ok(0.0);
    }
    if b < a {
        return Ok(-integrate(f, b, a, breaks, q)?);
    }
    let mut nodes = vec![a];
    nodes.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    nodes.push(b);
    nodes.sort_by(f64::total_cmp);
    let merge = 1e-12 * a.abs().max(b.abs()).max(1.0);
    nodes.dedup_by(|x, y| *x - *y <= merge);
    *nodes.last_mut().unwrap() = b;

    let mut panels = Vec::with_capacity((nodes.len() - 1) * INITIAL_PANELS);
    for w in nodes.windows(2) {
        let h = (w[1] - w[0]) / INITIAL_PANELS as f64;
        for k in 0..INITIAL_PANELS {
            let lo = w[0] + k as f64 * h;
            let hi = if k + 1 == INITIAL_PANELS {
                w[1]
            } else {
                lo + h
            };
            panels.push(Panel::new(&f, lo, hi));
        }
    }
    let coarse: f64 = panels.iter().map(|p| p.whole).sum();
    let tol = q.abs_tol.max(q.rel_tol * coarse.abs());
    let width = b - a;
    let mut total = 0.0;
    for p in panels {
        let share = tol * (p.b - p.a) / width;
        total += adapt(&f, p, share, 0, q.max_depth)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_and_exponential() {
        let q = QuadratureConfig::default();
        assert_relative_eq!(
            integrate(|t| t * t, 0.0, 3.0, &[], &q).unwrap(),
            9.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            integrate(|t: f64| (-t).exp(), 0.0, 40.0, &[], &q).unwrap(),
            1.0 - (-40.0_f64).exp(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn kink_at_breakpoint() {
        let q = QuadratureConfig::default();
        let f = |t: f64| (t - 1.0).abs();
        assert_relative_eq!(
            integrate(f, 0.0, 3.0, &[1.0], &q).unwrap(),
            2.5,
            max_relative = 1e-13
        );
    }

    #[test]
    fn reversed_and_empty() {
        let q = QuadratureConfig::default();
        assert_eq!(integrate(|t| t, 2.0, 2.0, &[], &q).unwrap(), 0.0);
        assert_relative_eq!(
            integrate(|t| t, 2.0, 0.0, &[], &q).unwrap(),
            -2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn depth_exhaustion_is_reported() {
        let q = QuadratureConfig {
            rel_tol: 1e-14,
            abs_tol: 1e-300,
            max_depth: 10,
        };
        let err = integrate(|t: f64| t.sqrt(), 0.0, 1.0, &[], &q).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig {
            max_depth: 5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
