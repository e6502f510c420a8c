//! Piecewise-analytic radial functions `r -> F(r)` on `[0, inf)`.
//!
//! A [`RadialProfile`] stores an ordered list of pieces, each carrying a
//! closed-form formula with analytic first derivative (and second derivative
//! for every kind except the cubic Hermite cap). Value and first derivative
//! are checked for continuity at every breakpoint when the profile is built.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuity tolerance at breakpoints, scaled by `max(1, |value|)`.
pub const CONTINUITY_TOL: f64 = 1e-12;

/// Closed-form expression of one piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Formula {
    /// `slope * r + intercept`
    Linear { slope: f64, intercept: f64 },
    /// `scale * exp(rate * r)`
    Exponential { scale: f64, rate: f64 },
    /// `scale * r^exponent`
    Power { scale: f64, exponent: f64 },
    /// Cubic Hermite interpolant on the piece's interval, matching value and
    /// slope `(p0, m0)` at the left end and `(p1, m1)` at the right end.
    Hermite { p0: f64, m0: f64, p1: f64, m1: f64 },
    /// `scale * sinh(rate * r)`
    Sinh { scale: f64, rate: f64 },
}

impl Formula {
    fn params(&self) -> [f64; 4] {
        match *self {
            Formula::Linear { slope, intercept } => [slope, intercept, 0.0, 0.0],
            Formula::Exponential { scale, rate } => [scale, rate, 0.0, 0.0],
            Formula::Power { scale, exponent } => [scale, exponent, 0.0, 0.0],
            Formula::Hermite { p0, m0, p1, m1 } => [p0, m0, p1, m1],
            Formula::Sinh { scale, rate } => [scale, rate, 0.0, 0.0],
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Formula::Linear { .. } => "linear",
            Formula::Exponential { .. } => "exp",
            Formula::Power { .. } => "power",
            Formula::Hermite { .. } => "hermite",
            Formula::Sinh { .. } => "sinh",
        }
    }
}

/// One piece of a profile, valid on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    /// `f64::INFINITY` for the last piece.
    pub end: f64,
    pub formula: Formula,
}

/// Hermite cubic written as `c0 + c1 t + c2 t^2 + c3 t^3` in `t = (r - start) / h`.
#[derive(Debug, Clone, Copy)]
struct Cubic {
    c: [f64; 4],
    start: f64,
    h: f64,
}

impl Cubic {
    fn new(start: f64, end: f64, p0: f64, m0: f64, p1: f64, m1: f64) -> Self {
        let h = end - start;
        let c0 = p0;
        let c1 = h * m0;
        let c2 = -3.0 * p0 - 2.0 * h * m0 + 3.0 * p1 - h * m1;
        let c3 = 2.0 * p0 + h * m0 - 2.0 * p1 + h * m1;
        Cubic {
            c: [c0, c1, c2, c3],
            start,
            h,
        }
    }

    fn t(&self, r: f64) -> f64 {
        (r - self.start) / self.h
    }

    fn value(&self, r: f64) -> f64 {
        let t = self.t(r);
        let [c0, c1, c2, c3] = self.c;
        c0 + t * (c1 + t * (c2 + t * c3))
    }

    fn d1(&self, r: f64) -> f64 {
        let t = self.t(r);
        let [_, c1, c2, c3] = self.c;
        (c1 + t * (2.0 * c2 + 3.0 * t * c3)) / self.h
    }

    /// Minimum of the cubic over the open interval `t in (0, 1)` and the
    /// right endpoint; the left endpoint is excluded.
    fn interior_min(&self) -> f64 {
        let [_, c1, c2, c3] = self.c;
        let mut candidates = vec![self.value(self.start + self.h)];
        // p'(t) = c1 + 2 c2 t + 3 c3 t^2
        let (a, b, c) = (3.0 * c3, 2.0 * c2, c1);
        if a.abs() < 1e-300 {
            if b.abs() > 1e-300 {
                candidates.push(-c / b);
            }
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let s = disc.sqrt();
                candidates.push((-b + s) / (2.0 * a));
                candidates.push((-b - s) / (2.0 * a));
            }
        }
        let mut min = f64::INFINITY;
        for (i, t) in candidates.into_iter().enumerate() {
            if i == 0 {
                min = min.min(t);
            } else if t > 0.0 && t < 1.0 {
                min = min.min(self.value(self.start + t * self.h));
            }
        }
        // Points just inside the left end, where the value may leave zero downwards.
        for t in [1e-6, 1e-3] {
            min = min.min(self.value(self.start + t * self.h));
        }
        min
    }
}

impl Piece {
    fn cubic(&self) -> Option<Cubic> {
        match self.formula {
            Formula::Hermite { p0, m0, p1, m1 } => {
                Some(Cubic::new(self.start, self.end, p0, m0, p1, m1))
            }
            _ => None,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.formula {
            Formula::Linear { slope, intercept } => slope * r + intercept,
            Formula::Exponential { scale, rate } => scale * (rate * r).exp(),
            Formula::Power { scale, exponent } => scale * r.powf(exponent),
            Formula::Hermite { .. } => self.cubic().map(|c| c.value(r)).unwrap_or(f64::NAN),
            Formula::Sinh { scale, rate } => scale * (rate * r).sinh(),
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        match self.formula {
            Formula::Linear { slope, .. } => slope,
            Formula::Exponential { scale, rate } => scale * rate * (rate * r).exp(),
            Formula::Power { scale, exponent } => {
                if exponent == 0.0 {
                    0.0
                } else {
                    scale * exponent * r.powf(exponent - 1.0)
                }
            }
            Formula::Hermite { .. } => self.cubic().map(|c| c.d1(r)).unwrap_or(f64::NAN),
            Formula::Sinh { scale, rate } => scale * rate * (rate * r).cosh(),
        }
    }

    /// Second derivative, `None` for pieces that do not declare one.
    pub fn d2(&self, r: f64) -> Option<f64> {
        match self.formula {
            Formula::Linear { .. } => Some(0.0),
            Formula::Exponential { scale, rate } => Some(scale * rate * rate * (rate * r).exp()),
            Formula::Power { scale, exponent } => {
                if exponent == 0.0 || exponent == 1.0 {
                    Some(0.0)
                } else {
                    Some(scale * exponent * (exponent - 1.0) * r.powf(exponent - 2.0))
                }
            }
            Formula::Hermite { .. } => None,
            Formula::Sinh { scale, rate } => Some(scale * rate * rate * (rate * r).sinh()),
        }
    }

    /// `ln F(r)`, evaluated without forming `F` where the formula allows it.
    pub fn ln_value(&self, r: f64) -> f64 {
        match self.formula {
            Formula::Exponential { scale, rate } if scale > 0.0 => scale.ln() + rate * r,
            Formula::Power { scale, exponent } if scale > 0.0 && r > 0.0 => {
                scale.ln() + exponent * r.ln()
            }
            Formula::Sinh { scale, rate } if scale > 0.0 && rate * r > 20.0 => {
                scale.ln() + rate * r - std::f64::consts::LN_2 + (-(-2.0 * rate * r).exp()).ln_1p()
            }
            _ => self.value(r).ln(),
        }
    }

    /// `F'(r) / F(r)`.
    pub fn log_derivative(&self, r: f64) -> f64 {
        match self.formula {
            Formula::Exponential { rate, .. } => rate,
            Formula::Power { exponent, .. } => exponent / r,
            Formula::Sinh { rate, .. } => rate / (rate * r).tanh(),
            _ => self.d1(r) / self.value(r),
        }
    }
}

/// Piecewise radial function on `[0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pieces: Vec<Piece>,
}

impl RadialProfile {
    /// Builds a profile from `(start, formula)` pairs. The first start must
    /// be 0 and starts must increase strictly; each piece runs to the next
    /// start and the last one to infinity.
    pub fn new(parts: Vec<(f64, Formula)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("profile has no pieces".into()));
        }
        if parts[0].0 != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "first piece must start at 0, got {}",
                parts[0].0
            )));
        }
        for (start, formula) in &parts {
            if !start.is_finite() || formula.params().iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidParameter(
                    "profile parameters must be finite".into(),
                ));
            }
        }
        let mut pieces = Vec::with_capacity(parts.len());
        for (i, &(start, formula)) in parts.iter().enumerate() {
            let end = parts.get(i + 1).map_or(f64::INFINITY, |p| p.0);
            if end <= start {
                return Err(Error::InvalidParameter(format!(
                    "breakpoints must increase strictly ({start} then {end})"
                )));
            }
            if matches!(formula, Formula::Hermite { .. }) && !end.is_finite() {
                return Err(Error::InvalidParameter(
                    "a hermite piece needs a finite right end".into(),
                ));
            }
            pieces.push(Piece {
                start,
                end,
                formula,
            });
        }
        for w in pieces.windows(2) {
            let (left, right) = (&w[0], &w[1]);
            let b = right.start;
            let (vl, vr) = (left.value(b), right.value(b));
            let (dl, dr) = (left.d1(b), right.d1(b));
            let scale_v = vl.abs().max(vr.abs()).max(1.0);
            let scale_d = dl.abs().max(dr.abs()).max(1.0);
            if (vl - vr).abs() > CONTINUITY_TOL * scale_v {
                return Err(Error::InvalidParameter(format!(
                    "value jumps at r = {b}: {vl} vs {vr}"
                )));
            }
            if (dl - dr).abs() > CONTINUITY_TOL * scale_d {
                return Err(Error::InvalidParameter(format!(
                    "first derivative jumps at r = {b}: {dl} vs {dr}"
                )));
            }
        }
        Ok(RadialProfile { pieces })
    }

    /// Single-piece profile.
    pub fn single(formula: Formula) -> Result<Self> {
        Self::new(vec![(0.0, formula)])
    }

    /// The piece used at `r`; at a breakpoint the right piece wins.
    pub fn piece_at(&self, r: f64) -> &Piece {
        let idx = self.pieces.partition_point(|p| p.start <= r);
        &self.pieces[idx.saturating_sub(1)]
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints in increasing order.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().skip(1).map(|p| p.start)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.piece_at(r).value(r)
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.piece_at(r).d1(r)
    }

    pub fn d2(&self, r: f64) -> Result<f64> {
        self.piece_at(r)
            .d2(r)
            .ok_or(Error::SecondDerivativeUnavailable { at: r })
    }

    pub fn ln_value(&self, r: f64) -> f64 {
        self.piece_at(r).ln_value(r)
    }

    pub fn log_derivative(&self, r: f64) -> f64 {
        self.piece_at(r).log_derivative(r)
    }

    /// Smallest value over `(0, upto]`: exact on Hermite pieces, sampled on
    /// a geometric grid elsewhere.
    pub(crate) fn positivity_floor(&self, upto: f64) -> f64 {
        let mut min = f64::INFINITY;
        for piece in self.pieces.iter().filter(|p| p.start < upto) {
            let lo = piece.start.max(1e-6);
            let hi = piece.end.min(upto);
            match piece.formula {
                Formula::Hermite { .. } => {
                    if let Some(c) = piece.cubic() {
                        min = min.min(c.interior_min());
                    }
                }
                Formula::Linear { .. } => {
                    min = min.min(piece.value(lo)).min(piece.value(hi));
                }
                Formula::Exponential { scale, .. } | Formula::Power { scale, .. } => {
                    if scale <= 0.0 {
                        min = min.min(piece.value(lo));
                    }
                }
                Formula::Sinh { scale, rate } => {
                    if scale * rate <= 0.0 {
                        min = min.min(piece.value(lo));
                    }
                }
            }
        }
        min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_matches_end_data() {
        let p = RadialProfile::new(vec![
            (
                0.0,
                Formula::Hermite {
                    p0: 0.0,
                    m0: 1.0,
                    p1: (-0.5_f64).exp(),
                    m1: -0.5 * (-0.5_f64).exp(),
                },
            ),
            (
                1.0,
                Formula::Exponential {
                    scale: 1.0,
                    rate: -0.5,
                },
            ),
        ])
        .unwrap();
        assert_abs_diff_eq!(p.value(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.d1(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.value(1.0), (-0.5_f64).exp(), epsilon = 1e-15);
        assert!(p.d2(0.5).is_err());
        assert!(p.d2(1.5).is_ok());
    }

    #[test]
    fn rejects_jump() {
        let err = RadialProfile::new(vec![
            (
                0.0,
                Formula::Linear {
                    slope: 1.0,
                    intercept: 0.0,
                },
            ),
            (
                1.0,
                Formula::Linear {
                    slope: 1.0,
                    intercept: 0.1,
                },
            ),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn rejects_kink() {
        let err = RadialProfile::new(vec![
            (
                0.0,
                Formula::Linear {
                    slope: 1.0,
                    intercept: 0.0,
                },
            ),
            (
                1.0,
                Formula::Linear {
                    slope: 2.0,
                    intercept: -1.0,
                },
            ),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn rejects_bad_layout() {
        assert!(RadialProfile::new(vec![]).is_err());
        assert!(RadialProfile::single(Formula::Hermite {
            p0: 0.0,
            m0: 1.0,
            p1: 1.0,
            m1: 1.0
        })
        .is_err());
        assert!(RadialProfile::new(vec![(
            0.5,
            Formula::Linear {
                slope: 1.0,
                intercept: 0.0
            }
        )])
        .is_err());
    }

    #[test]
    fn right_piece_at_breakpoint() {
        let p = RadialProfile::new(vec![
            (
                0.0,
                Formula::Linear {
                    slope: 1.0,
                    intercept: 0.0,
                },
            ),
            (
                1.0,
                Formula::Power {
                    scale: 1.0,
                    exponent: 1.0,
                },
            ),
        ])
        .unwrap();
        assert!(matches!(p.piece_at(1.0).formula, Formula::Power { .. }));
        assert!(matches!(p.piece_at(0.999).formula, Formula::Linear { .. }));
    }

    #[test]
    fn ln_value_survives_underflow() {
        let p = Piece {
            start: 0.0,
            end: f64::INFINITY,
            formula: Formula::Exponential {
                scale: 2.0,
                rate: -3.0,
            },
        };
        assert_abs_diff_eq!(p.ln_value(1000.0), 2f64.ln() - 3000.0, epsilon = 1e-9);
        let s = Piece {
            start: 0.0,
            end: f64::INFINITY,
            formula: Formula::Sinh {
                scale: 1.0,
                rate: 1.0,
            },
        };
        assert_abs_diff_eq!(s.ln_value(30.0), 30f64.sinh().ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.ln_value(5.0), 5f64.sinh().ln(), epsilon = 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let formulas = [
            Formula::Linear {
                slope: 0.3,
                intercept: 2.0,
            },
            Formula::Exponential {
                scale: 1.5,
                rate: -0.7,
            },
            Formula::Power {
                scale: 0.25,
                exponent: 2.0,
            },
            Formula::Power {
                scale: 2.0,
                exponent: 0.5,
            },
            Formula::Sinh {
                scale: 0.5,
                rate: 2.0,
            },
        ];
        for f in formulas {
            let p = Piece {
                start: 0.0,
                end: f64::INFINITY,
                formula: f,
            };
            for r in [0.5, 1.0, 2.5] {
                let h = 1e-5;
                let fd1 = (p.value(r + h) - p.value(r - h)) / (2.0 * h);
                assert_abs_diff_eq!(p.d1(r), fd1, epsilon = 1e-6 * fd1.abs().max(1.0));
                let fd2 = (p.d1(r + h) - p.d1(r - h)) / (2.0 * h);
                assert_abs_diff_eq!(p.d2(r).unwrap(), fd2, epsilon = 1e-5 * fd2.abs().max(1.0));
                assert_abs_diff_eq!(p.log_derivative(r), p.d1(r) / p.value(r), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hermite_floor_detects_dip() {
        // Arriving at 1e-3 with slope 5 forces the cubic below zero before r = 1.
        let p = RadialProfile::new(vec![
            (
                0.0,
                Formula::Hermite {
                    p0: 0.0,
                    m0: 1.0,
                    p1: 1e-3,
                    m1: 5.0,
                },
            ),
            (
                1.0,
                Formula::Linear {
                    slope: 5.0,
                    intercept: 1e-3 - 5.0,
                },
            ),
        ])
        .unwrap();
        assert!(p.positivity_floor(1.0) < 0.0);
    }
}
