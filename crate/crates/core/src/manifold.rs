//! Rotationally symmetric weighted manifolds `(R^n, dr^2 + g(r)^2 dtheta^2, e^{-f} dsigma)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{Formula, RadialProfile};

/// Radius up to which warping positivity is sampled at construction.
const POSITIVITY_HORIZON: f64 = 1e3;
const ORIGIN_TOL: f64 = 1e-10;

/// A model weighted manifold: dimension, warping `g` and weight `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldSpec {
    n: usize,
    warping: RadialProfile,
    weight: RadialProfile,
    label: String,
}

/// Built-in model families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelFamily {
    /// `f = alpha r / 2` and `g = exp(-alpha r / (2(n-1)))` for `r >= r0`,
    /// with a cubic Hermite cap on `[0, r0]`.
    PaperEquality {
        alpha: f64,
        r0: f64,
    },
    Euclidean,
    /// Flat metric with weight `|x|^2 / 4`.
    GaussianSoliton,
    /// `g = sinh(k r) / k`, no weight.
    HyperbolicLike {
        k: f64,
    },
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::PaperEquality { .. } => "paper-equality",
            ModelFamily::Euclidean => "euclidean",
            ModelFamily::GaussianSoliton => "gaussian-soliton",
            ModelFamily::HyperbolicLike { .. } => "hyperbolic-like",
        }
    }
}

/// `(n-1)`-dimensional volume of the unit sphere `S^{n-1}`.
pub fn unit_sphere_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / libm::tgamma(half)
}

/// Cubic Hermite cap on `[0, r0]` joining `g(0) = 0, g'(0) = 1` to a tail.
pub fn hermite_cap(tail_value: f64, tail_slope: f64) -> Formula {
    Formula::Hermite {
        p0: 0.0,
        m0: 1.0,
        p1: tail_value,
        m1: tail_slope,
    }
}

pub fn make_model(family: ModelFamily, n: usize) -> Result<ManifoldSpec> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} < 2")));
    }
    let identity = Formula::Linear {
        slope: 1.0,
        intercept: 0.0,
    };
    let zero = Formula::Linear {
        slope: 0.0,
        intercept: 0.0,
    };
    let (warping, weight, label) = match family {
        ModelFamily::PaperEquality { alpha, r0 } => {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "alpha = {alpha} must be > 0"
                )));
            }
            if !(r0 > 0.0) || !r0.is_finite() {
                return Err(Error::InvalidParameter(format!("r0 = {r0} must be > 0")));
            }
            let rate = -alpha / (2.0 * (n as f64 - 1.0));
            let tail = Formula::Exponential { scale: 1.0, rate };
            let g_r0 = (rate * r0).exp();
            let warping =
                RadialProfile::new(vec![(0.0, hermite_cap(g_r0, rate * g_r0)), (r0, tail)])?;
            let weight = RadialProfile::single(Formula::Linear {
                slope: alpha / 2.0,
                intercept: 0.0,
            })?;
            (
                warping,
                weight,
                format!("paper-equality(alpha={alpha}, r0={r0})"),
            )
        }
        ModelFamily::Euclidean => (
            RadialProfile::single(identity)?,
            RadialProfile::single(zero)?,
            "euclidean".to_string(),
        ),
        ModelFamily::GaussianSoliton => (
            RadialProfile::single(identity)?,
            RadialProfile::single(Formula::Power {
                scale: 0.25,
                exponent: 2.0,
            })?,
            "gaussian-soliton".to_string(),
        ),
        ModelFamily::HyperbolicLike { k } => {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::InvalidParameter(format!("k = {k} must be > 0")));
            }
            (
                RadialProfile::single(Formula::Sinh {
                    scale: 1.0 / k,
                    rate: k,
                })?,
                RadialProfile::single(zero)?,
                format!("hyperbolic-like(k={k})"),
            )
        }
    };
    ManifoldSpec::new(n, warping, weight, label)
}

impl ManifoldSpec {
    /// Validates `g(0) = 0`, `g'(0) = 1` and `g > 0` away from the origin.
    pub fn new(
        n: usize,
        warping: RadialProfile,
        weight: RadialProfile,
        label: impl Into<String>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} < 2")));
        }
        let g0 = warping.value(0.0);
        let dg0 = warping.d1(0.0);
        if g0.abs() > ORIGIN_TOL || (dg0 - 1.0).abs() > ORIGIN_TOL {
            return Err(Error::InvalidParameter(format!(
                "warping must satisfy g(0) = 0, g'(0) = 1 (got {g0}, {dg0})"
            )));
        }
        let floor = warping.positivity_floor(POSITIVITY_HORIZON);
        if !(floor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "warping is not positive on (0, {POSITIVITY_HORIZON}] (min {floor})"
            )));
        }
        Ok(ManifoldSpec {
            n,
            warping,
            weight,
            label: label.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn warping(&self) -> &RadialProfile {
        &self.warping
    }

    pub fn weight(&self) -> &RadialProfile {
        &self.weight
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Sorted breakpoints of both profiles.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .warping
            .breakpoints()
            .chain(self.weight.breakpoints())
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn check_radius(r: f64) -> Result<()> {
        if r > 0.0 && r.is_finite() {
            Ok(())
        } else {
            Err(Error::DomainError(format!(
                "radius r = {r} must be positive"
            )))
        }
    }

    /// Weighted area of the geodesic sphere, `omega_n g^{n-1} e^{-f}`.
    pub fn sphere_density(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        Ok(unit_sphere_volume(self.n)
            * self.warping.value(r).powi(self.n as i32 - 1)
            * (-self.weight.value(r)).exp())
    }

    /// `ln v(r)`; finite where `v` itself would underflow. Callers guarantee `r > 0`.
    pub fn ln_sphere_density(&self, r: f64) -> f64 {
        unit_sphere_volume(self.n).ln() + (self.n as f64 - 1.0) * self.warping.ln_value(r)
            - self.weight.value(r)
    }

    /// `d/dr ln v(r) = (n-1) g'/g - f'`.
    pub fn log_derivative_sphere(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        let q = self.drift(r);
        if !q.is_finite() {
            return Err(Error::DomainError(format!("warping vanishes at r = {r}")));
        }
        Ok(q)
    }

    /// Unchecked `v'/v`, the drift coefficient of the radial ODE.
    #[inline]
    pub(crate) fn drift(&self, r: f64) -> f64 {
        (self.n as f64 - 1.0) * self.warping.log_derivative(r) - self.weight.d1(r)
    }

    /// Radial Bakry-Emery Ricci curvature `-(n-1) g''/g + f''`.
    pub fn radial_bakry_emery(&self, r: f64) -> Result<f64> {
        Self::check_radius(r)?;
        let g = self.warping.value(r);
        let g2 = self.warping.d2(r)?;
        let f2 = self.weight.d2(r)?;
        Ok(-(self.n as f64 - 1.0) * g2 / g + f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// `omega_2 = 2 pi`, `omega_3 = 4 pi`, `omega_n = 2 pi omega_{n-2} / (n - 2)`.
    fn omega_recursive(n: usize) -> f64 {
        match n {
            2 => 2.0 * PI,
            3 => 4.0 * PI,
            _ => 2.0 * PI * omega_recursive(n - 2) / (n as f64 - 2.0),
        }
    }

    fn paper(alpha: f64, r0: f64, n: usize) -> ManifoldSpec {
        make_model(ModelFamily::PaperEquality { alpha, r0 }, n).unwrap()
    }

    #[test]
    fn unit_sphere_volumes() {
        assert_abs_diff_eq!(unit_sphere_volume(2), 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(unit_sphere_volume(3), 4.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(unit_sphere_volume(4), 2.0 * PI * PI, epsilon = 1e-12);
        for n in 2..=12 {
            let w = omega_recursive(n);
            assert_abs_diff_eq!(unit_sphere_volume(n), w, epsilon = 1e-12 * w);
        }
    }

    #[test]
    fn model_examples() {
        let p = paper(1.0, 1.0, 3);
        assert_abs_diff_eq!(p.warping().value(2.0), (-0.5_f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.weight().value(2.0), 1.0, epsilon = 1e-15);

        let e = make_model(ModelFamily::Euclidean, 2).unwrap();
        assert_eq!(e.warping().value(1.0), 1.0);
        assert_eq!(e.weight().value(1.0), 0.0);

        let gs = make_model(ModelFamily::GaussianSoliton, 2).unwrap();
        assert_eq!(gs.warping().value(2.0), 2.0);
        assert_abs_diff_eq!(gs.weight().value(2.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn model_parameter_errors() {
        for fam in [
            ModelFamily::PaperEquality {
                alpha: 0.0,
                r0: 1.0,
            },
            ModelFamily::PaperEquality {
                alpha: -1.0,
                r0: 1.0,
            },
            ModelFamily::PaperEquality {
                alpha: 1.0,
                r0: 0.0,
            },
            ModelFamily::HyperbolicLike { k: 0.0 },
        ] {
            assert!(matches!(
                make_model(fam, 3),
                Err(Error::InvalidParameter(_))
            ));
        }
        assert!(matches!(
            make_model(ModelFamily::Euclidean, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn sphere_density_examples() {
        let e = make_model(ModelFamily::Euclidean, 3).unwrap();
        assert_abs_diff_eq!(e.sphere_density(1.0).unwrap(), 4.0 * PI, epsilon = 1e-12);
        let p = paper(1.0, 1.0, 3);
        assert_abs_diff_eq!(
            p.sphere_density(2.0).unwrap(),
            4.0 * PI * (-2.0_f64).exp(),
            epsilon = 1e-14
        );
        assert!(p.sphere_density(1e-9).unwrap() < 1e-8);
        assert!(matches!(p.sphere_density(0.0), Err(Error::DomainError(_))));
        assert!(matches!(p.sphere_density(-1.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn log_derivative_examples() {
        for alpha in [0.5, 1.0, 2.0, 3.7] {
            for n in [2, 3, 5] {
                let p = paper(alpha, 1.0, n);
                for r in [1.0, 1.5, 10.0, 400.0] {
                    assert_abs_diff_eq!(
                        p.log_derivative_sphere(r).unwrap(),
                        -alpha,
                        epsilon = 1e-12
                    );
                }
            }
        }
        let e = make_model(ModelFamily::Euclidean, 2).unwrap();
        assert_abs_diff_eq!(e.log_derivative_sphere(1.0).unwrap(), 1.0, epsilon = 1e-15);
        let gs = make_model(ModelFamily::GaussianSoliton, 2).unwrap();
        assert_abs_diff_eq!(
            gs.log_derivative_sphere(2.0).unwrap(),
            -0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn bakry_emery_examples() {
        for n in [2, 3, 7] {
            let gs = make_model(ModelFamily::GaussianSoliton, n).unwrap();
            assert_abs_diff_eq!(gs.radial_bakry_emery(1.0).unwrap(), 0.5, epsilon = 1e-12);
        }
        let e = make_model(ModelFamily::Euclidean, 3).unwrap();
        assert_eq!(e.radial_bakry_emery(1.0).unwrap(), 0.0);
        let p = paper(1.0, 1.0, 3);
        assert_abs_diff_eq!(p.radial_bakry_emery(2.0).unwrap(), -0.125, epsilon = 1e-14);
        // Hermite cap carries no second derivative.
        assert!(matches!(
            p.radial_bakry_emery(0.5),
            Err(Error::SecondDerivativeUnavailable { .. })
        ));
    }

    #[test]
    fn rejects_bad_origin() {
        let g = RadialProfile::single(Formula::Linear {
            slope: 2.0,
            intercept: 0.0,
        })
        .unwrap();
        let f = RadialProfile::single(Formula::Linear {
            slope: 0.0,
            intercept: 0.0,
        })
        .unwrap();
        assert!(ManifoldSpec::new(3, g, f.clone(), "x").is_err());
        let g = RadialProfile::single(Formula::Exponential {
            scale: 1.0,
            rate: 1.0,
        })
        .unwrap();
        assert!(ManifoldSpec::new(3, g, f, "x").is_err());
    }

    #[test]
    fn rejects_dipping_cap() {
        // Arriving at 0.01 with slope 3 drives the cubic negative inside (0, 1).
        let g = RadialProfile::new(vec![
            (0.0, hermite_cap(0.01, 3.0)),
            (
                1.0,
                Formula::Linear {
                    slope: 3.0,
                    intercept: -2.99,
                },
            ),
        ])
        .unwrap();
        let f = RadialProfile::single(Formula::Linear {
            slope: 0.0,
            intercept: 0.0,
        })
        .unwrap();
        assert!(matches!(
            ManifoldSpec::new(3, g, f, "dip"),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn send_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ManifoldSpec>();
    }
}
