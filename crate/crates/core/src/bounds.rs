//! Mean-curvature bounds for hypersurfaces in weighted manifolds and the
//! nonexistence verdicts that follow from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::ManifoldSpec;
use crate::spectrum::{ess_spectrum_bottom, SolverConfig, SpectrumEstimate};

/// Hypotheses recorded in every cross-check report; not checked numerically.
pub const UNCHECKED_HYPOTHESES: [&str; 3] = [
    "complete noncompact two-sided hypersurface",
    "finite f-index (ind_f M < infinity)",
    "constant weighted mean curvature H_f",
];

/// `(a + b)^2` and `a^2/(1+m) - b^2/m`; the first dominates the second for
/// `m > 0` or `m < -1`.
#[allow(clippy::manual_range_contains)]
pub fn lemma_split(a: f64, b: f64, m: f64) -> Result<(f64, f64)> {
    if !(m > 0.0 || m < -1.0) {
        return Err(Error::InvalidParameter(format!(
            "m = {m} must lie outside [-1, 0]"
        )));
    }
    Ok(((a + b) * (a + b), a * a / (1.0 + m) - b * b / m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypersurfaceData {
    pub n: usize,
    pub m: f64,
    /// Growth exponent (`mu_v`, `mu_w` or `alpha`).
    pub mu: f64,
    /// `inf Ric_f(eta, eta)` outside a ball.
    pub ric_inf: f64,
    /// `inf <grad f, eta>^2` outside a ball.
    pub grad_inf_sq: f64,
    /// `inf Ric_f^{nm}(eta, eta)`, supplied independently of the two above.
    pub ric_nm_inf: f64,
}

impl HypersurfaceData {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n = {} < 2", self.n)));
        }
        if !(self.m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "m = {} must be > 0",
                self.m
            )));
        }
        if !(self.grad_inf_sq >= 0.0) {
            return Err(Error::InvalidParameter("grad_inf_sq must be >= 0".into()));
        }
        if ![
            self.m,
            self.mu,
            self.ric_inf,
            self.grad_inf_sq,
            self.ric_nm_inf,
        ]
        .iter()
        .all(|x| x.is_finite())
        {
            return Err(Error::InvalidParameter("inputs must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureBounds {
    /// Lower bound for `H_f^2`.
    pub hf_sq_lower: f64,
    /// Upper bound for `H_f^2`.
    pub hf_sq_upper: f64,
    pub consistent: bool,
    /// `Ric_f^{nm} >= mu^2/4` forces `H_f = 0`.
    pub forced_f_minimal: bool,
}

/// Bounds with `mu^2 / 4` replaced by an arbitrary spectral level `level`.
fn bounds_at_level(d: &HypersurfaceData, level: f64) -> CurvatureBounds {
    let n = d.n as f64;
    let lower = n * d.m * (-level + d.ric_inf + d.grad_inf_sq / (n * (1.0 + d.m)));
    let forced = d.ric_nm_inf >= level;
    let upper = n * (1.0 + d.m) * (level - d.ric_nm_inf);
    CurvatureBounds {
        hf_sq_lower: lower,
        hf_sq_upper: upper,
        consistent: lower <= upper,
        forced_f_minimal: forced,
    }
}

/// `H_f^2 >= nm (-mu^2/4 + ric_inf + grad_inf_sq / (n(1+m)))` and
/// `H_f^2 <= n(1+m) (mu^2/4 - ric_nm_inf)`. When the second bracket is not
/// positive the hypersurface must be f-minimal.
pub fn mean_curvature_bounds(d: &HypersurfaceData) -> Result<CurvatureBounds> {
    d.validate()?;
    Ok(bounds_at_level(d, d.mu * d.mu / 4.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum GrowthRegime {
    InfiniteVolume { mu_v: f64 },
    FiniteVolume { mu_w: f64 },
    LogDerivative { alpha: f64 },
    Polynomial,
    ExponentialRate { alpha: f64 },
}

impl GrowthRegime {
    pub fn exponent(&self) -> f64 {
        match *self {
            GrowthRegime::InfiniteVolume { mu_v } => mu_v,
            GrowthRegime::FiniteVolume { mu_w } => mu_w,
            GrowthRegime::LogDerivative { alpha } | GrowthRegime::ExponentialRate { alpha } => {
                alpha
            }
            GrowthRegime::Polynomial => 0.0,
        }
    }
}

/// True when no complete noncompact f-minimal hypersurface of finite index
/// exists under `Ric_f >= k`: the regime's exponent must be `< 2 sqrt(k)`.
pub fn nonexistence_verdict(k: f64, regime: GrowthRegime) -> Result<bool> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("k = {k} must be > 0")));
    }
    Ok(regime.exponent() < 2.0 * k.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub data: HypersurfaceData,
    pub mu_sq_over_4: f64,
    pub spectrum: SpectrumEstimate,
    pub mu_based: CurvatureBounds,
    /// Bounds with `mu^2/4` replaced by the upper edge of the computed
    /// `inf sigma_ess`.
    pub spectrum_based: CurvatureBounds,
    /// The computed spectrum sits strictly below `mu^2/4`.
    pub tightened: bool,
    pub assumptions: Vec<String>,
}

/// Recomputes the bounds with the numerically computed bottom of the
/// essential spectrum in place of `mu^2/4`.
pub fn cross_check_with_spectrum(
    spec: &ManifoldSpec,
    d: &HypersurfaceData,
    cfg: &SolverConfig,
) -> Result<CrossCheckReport> {
    d.validate()?;
    if spec.n() != d.n {
        return Err(Error::InvalidParameter(format!(
            "manifold dimension {} differs from hypersurface data n = {}",
            spec.n(),
            d.n
        )));
    }
    let spectrum = ess_spectrum_bottom(spec, cfg)?;
    let level = spectrum.lambda1_upper;
    let mu_sq_over_4 = d.mu * d.mu / 4.0;
    Ok(CrossCheckReport {
        data: *d,
        mu_sq_over_4,
        mu_based: bounds_at_level(d, mu_sq_over_4),
        spectrum_based: bounds_at_level(d, level),
        tightened: level < mu_sq_over_4,
        spectrum,
        assumptions: UNCHECKED_HYPOTHESES.iter().map(|s| s.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize, m: f64, mu: f64, ric: f64, grad: f64, ric_nm: f64) -> HypersurfaceData {
        HypersurfaceData {
            n,
            m,
            mu,
            ric_inf: ric,
            grad_inf_sq: grad,
            ric_nm_inf: ric_nm,
        }
    }

    #[test]
    fn lemma_examples() {
        assert_eq!(lemma_split(1.0, 0.0, 1.0).unwrap(), (1.0, 0.5));
        let (l, r) = lemma_split(2.0, -2.0, 3.0).unwrap();
        assert_eq!(l, 0.0);
        assert!(r <= 0.0);
        assert_eq!(lemma_split(3.0, -1.0, 2.0).unwrap(), (4.0, 2.5));
        for m in [-1.0, -0.5, 0.0] {
            assert!(matches!(
                lemma_split(1.0, 1.0, m),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn lemma_equality_case() {
        for m in [0.3, 1.0, 7.0, -2.0, -1.5] {
            let b = 1.7;
            let a = -(1.0 + m) / m * b;
            let (l, r) = lemma_split(a, b, m).unwrap();
            assert!((l - r).abs() < 1e-9, "m = {m}: {l} vs {r}");
        }
    }

    #[test]
    fn bound_examples() {
        let b = mean_curvature_bounds(&data(3, 1.0, 0.0, 0.5, 0.0, 0.5)).unwrap();
        assert_eq!(b.hf_sq_lower, 1.5);
        assert!(b.forced_f_minimal && b.hf_sq_upper <= 0.0);
        assert!(!b.consistent);

        let b = mean_curvature_bounds(&data(3, 1.0, 2.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(b.forced_f_minimal);

        let b = mean_curvature_bounds(&data(2, 1.0, 0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!((b.hf_sq_lower, b.hf_sq_upper), (0.0, 0.0));
        assert!(b.consistent);
    }

    #[test]
    fn invalid_data() {
        assert!(mean_curvature_bounds(&data(1, 1.0, 0.0, 0.0, 0.0, 0.0)).is_err());
        assert!(mean_curvature_bounds(&data(3, 0.0, 0.0, 0.0, 0.0, 0.0)).is_err());
        assert!(mean_curvature_bounds(&data(3, 1.0, 0.0, 0.0, -1.0, 0.0)).is_err());
    }

    #[test]
    fn verdict_examples() {
        assert!(nonexistence_verdict(1.0, GrowthRegime::InfiniteVolume { mu_v: 1.9 }).unwrap());
        assert!(!nonexistence_verdict(1.0, GrowthRegime::ExponentialRate { alpha: 2.0 }).unwrap());
        assert!(nonexistence_verdict(0.25, GrowthRegime::Polynomial).unwrap());
        assert!(nonexistence_verdict(1.0, GrowthRegime::FiniteVolume { mu_w: 1.99 }).unwrap());
        assert!(!nonexistence_verdict(1.0, GrowthRegime::LogDerivative { alpha: 2.5 }).unwrap());
        assert!(nonexistence_verdict(0.0, GrowthRegime::Polynomial).is_err());
    }
}
