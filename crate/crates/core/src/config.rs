//! Plain-text `key = value` configuration files.
//!
//! ```text
//! # built-in family
//! n = 3
//! family = paper-equality      # euclidean | gaussian-soliton | hyperbolic-like | table
//! alpha = 1.0
//! r0 = 1.0
//!
//! # explicit tables: (r_break, kind, params...) with kinds
//! #   linear slope intercept | exp scale rate | power scale exponent
//! #   hermite p0 m0 p1 m1    | sinh scale rate
//! g = [(0, hermite, 0, 1, 0.7788007830714049, -0.19470019576785122),
//!      (1, exp, 1, -0.25)]
//! f = [(0, linear, 0.5, 0)]
//! ```
//!
//! Values may continue over several lines while brackets are unbalanced.
//! Unknown keys are rejected.

use std::collections::BTreeMap;

use crate::bounds::{GrowthRegime, HypersurfaceData};
use crate::error::{Error, Result};
use crate::manifold::{make_model, ManifoldSpec, ModelFamily};
use crate::profile::{Formula, RadialProfile};
use crate::quadrature::QuadratureConfig;
use crate::spectrum::SolverConfig;

pub const KNOWN_KEYS: &[&str] = &[
    "n",
    "family",
    "alpha",
    "r0",
    "k",
    "label",
    "g",
    "f",
    "m",
    "mu",
    "ric_inf",
    "grad_inf_sq",
    "ric_nm_inf",
    "ricci_lower",
    "regime",
    "regime_exponent",
    "rel_tol",
    "abs_tol",
    "max_depth",
    "truncation_radii",
    "mesh_points",
    "osc_window",
    "n_osc",
    "bisect_tol",
    "ode_step",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn bracket_depth(s: &str) -> i64 {
    s.chars().fold(0, |d, c| match c {
        '[' | '(' => d + 1,
        ']' | ')' => d - 1,
        _ => d,
    })
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut pending: Option<(usize, String, String)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if let Some((start, key, mut value)) = pending.take() {
                value.push(' ');
                value.push_str(line);
                if bracket_depth(&value) > 0 {
                    pending = Some((start, key, value));
                } else {
                    entries.insert(key, (start, value));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(line_no, format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(config_err(line_no, format!("unknown key `{key}`")));
            }
            if entries.contains_key(&key) {
                return Err(config_err(line_no, format!("duplicate key `{key}`")));
            }
            let value = value.trim().to_string();
            if bracket_depth(&value) > 0 {
                pending = Some((line_no, key, value));
            } else {
                entries.insert(key, (line_no, value));
            }
        }
        if let Some((start, key, _)) = pending {
            return Err(config_err(start, format!("unterminated value for `{key}`")));
        }
        Ok(ConfigFile { entries })
    }

    /// Sets `key`, replacing any value read from the file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(config_err(0, format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), (0, value.into()));
        Ok(())
    }

    /// Effective `key -> value` settings.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, (_, v))| (k.clone(), v.clone()))
            .collect()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(l, _)| *l)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| config_err(*line, format!("`{key}` is not a number: `{v}`"))),
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| config_err(*line, format!("`{key}` is not a count: `{v}`"))),
        }
    }

    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some((line, v)) = self.entries.get(key) else {
            return Ok(None);
        };
        let inner = v
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| config_err(*line, format!("`{key}` must be a [..] list")))?;
        inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| config_err(*line, format!("bad number `{s}` in `{key}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn require_f64(&self, key: &str) -> Result<f64> {
        self.get_f64(key)?
            .ok_or_else(|| config_err(0, format!("missing required key `{key}`")))
    }
}

/// Parses `[(r_break, kind, params...), ...]` into a profile.
pub fn parse_profile_table(text: &str, line: usize) -> Result<RadialProfile> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| config_err(line, "profile table must be enclosed in [ ]"))?;
    let mut parts = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| config_err(line, format!("expected `(` at `{rest}`")))?;
        let close = open
            .find(')')
            .ok_or_else(|| config_err(line, "unclosed `(` in profile table"))?;
        let fields: Vec<&str> = open[..close].split(',').map(str::trim).collect();
        parts.push(parse_piece(&fields, line)?);
        rest = open[close + 1..]
            .trim_start()
            .trim_start_matches(',')
            .trim_start();
    }
    RadialProfile::new(parts).map_err(|e| config_err(line, e.to_string()))
}

fn parse_piece(fields: &[&str], line: usize) -> Result<(f64, Formula)> {
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| config_err(line, format!("bad number `{s}` in profile table")))
    };
    if fields.len() < 2 {
        return Err(config_err(line, "piece needs at least (r_break, kind)"));
    }
    let start = num(fields[0])?;
    let kind = fields[1];
    let params = fields[2..]
        .iter()
        .map(|s| num(s))
        .collect::<Result<Vec<_>>>()?;
    let want = |k: usize| {
        if params.len() == k {
            Ok(())
        } else {
            Err(config_err(
                line,
                format!("`{kind}` takes {k} parameters, got {}", params.len()),
            ))
        }
    };
    let formula = match kind {
        "linear" => {
            want(2)?;
            Formula::Linear {
                slope: params[0],
                intercept: params[1],
            }
        }
        "exp" => {
            want(2)?;
            Formula::Exponential {
                scale: params[0],
                rate: params[1],
            }
        }
        "power" => {
            want(2)?;
            Formula::Power {
                scale: params[0],
                exponent: params[1],
            }
        }
        "hermite" => {
            want(4)?;
            Formula::Hermite {
                p0: params[0],
                m0: params[1],
                p1: params[2],
                m1: params[3],
            }
        }
        "sinh" => {
            want(2)?;
            Formula::Sinh {
                scale: params[0],
                rate: params[1],
            }
        }
        other => return Err(config_err(line, format!("unknown piece kind `{other}`"))),
    };
    Ok((start, formula))
}

/// Built-in family from its name and parameters.
pub fn parse_family(
    name: &str,
    alpha: Option<f64>,
    r0: Option<f64>,
    k: Option<f64>,
) -> Result<ModelFamily> {
    let need = |v: Option<f64>, key: &str| {
        v.ok_or_else(|| Error::InvalidParameter(format!("family `{name}` needs `{key}`")))
    };
    match name {
        "paper-equality" => Ok(ModelFamily::PaperEquality {
            alpha: need(alpha, "alpha")?,
            r0: need(r0, "r0")?,
        }),
        "euclidean" => Ok(ModelFamily::Euclidean),
        "gaussian-soliton" => Ok(ModelFamily::GaussianSoliton),
        "hyperbolic-like" => Ok(ModelFamily::HyperbolicLike {
            k: k.unwrap_or(1.0),
        }),
        other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
    }
}

impl ConfigFile {
    pub fn manifold(&self) -> Result<ManifoldSpec> {
        let n = self
            .get_usize("n")?
            .ok_or_else(|| config_err(0, "missing required key `n`"))?;
        let family = self.get_str("family").unwrap_or(if self.contains("g") {
            "table"
        } else {
            "paper-equality"
        });
        if family == "table" {
            let g_text = self
                .get_str("g")
                .ok_or_else(|| config_err(0, "family `table` needs a `g` table"))?;
            let g = parse_profile_table(g_text, self.line_of("g"))?;
            let f = match self.get_str("f") {
                Some(t) => parse_profile_table(t, self.line_of("f"))?,
                None => RadialProfile::single(Formula::Linear {
                    slope: 0.0,
                    intercept: 0.0,
                })?,
            };
            let label = self.get_str("label").unwrap_or("table").to_string();
            return ManifoldSpec::new(n, g, f, label);
        }
        let fam = parse_family(
            family,
            self.get_f64("alpha")?,
            self.get_f64("r0")?,
            self.get_f64("k")?,
        )
        .map_err(|e| match self.line_of("family") {
            0 => e,
            line => config_err(line, e.to_string()),
        })?;
        make_model(fam, n)
    }

    pub fn quadrature(&self, base: QuadratureConfig) -> Result<QuadratureConfig> {
        let q = QuadratureConfig {
            rel_tol: self.get_f64("rel_tol")?.unwrap_or(base.rel_tol),
            abs_tol: self.get_f64("abs_tol")?.unwrap_or(base.abs_tol),
            max_depth: self.get_usize("max_depth")?.unwrap_or(base.max_depth),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn solver(&self, base: SolverConfig) -> Result<SolverConfig> {
        let s = SolverConfig {
            truncation_radii: self
                .get_list("truncation_radii")?
                .unwrap_or(base.truncation_radii),
            mesh_points: self.get_usize("mesh_points")?.unwrap_or(base.mesh_points),
            osc_window: self.get_f64("osc_window")?.unwrap_or(base.osc_window),
            n_osc: self.get_usize("n_osc")?.unwrap_or(base.n_osc),
            bisect_tol: self.get_f64("bisect_tol")?.unwrap_or(base.bisect_tol),
            ode_step: self.get_f64("ode_step")?.unwrap_or(base.ode_step),
        };
        s.validate()?;
        Ok(s)
    }

    /// Hypersurface inputs; `n` defaults to the manifold dimension key.
    pub fn hypersurface(&self) -> Result<HypersurfaceData> {
        let d = HypersurfaceData {
            n: self
                .get_usize("n")?
                .ok_or_else(|| config_err(0, "missing required key `n`"))?,
            m: self.require_f64("m")?,
            mu: self.require_f64("mu")?,
            ric_inf: self.require_f64("ric_inf")?,
            grad_inf_sq: self.get_f64("grad_inf_sq")?.unwrap_or(0.0),
            ric_nm_inf: self.require_f64("ric_nm_inf")?,
        };
        d.validate()?;
        Ok(d)
    }

    /// `(k, regime)` for the nonexistence verdict, when `ricci_lower` is set.
    pub fn regime(&self) -> Result<Option<(f64, GrowthRegime)>> {
        let Some(k) = self.get_f64("ricci_lower")? else {
            return Ok(None);
        };
        let name = self.get_str("regime").unwrap_or("polynomial");
        let exponent = || {
            self.get_f64("regime_exponent")?.ok_or_else(|| {
                config_err(
                    self.line_of("regime"),
                    format!("regime `{name}` needs `regime_exponent`"),
                )
            })
        };
        let regime = match name {
            "infinite-volume" => GrowthRegime::InfiniteVolume { mu_v: exponent()? },
            "finite-volume" => GrowthRegime::FiniteVolume { mu_w: exponent()? },
            "log-derivative" => GrowthRegime::LogDerivative { alpha: exponent()? },
            "exponential-rate" => GrowthRegime::ExponentialRate { alpha: exponent()? },
            "polynomial" => GrowthRegime::Polynomial,
            other => {
                return Err(config_err(
                    self.line_of("regime"),
                    format!("unknown regime `{other}`"),
                ))
            }
        };
        Ok(Some((k, regime)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_config() {
        let cfg =
            ConfigFile::parse("n = 3\nfamily = paper-equality\nalpha = 1\nr0 = 1 # cap radius\n")
                .unwrap();
        let spec = cfg.manifold().unwrap();
        assert_eq!(spec.n(), 3);
        assert!((spec.warping().value(2.0) - (-0.5_f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn table_config_matches_family() {
        let text = "n = 3\n\
            g = [(0, hermite, 0, 1, 0.7788007830714049, -0.19470019576785122),\n\
                 (1, exp, 1, -0.25)]\n\
            f = [(0, linear, 0.5, 0)]\n";
        let spec = ConfigFile::parse(text).unwrap().manifold().unwrap();
        let fam = make_model(
            ModelFamily::PaperEquality {
                alpha: 1.0,
                r0: 1.0,
            },
            3,
        )
        .unwrap();
        for r in [0.3, 1.0, 5.0] {
            assert!(
                (spec.sphere_density(r).unwrap() - fam.sphere_density(r).unwrap()).abs() < 1e-12
            );
        }
    }

    #[test]
    fn errors_carry_lines() {
        let err = ConfigFile::parse("n = 3\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        let err = ConfigFile::parse("n = 3\nn = 4\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        let err = ConfigFile::parse("g = [(0, linear, 1, 0),\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let cfg = ConfigFile::parse("n = 2\ng = [(0, cubic, 1)]\n").unwrap();
        assert!(matches!(cfg.manifold(), Err(Error::Config { line: 2, .. })));
        let cfg = ConfigFile::parse("n = x\n").unwrap();
        assert!(cfg.manifold().is_err());
    }

    #[test]
    fn solver_and_bounds_keys() {
        let text = "n = 3\ntruncation_radii = [20, 40]\nosc_window = 300\n\
                    m = 1\nmu = 0\nric_inf = 0.5\nric_nm_inf = 0.5\n\
                    ricci_lower = 1\nregime = infinite-volume\nregime_exponent = 1.9\n";
        let cfg = ConfigFile::parse(text).unwrap();
        let s = cfg.solver(SolverConfig::default()).unwrap();
        assert_eq!(s.truncation_radii, vec![20.0, 40.0]);
        assert_eq!(s.osc_window, 300.0);
        assert_eq!(s.n_osc, 5);
        let d = cfg.hypersurface().unwrap();
        assert_eq!((d.n, d.m, d.ric_inf, d.grad_inf_sq), (3, 1.0, 0.5, 0.0));
        let (k, regime) = cfg.regime().unwrap().unwrap();
        assert_eq!(k, 1.0);
        assert_eq!(regime, GrowthRegime::InfiniteVolume { mu_v: 1.9 });
    }

    #[test]
    fn set_overrides_file() {
        let mut cfg = ConfigFile::parse(
            "n = 3
family = euclidean
",
        )
        .unwrap();
        cfg.set("n", "2").unwrap();
        assert_eq!(cfg.manifold().unwrap().n(), 2);
        assert_eq!(
            cfg.to_map().get("family").map(String::as_str),
            Some("euclidean")
        );
        assert!(cfg.set("nope", "1").is_err());
    }
}
