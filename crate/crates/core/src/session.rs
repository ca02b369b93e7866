//! Session configuration and the text-level operations shared by the
//! command line and the C interface.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac::{self, MultSetSpec};
use crate::localize::{self, LocalizedStarProduct};
use crate::multidiff;
use crate::orelab::{self, OreQuery, OreReport, Side};
use crate::parse;
use crate::rational::Rational;
use crate::star::{gauge_transform, EquivTransform, StarAlgebra, StarJson, StarProduct};

/// A multiplicative set declaration: `{"generators": ["x"]}` or
/// `{"basepoint": ["0", "1"]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultSetDecl {
    Generators(Vec<String>),
    Basepoint(Vec<String>),
}

fn default_vars() -> Vec<String> {
    vec!["x".into(), "p".into()]
}
fn default_trunc() -> usize {
    6
}
fn default_star() -> String {
    "standard".into()
}
fn default_sets() -> BTreeMap<String, MultSetDecl> {
    BTreeMap::from([("Sx".to_string(), MultSetDecl::Generators(vec!["x".into()]))])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    #[serde(default = "default_vars")]
    pub vars: Vec<String>,
    #[serde(default = "default_trunc")]
    pub trunc: usize,
    /// `standard`, `moyal`, or a path to a star-product JSON file.
    #[serde(default = "default_star")]
    pub star: String,
    #[serde(default = "default_sets")]
    pub multsets: BTreeMap<String, MultSetDecl>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            vars: default_vars(),
            trunc: default_trunc(),
            star: default_star(),
            multsets: default_sets(),
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// A validated configuration with its star product and sets built.
#[derive(Clone, Debug)]
pub struct Session {
    config: SessionConfig,
    star: StarProduct,
    sets: BTreeMap<String, Arc<MultSetSpec>>,
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != parse::LAMBDA
}

impl Session {
    /// `base_dir` resolves a relative star-product path.
    pub fn new(config: SessionConfig, base_dir: Option<&Path>) -> Result<Self> {
        if config.vars.is_empty() {
            return Err(Error::Precondition("at least one variable is required".into()));
        }
        for (i, v) in config.vars.iter().enumerate() {
            if !valid_name(v) {
                return Err(Error::Precondition(format!("invalid variable name '{v}'")));
            }
            if config.vars[..i].contains(v) {
                return Err(Error::Precondition(format!("duplicate variable name '{v}'")));
            }
        }
        let star = match config.star.as_str() {
            "standard" | "moyal" => {
                if config.vars.len() != 2 {
                    return Err(Error::Precondition(format!(
                        "the built-in '{}' product needs exactly two variables (x, p)",
                        config.star
                    )));
                }
                StarProduct::builtin(&config.star, config.trunc)?
            }
            path => {
                let mut full = PathBuf::from(path);
                if let (true, Some(dir)) = (full.is_relative(), base_dir) {
                    full = dir.join(full);
                }
                let json: StarJson = serde_json::from_str(&std::fs::read_to_string(&full)?)?;
                if json.vars != config.vars {
                    return Err(Error::Precondition(
                        "star-product variables differ from the session's".into(),
                    ));
                }
                let s = json.to_star()?;
                if s.trunc() < config.trunc {
                    return Err(Error::StarTooShort {
                        needed: config.trunc,
                        available: s.trunc(),
                    });
                }
                s.truncated(config.trunc)
            }
        };
        let mut sets = BTreeMap::new();
        for (name, decl) in &config.multsets {
            let spec = match decl {
                MultSetDecl::Generators(gens) => {
                    let gens = gens
                        .iter()
                        .map(|g| parse::parse_poly(g, &config.vars))
                        .collect::<Result<Vec<_>>>()?;
                    MultSetSpec::generated(name.clone(), gens)?
                }
                MultSetDecl::Basepoint(coords) => {
                    let point = coords
                        .iter()
                        .map(|c| {
                            let p = parse::parse_poly(c, &config.vars)?;
                            p.as_constant()
                                .ok_or_else(|| Error::InvalidSet(format!("basepoint entry '{c}' is not a number")))
                        })
                        .collect::<Result<Vec<Rational>>>()?;
                    MultSetSpec::point_local(name.clone(), point)?
                }
            };
            if spec.nvars() != config.vars.len() {
                return Err(Error::InvalidSet(format!(
                    "'{name}' has {} coordinates for {} variables",
                    spec.nvars(),
                    config.vars.len()
                )));
            }
            sets.insert(name.clone(), Arc::new(spec));
        }
        Ok(Session { config, star, sets })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(SessionConfig::from_json(text)?, None)
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn names(&self) -> &[String] {
        &self.config.vars
    }

    pub fn trunc(&self) -> usize {
        self.config.trunc
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn star(&self) -> &StarProduct {
        &self.star
    }

    pub fn set(&self, name: &str) -> Result<&Arc<MultSetSpec>> {
        self.sets.get(name).ok_or_else(|| Error::Unknown {
            kind: "multiplicative set",
            name: name.to_string(),
        })
    }

    pub fn localized(&self, set: &str) -> Result<LocalizedStarProduct> {
        localize::localize_star(&self.star, self.set(set)?)
    }

    /// `u ⋆ v`, over the localization when a set is named.
    pub fn eval(&self, u: &str, v: &str, set: Option<&str>) -> Result<String> {
        let names = self.names();
        let k = self.trunc();
        match set {
            None => {
                let u = parse::parse_series(u, names, k)?;
                let v = parse::parse_series(v, names, k)?;
                Ok(self.star.star_mul(&u, &v)?.display_with(names))
            }
            Some(set) => {
                let l = self.localized(set)?;
                let u = parse::parse_frac_series(u, names, k, l.set())?;
                let v = parse::parse_frac_series(v, names, k, l.set())?;
                Ok(l.star_mul(&u, &v)?.display_with(names))
            }
        }
    }

    /// The two-sided star inverse, over the localization when a set is
    /// named and over polynomials (constant `g₀` only) otherwise.
    pub fn invert(&self, g: &str, set: Option<&str>) -> Result<String> {
        let names = self.names();
        let k = self.trunc();
        match set {
            None => {
                let g = parse::parse_series(g, names, k)?;
                Ok(self.star.star_inverse_auto(&g)?.display_with(names))
            }
            Some(set) => {
                let l = self.localized(set)?;
                let g = parse::parse_frac_series(g, names, k, l.set())?;
                Ok(l.star_inverse_auto(&g)?.display_with(names))
            }
        }
    }

    /// `{f, g}` for polynomials.
    pub fn bracket(&self, f: &str, g: &str) -> Result<String> {
        let names = self.names();
        let f = parse::parse_poly(f, names)?;
        let g = parse::parse_poly(g, names)?;
        Ok(self.star.poisson_bracket(&f, &g)?.display_with(names))
    }

    /// Localizes the session product at `set` and reports its cochains;
    /// with two fractions, also their product.
    pub fn localize(&self, set: &str, args: Option<(&str, &str)>) -> Result<LocalizeReport> {
        let names = self.names();
        let l = self.localized(set)?;
        let product = match args {
            Some((u, v)) => {
                let u = parse::parse_frac_series(u, names, self.trunc(), l.set())?;
                let v = parse::parse_frac_series(v, names, self.trunc(), l.set())?;
                let uv = l.star_mul(&u, &v)?;
                let coordinate = l.coordinate_product(&u, &v)?;
                Some(ProductReport {
                    value: uv.display_with(names),
                    coordinate_form_agrees: uv == coordinate,
                })
            }
            None => None,
        };
        Ok(LocalizeReport {
            set: set.to_string(),
            rule: frac::describe(l.set(), names),
            trunc: self.trunc(),
            validated: true,
            cochains: self
                .star
                .ops()
                .iter()
                .map(|op| multidiff::describe(op, names))
                .collect(),
            product,
        })
    }

    pub fn ore(&self, r: &str, s: &str, set: &str, side: Side, degree: u32, exponent_bound: u32) -> Result<OreReport> {
        let names = self.names();
        let r = parse::parse_series(r, names, self.trunc())?;
        let s = parse::parse_series(s, names, self.trunc())?;
        let q = OreQuery::new(
            self.star.clone(),
            Arc::clone(self.set(set)?),
            r,
            s,
            side,
            degree,
            exponent_bound,
        )?;
        let outcome = orelab::ore_search(&q)?;
        Ok(OreReport::new(&q, &outcome, names))
    }

    /// The session product gauged by `exp(cλΔ)`, as star-product JSON.
    pub fn gauge(&self, c: &str) -> Result<StarJson> {
        if self.names().len() != 2 {
            return Err(Error::Precondition("gauge needs two variables (x, p)".into()));
        }
        let c = parse::parse_poly(c, self.names())?
            .as_constant()
            .ok_or_else(|| Error::Precondition("gauge parameter must be a number".into()))?;
        let t = EquivTransform::exp_laplacian(c, self.trunc());
        let gauged = gauge_transform(&self.star, &t)?;
        Ok(StarJson::from_star(&gauged, self.names()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductReport {
    pub value: String,
    pub coordinate_form_agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizeReport {
    pub set: String,
    pub rule: String,
    pub trunc: usize,
    pub validated: bool,
    pub cochains: Vec<String>,
    pub product: Option<ProductReport>,
}

impl LocalizeReport {
    pub fn passed(&self) -> bool {
        self.validated && self.product.as_ref().is_none_or(|p| p.coordinate_form_agrees)
    }
}
