//! TOML run configuration and its resolution into actuarial bases.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use crate::bonus::BonusPair;
use crate::curves::{RateCurve, TechnicalBasis, DEFAULT_STEP};
use crate::grid::Mesh;
use crate::thiele::{equivalence_premium, ActuarialBasis, CashflowSpec};

use super::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Mesh step in years.
    pub mesh: Option<Spanned<f64>>,
    /// Output directory.
    pub output: Option<String>,
    pub bases: BTreeMap<String, Spanned<BasisDecl>>,
    pub cashflows: BTreeMap<String, Spanned<CashflowDecl>>,
    pub contract: ContractDecl,
    pub bonus: Option<BonusPair>,
    pub monte_carlo: Option<Spanned<MonteCarloDecl>>,
    pub paidup: Option<Spanned<PaidUpDecl>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDecl {
    pub delta: RateCurve,
    pub mu: RateCurve,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CashflowDecl {
    pub term: f64,
    pub death_benefit: RateCurve,
    #[serde(default)]
    pub maturity_benefit: f64,
    /// Contractual premium; leave out to price on `contract.premium_basis`.
    pub premium: Option<RateCurve>,
}

/// Premium assumed by the valuation basis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationPremium {
    /// The contractual premium.
    #[default]
    Contractual,
    /// The equivalence premium on the valuation basis.
    Net,
    Zero,
    /// The contractual premium times a factor.
    Scaled(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractDecl {
    pub cashflows: Spanned<String>,
    pub valuation: Spanned<String>,
    pub experience: Spanned<String>,
    pub premium_basis: Option<Spanned<String>>,
    /// Multiplies the equivalence premium of `premium_basis`.
    #[serde(default = "one")]
    pub premium_loading: f64,
    #[serde(default)]
    pub valuation_premium: ValuationPremium,
    /// Benefits actually paid, if they differ from the contract's.
    pub experience_cashflows: Option<Spanned<String>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloDecl {
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub intervals: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaidUpDecl {
    pub times: Vec<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub mesh: Option<f64>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    pub paths: usize,
    pub seed: Option<u64>,
    pub checkpoints: Vec<f64>,
    pub intervals: Vec<(f64, f64)>,
}

pub const DEFAULT_PATHS: usize = 10_000;

/// A configuration with every name resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub h: f64,
    pub out: PathBuf,
    /// Contractual cashflows with the premium actually charged.
    pub contract: CashflowSpec,
    /// Name of the pricing basis and the level rate it produced.
    pub priced_on: Option<(String, f64)>,
    pub valuation: ActuarialBasis,
    pub experience: ActuarialBasis,
    pub bonus: Option<BonusPair>,
    pub mc: McSettings,
    pub paidup_times: Vec<f64>,
}

/// 1-based line and column of byte offset `at`.
fn line_col(source: &str, at: usize) -> (usize, usize) {
    let before = &source[..at.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, col)
}

fn at<T>(source: &str, item: &Spanned<T>, msg: impl std::fmt::Display) -> CliError {
    let (line, col) = line_col(source, item.span().start);
    CliError::Config(format!("line {line}, column {col}: {msg}"))
}

pub fn parse(source: &str) -> Result<RunConfig, CliError> {
    toml::from_str(source).map_err(|e| {
        let place = e
            .span()
            .map(|s| {
                let (line, col) = line_col(source, s.start);
                format!("line {line}, column {col}: ")
            })
            .unwrap_or_default();
        CliError::Config(format!("{place}{}", e.message()))
    })
}

pub fn load(path: &Path) -> Result<(RunConfig, String), CliError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = parse(&source).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok((config, source))
}

impl RunConfig {
    fn basis(&self, source: &str, name: &Spanned<String>) -> Result<TechnicalBasis, CliError> {
        let decl = self
            .bases
            .get(name.get_ref())
            .ok_or_else(|| at(source, name, format!("unknown basis '{}'", name.get_ref())))?;
        let d = decl.get_ref();
        let tb = TechnicalBasis::new(name.get_ref().clone(), d.delta.clone(), d.mu.clone());
        tb.delta.validate().and(tb.mu.validate()).map_err(|e| at(source, decl, e))?;
        Ok(tb)
    }

    fn cashflows(&self, source: &str, name: &Spanned<String>) -> Result<(CashflowDecl, CashflowSpec), CliError> {
        let decl = self
            .cashflows
            .get(name.get_ref())
            .ok_or_else(|| at(source, name, format!("unknown cashflows '{}'", name.get_ref())))?;
        let d = decl.get_ref().clone();
        let premium = d.premium.clone().unwrap_or(RateCurve::constant(0.0));
        let spec = CashflowSpec::new(d.term, premium, d.death_benefit.clone(), d.maturity_benefit);
        spec.validate().map_err(|e| at(source, decl, e))?;
        Ok((d, spec))
    }

    /// Resolves names, prices the contract and applies `ov`.
    pub fn resolve(&self, source: &str, ov: &Overrides) -> Result<Resolved, CliError> {
        let c = &self.contract;
        let (decl, mut contract) = self.cashflows(source, &c.cashflows)?;
        let h = match (ov.mesh, &self.mesh) {
            (Some(h), _) => {
                Mesh::new(contract.term, h).map_err(|e| CliError::Config(format!("--mesh: {e}")))?;
                h
            }
            (None, Some(h)) => {
                Mesh::new(contract.term, *h.get_ref()).map_err(|e| at(source, h, e))?;
                *h.get_ref()
            }
            (None, None) => DEFAULT_STEP,
        };
        let valuation_tb = self.basis(source, &c.valuation)?;
        let experience_tb = self.basis(source, &c.experience)?;

        let priced_on = match (&decl.premium, &c.premium_basis) {
            (Some(_), Some(name)) => {
                return Err(at(source, name, "premium given both by the cashflows and by premium_basis"));
            }
            (None, None) => {
                return Err(at(
                    source,
                    &c.cashflows,
                    "cashflows have no premium and the contract names no premium_basis",
                ));
            }
            (Some(_), None) => None,
            (None, Some(name)) => {
                let tb = self.basis(source, name)?;
                let rate = c.premium_loading * equivalence_premium(&tb, &contract, h)?;
                contract = contract.with_level_premium(rate);
                Some((name.get_ref().clone(), rate))
            }
        };

        let valuation_premium = match c.valuation_premium {
            ValuationPremium::Contractual => contract.premium.clone(),
            ValuationPremium::Net => RateCurve::constant(equivalence_premium(&valuation_tb, &contract, h)?),
            ValuationPremium::Zero => RateCurve::constant(0.0),
            ValuationPremium::Scaled(f) => contract.premium.clone().scaled(f),
        };
        let valuation = ActuarialBasis::new(
            valuation_tb.label.clone(),
            valuation_tb,
            contract.with_premium(valuation_premium),
        );

        let paid = match &c.experience_cashflows {
            Some(name) => {
                let (_, spec) = self.cashflows(source, name)?;
                if (spec.term - contract.term).abs() > 1e-12 {
                    return Err(at(source, name, "experience cashflows have a different term"));
                }
                spec.with_premium(contract.premium.clone())
            }
            None => contract.clone(),
        };
        let experience = ActuarialBasis::new(experience_tb.label.clone(), experience_tb, paid);

        let mesh = Mesh::new(contract.term, h).map_err(|e| CliError::Config(e.to_string()))?;
        let on_mesh = |t: f64| mesh.node_index(t).is_ok();

        let mut mc = McSettings {
            paths: DEFAULT_PATHS,
            seed: None,
            checkpoints: Vec::new(),
            intervals: Vec::new(),
        };
        if let Some(decl) = &self.monte_carlo {
            let d = decl.get_ref();
            if let Some(&t) = d.checkpoints.iter().find(|&&t| !on_mesh(t)) {
                return Err(at(source, decl, format!("checkpoint {t} is not a mesh node")));
            }
            if let Some(iv) = d.intervals.iter().find(|iv| !(on_mesh(iv[0]) && on_mesh(iv[1]) && iv[0] < iv[1])) {
                return Err(at(source, decl, format!("interval {iv:?} must be increasing mesh nodes")));
            }
            mc.paths = d.paths.unwrap_or(DEFAULT_PATHS);
            mc.seed = d.seed;
            mc.checkpoints = d.checkpoints.clone();
            mc.intervals = d.intervals.iter().map(|iv| (iv[0], iv[1])).collect();
        }
        if let Some(p) = ov.paths {
            mc.paths = p;
        }
        if ov.seed.is_some() {
            mc.seed = ov.seed;
        }

        let paidup_times = match &self.paidup {
            Some(decl) => {
                let times = decl.get_ref().times.clone();
                if let Some(&t) = times.iter().find(|&&t| !on_mesh(t)) {
                    return Err(at(source, decl, format!("paid-up time {t} is not a mesh node")));
                }
                times
            }
            None => Vec::new(),
        };

        let out = ov
            .out
            .clone()
            .or_else(|| self.output.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));

        Ok(Resolved {
            h,
            out,
            contract,
            priced_on,
            valuation,
            experience,
            bonus: self.bonus.clone(),
            mc,
            paidup_times,
        })
    }
}
