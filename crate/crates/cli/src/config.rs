use serde::{Deserialize, Serialize};

use spinbridge::lattice::GridSpec;
use spinbridge::record::ReIm;
use spinbridge::{symbol_for_generator_combo, HamiltonianSpec64, Mode, SpinSystem64};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Exact,
    SymbolCheck,
    Mc,
    NuScan,
    Pde,
    Contract,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Exact => "exact",
            Subcommand::SymbolCheck => "symbol-check",
            Subcommand::Mc => "mc",
            Subcommand::NuScan => "nu-scan",
            Subcommand::Pde => "pde",
            Subcommand::Contract => "contract",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianKind {
    #[default]
    GeneratorCombo,
}

/// `a J₃ + b J₊ + b* J₋ + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    #[serde(default)]
    pub kind: HamiltonianKind,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b_re: f64,
    #[serde(default)]
    pub b_im: f64,
    #[serde(default)]
    pub c: f64,
}

impl HamiltonianConfig {
    pub fn build(&self, sys: &SpinSystem64) -> HamiltonianSpec64 {
        match self.kind {
            HamiltonianKind::GeneratorCombo => {
                symbol_for_generator_combo(sys, self.a, spinbridge::Complex64::new(self.b_re, self.b_im), self.c)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    #[default]
    Number,
    Displacement,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionConfig {
    #[serde(default)]
    pub case: CaseName,
    /// `2j` values; the case default when absent.
    pub ladder: Option<Vec<u32>>,
}

/// One experiment. Which fields are required depends on the subcommand.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_j: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<ReIm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zp: Option<ReIm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

fn missing(field: &str, sub: Subcommand) -> CliError {
    CliError::Validation(format!("missing field \"{field}\" required by subcommand {}", sub.name()))
}

fn need<T: Clone>(v: &Option<T>, field: &str, sub: Subcommand) -> Result<T, CliError> {
    v.clone().ok_or_else(|| missing(field, sub))
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("invalid field \"{field}\": {reason}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("malformed config: {e}")))
    }

    /// Checks everything `sub` needs before any computation starts.
    pub fn validate(&self, sub: Subcommand) -> Result<(), CliError> {
        if let Some(s) = self.subcommand {
            if s != sub {
                return Err(invalid("subcommand", format!("config is for {}, invoked as {}", s.name(), sub.name())));
            }
        }
        let point_fields = |cfg: &Self| -> Result<(), CliError> {
            for (name, p) in [("z", cfg.z), ("zp", cfg.zp)] {
                let p = need(&p, name, sub)?;
                if !(p.re.is_finite() && p.im.is_finite()) {
                    return Err(invalid(name, "must be finite"));
                }
            }
            let t = need(&cfg.t, "t", sub)?;
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
            }
            Ok(())
        };
        if sub != Subcommand::Contract {
            let two_j = need(&self.two_j, "two_j", sub)?;
            if two_j < 0 {
                return Err(invalid("two_j", format!("must be >= 0, got {two_j}")));
            }
            need(&self.hamiltonian, "hamiltonian", sub)?;
        }
        match sub {
            Subcommand::SymbolCheck => {}
            Subcommand::Exact => point_fields(self)?,
            Subcommand::Mc => {
                point_fields(self)?;
                positive("nu", need(&self.nu, "nu", sub)?)?;
                self.paths_and_seed(sub)?;
            }
            Subcommand::NuScan => {
                point_fields(self)?;
                ascending(&need(&self.nu_list, "nu_list", sub)?)?;
                self.paths_and_seed(sub)?;
            }
            Subcommand::Pde => {
                point_fields(self)?;
                ascending(&self.nu_values(sub)?)?;
                if let Some(g) = self.grid {
                    GridSpec::new(g.half_width, g.n).map_err(|e| invalid("grid", e))?;
                }
            }
            Subcommand::Contract => {
                point_fields(self)?;
                if let Some(ladder) = self.contraction.as_ref().and_then(|c| c.ladder.as_ref()) {
                    if ladder.is_empty() || ladder.contains(&0) {
                        return Err(invalid("contraction.ladder", "needs at least one entry, all >= 1"));
                    }
                }
            }
        }
        if let Some(k) = self.steps {
            if k < 2 {
                return Err(invalid("steps", format!("must be >= 2, got {k}")));
            }
        }
        Ok(())
    }

    fn paths_and_seed(&self, sub: Subcommand) -> Result<(), CliError> {
        let n = need(&self.n_paths, "n_paths", sub)?;
        if n < 2 {
            return Err(invalid("n_paths", format!("must be >= 2, got {n}")));
        }
        need(&self.seed, "seed", sub)?;
        Ok(())
    }

    /// `nu_list`, or the single `nu`.
    pub fn nu_values(&self, sub: Subcommand) -> Result<Vec<f64>, CliError> {
        match (&self.nu_list, self.nu) {
            (Some(l), _) => Ok(l.clone()),
            (None, Some(nu)) => Ok(vec![nu]),
            (None, None) => Err(missing("nu_list", sub)),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec<f64>, CliError> {
        match self.grid {
            Some(g) => GridSpec::new(g.half_width, g.n).map_err(|e| invalid("grid", e)),
            None => Ok(GridSpec::standard()),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

fn ascending(list: &[f64]) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(invalid("nu_list", "must not be empty"));
    }
    for &nu in list {
        positive("nu_list", nu)?;
    }
    if list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("nu_list", "must be strictly ascending"));
    }
    Ok(())
}
