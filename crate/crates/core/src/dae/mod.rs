//! DAE systems: container, text format, substitution and extension.
//!
//! A system is square: equation `f_i` is stored as an expression whose zero
//! set is the equation, and state indices refer to positions in `vars`.
//! Every equation keeps the tree as written (`raw`) next to its canonical
//! form (`simplified`).

mod emit;
mod parse;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use serde::Serialize;

use crate::expr::{simplify, Expr, Symbol};

pub use emit::emit_dae;
pub use parse::{parse_dae, parse_expr, parse_expr_list};

/// Names that cannot be declared.
pub(crate) const RESERVED: &[&str] = &["t", "diff", "sin", "cos", "exp", "ln", "sqrt"];

/// Which form of the equations an analysis reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Trees as written, before any cancellation.
    Formal,
    /// Canonical simplified forms.
    #[default]
    True,
}

/// How an equation came to be.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Original,
    LcReplaced,
    EsRewritten,
    /// Added by an ES step; `var_alias`/`eq_alias` are the `y`/`g` names
    /// before renaming.
    EsAppended { var_alias: String, eq_alias: String },
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::Original => "original",
            Provenance::LcReplaced => "lc_replaced",
            Provenance::EsRewritten => "es_rewritten",
            Provenance::EsAppended { .. } => "es_appended",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub name: String,
    pub raw: Expr,
    pub simplified: Expr,
    pub provenance: Provenance,
}

impl Equation {
    pub fn new(name: impl Into<String>, raw: Expr) -> Self {
        let simplified = simplify(&raw);
        Equation {
            name: name.into(),
            raw,
            simplified,
            provenance: Provenance::Original,
        }
    }

    pub fn expr(&self, mode: Mode) -> &Expr {
        match mode {
            Mode::Formal => &self.raw,
            Mode::True => &self.simplified,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DaeSystem {
    pub name: String,
    pub vars: Vec<String>,
    pub equations: Vec<Equation>,
    pub params: Vec<(String, Option<BigRational>)>,
    pub inputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DaeError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}, column {col}: undeclared symbol `{name}`")]
    Undeclared {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("system is not square: {equations} equations, {variables} variables")]
    NonSquare { equations: usize, variables: usize },
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("name `{0}` is already in use")]
    NameCollision(String),
    #[error("substitution introduces undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("invalid substitution for {target}: {reason}")]
    InvalidSubstitution { target: String, reason: String },
    #[error("equation index {0} out of range")]
    RowOutOfRange(usize),
}

/// Replace `x_var^(order)` by `replacement`.
#[derive(Clone, Debug, PartialEq)]
pub struct Substitution {
    pub var: usize,
    pub order: u32,
    pub replacement: Expr,
}

impl DaeSystem {
    /// Builds and validates a system from `(name, expression)` equations.
    pub fn new(
        name: impl Into<String>,
        vars: Vec<String>,
        equations: Vec<(String, Expr)>,
        params: Vec<(String, Option<BigRational>)>,
        inputs: Vec<String>,
    ) -> Result<Self, DaeError> {
        let sys = DaeSystem {
            name: name.into(),
            vars,
            equations: equations
                .into_iter()
                .map(|(n, e)| Equation::new(n, e))
                .collect(),
            params,
            inputs,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn exprs(&self, mode: Mode) -> Vec<&Expr> {
        self.equations.iter().map(|e| e.expr(mode)).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|(p, _)| p == name)
    }

    pub fn is_input(&self, name: &str) -> bool {
        self.inputs.iter().any(|h| h == name)
    }

    /// Checks squareness, index ranges, declarations and name uniqueness.
    pub fn validate(&self) -> Result<(), DaeError> {
        if self.equations.len() != self.vars.len() {
            return Err(DaeError::NonSquare {
                equations: self.equations.len(),
                variables: self.vars.len(),
            });
        }
        let mut seen = BTreeSet::new();
        let declared = self
            .vars
            .iter()
            .chain(self.params.iter().map(|(p, _)| p))
            .chain(self.inputs.iter());
        for name in declared {
            if RESERVED.contains(&name.as_str()) || !seen.insert(name.as_str()) {
                return Err(DaeError::Duplicate(name.clone()));
            }
        }
        let mut eq_names = BTreeSet::new();
        for eq in &self.equations {
            if !eq_names.insert(eq.name.as_str()) {
                return Err(DaeError::Duplicate(eq.name.clone()));
            }
            self.check_symbols(&eq.raw)?;
            self.check_symbols(&eq.simplified)?;
        }
        Ok(())
    }

    fn check_symbols(&self, e: &Expr) -> Result<(), DaeError> {
        for s in e.symbols() {
            match s {
                Symbol::Time => {}
                Symbol::State { var, order } => {
                    if var >= self.n() {
                        return Err(DaeError::UndeclaredSymbol(format!(
                            "{}",
                            Expr::state(var, order)
                        )));
                    }
                }
                Symbol::Input { name, .. } if !self.is_input(&name) => {
                    return Err(DaeError::UndeclaredSymbol(name));
                }
                Symbol::Param(name) if !self.is_param(&name) => {
                    return Err(DaeError::UndeclaredSymbol(name));
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn name_in_use(&self, name: &str) -> bool {
        RESERVED.contains(&name)
            || self.var_index(name).is_some()
            || self.is_param(name)
            || self.is_input(name)
    }

    /// Replaces, in each equation of `rows`, every occurrence of each target
    /// symbol by its replacement (simultaneously), then re-simplifies.
    pub fn apply_substitutions(
        &self,
        subs: &[Substitution],
        rows: &[usize],
    ) -> Result<DaeSystem, DaeError> {
        let mut map = BTreeMap::new();
        for s in subs {
            let target = format!("{}", Expr::state(s.var, s.order).display(&self.vars));
            if s.var >= self.n() {
                return Err(DaeError::UndeclaredSymbol(target));
            }
            if matches!(s.replacement.formal_hod(s.var), Some(k) if k >= s.order) {
                return Err(DaeError::InvalidSubstitution {
                    target,
                    reason: "replacement refers to the target at or above its order".into(),
                });
            }
            self.check_symbols(&s.replacement)?;
            map.insert((s.var, s.order), s.replacement.clone());
        }
        let mut out = self.clone();
        if map.is_empty() {
            return Ok(out);
        }
        for &i in rows {
            let eq = out
                .equations
                .get_mut(i)
                .ok_or(DaeError::RowOutOfRange(i))?;
            eq.raw = eq.raw.substitute_states(&map);
            eq.simplified = simplify(&eq.simplified.substitute_states(&map));
            if eq.provenance == Provenance::Original {
                eq.provenance = Provenance::EsRewritten;
            }
        }
        Ok(out)
    }

    /// Adds variable `var_name` and equation `eq_name: eq = 0`. The new
    /// variable gets index `n`.
    pub fn append_equation_and_variable(
        &self,
        var_name: &str,
        eq_name: &str,
        eq: Expr,
    ) -> Result<DaeSystem, DaeError> {
        if self.name_in_use(var_name) {
            return Err(DaeError::NameCollision(var_name.to_string()));
        }
        if self.equations.iter().any(|e| e.name == eq_name) {
            return Err(DaeError::NameCollision(eq_name.to_string()));
        }
        let mut out = self.clone();
        out.vars.push(var_name.to_string());
        out.check_symbols(&eq)?;
        let mut equation = Equation::new(eq_name, eq);
        equation.provenance = Provenance::EsAppended {
            var_alias: var_name.to_string(),
            eq_alias: eq_name.to_string(),
        };
        out.equations.push(equation);
        Ok(out)
    }

    /// Replaces equation `i` by `e`, tagging it with `provenance`.
    pub fn replace_equation(
        &self,
        i: usize,
        e: Expr,
        provenance: Provenance,
    ) -> Result<DaeSystem, DaeError> {
        self.check_symbols(&e)?;
        let mut out = self.clone();
        let eq = out.equations.get_mut(i).ok_or(DaeError::RowOutOfRange(i))?;
        let name = eq.name.clone();
        *eq = Equation::new(name, e);
        eq.provenance = provenance;
        Ok(out)
    }

    /// Names for a new variable and equation. When every existing name is
    /// `<prefix><number>` with a shared prefix, continue the numbering
    /// (`x4`, `f4`); otherwise use a fresh version of the alias.
    pub fn fresh_names(&self, var_alias: &str, eq_alias: &str) -> (String, String) {
        let var = next_in_sequence(&self.vars)
            .filter(|v| !self.name_in_use(v))
            .unwrap_or_else(|| self.fresh(var_alias, |s, n| s.name_in_use(n)));
        let eq_names: Vec<String> = self.equations.iter().map(|e| e.name.clone()).collect();
        let eq = next_in_sequence(&eq_names)
            .filter(|e| !eq_names.contains(e))
            .unwrap_or_else(|| {
                self.fresh(eq_alias, |s, n| s.equations.iter().any(|e| e.name == n))
            });
        (var, eq)
    }

    fn fresh(&self, base: &str, taken: impl Fn(&Self, &str) -> bool) -> String {
        if !taken(self, base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}_{k}"))
            .find(|n| !taken(self, n))
            .unwrap()
    }
}

/// `prefix{len+1}` when `names` is `prefix1, ..., prefix{len}` in order.
fn next_in_sequence(names: &[String]) -> Option<String> {
    let first = names.first()?;
    let prefix: String = first.trim_end_matches(|c: char| c.is_ascii_digit()).to_string();
    if prefix.is_empty() {
        return None;
    }
    for (k, name) in names.iter().enumerate() {
        if *name != format!("{prefix}{}", k + 1) {
            return None;
        }
    }
    Some(format!("{prefix}{}", names.len() + 1))
}
