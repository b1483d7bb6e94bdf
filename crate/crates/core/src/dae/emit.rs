use std::fmt::Write;

use num_rational::BigRational;

use super::{DaeSystem, Provenance};

fn rational(v: &BigRational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Prints `sys` in the text format, using simplified equations. Provenance
/// other than `original` is kept in trailing comments.
pub fn emit_dae(sys: &DaeSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dae {}", sys.name);
    let _ = writeln!(out, "vars {}", sys.vars.join(", "));
    if !sys.params.is_empty() {
        let ps: Vec<String> = sys
            .params
            .iter()
            .map(|(p, v)| match v {
                Some(v) => format!("{p} = {}", rational(v)),
                None => p.clone(),
            })
            .collect();
        let _ = writeln!(out, "params {}", ps.join(", "));
    }
    if !sys.inputs.is_empty() {
        let _ = writeln!(out, "input {}", sys.inputs.join(", "));
    }
    for eq in &sys.equations {
        let _ = write!(
            out,
            "eq {}: {} = 0",
            eq.name,
            eq.simplified.display(&sys.vars)
        );
        match &eq.provenance {
            Provenance::Original => {}
            Provenance::EsAppended {
                var_alias,
                eq_alias,
            } => {
                let _ = write!(out, "  # es_appended ({eq_alias}, defines {var_alias})");
            }
            p => {
                let _ = write!(out, "  # {}", p.label());
            }
        }
        out.push('\n');
    }
    out
}
