//! `daefix` command line: `analyze`, `fix` and `trace` over DAE files.

pub mod args;
pub mod doc;
pub mod render;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use daefix::convert::{analyze_system, fix_dae, trace_step, ConvertError, FixOptions, Method, Status};
use daefix::dae::{emit_dae, parse_expr, parse_expr_list, Mode};
use daefix::jacobian::Classification;
use daefix::linalg::{residual, LinalgError, NullVector, Side};
use daefix::{parse_dae, DaeSystem, Expr, ZeroTest};
use serde::Serialize;

use args::{Cli, Command, Common, FixArgs, TraceArgs};
use doc::{AnalysisDocument, FixDocument, StepDoc, TraceDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_SINGULAR: i32 = 2;
pub const EXIT_ILL_POSED: i32 = 3;
pub const EXIT_PROBABLE: i32 = 4;

struct Failure {
    code: i32,
    msg: String,
}

impl Failure {
    fn new(code: i32, msg: impl Into<String>) -> Self {
        Failure { code, msg: msg.into() }
    }
}

fn error_code(e: &ConvertError) -> i32 {
    match e {
        ConvertError::Linalg(LinalgError::EliminationStuck { .. }) => EXIT_PROBABLE,
        ConvertError::PreconditionViolated(_) => EXIT_SINGULAR,
        _ => EXIT_ERROR,
    }
}

impl From<ConvertError> for Failure {
    fn from(e: ConvertError) -> Self {
        Failure::new(error_code(&e), e.to_string())
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let to_out = !e.use_stderr();
            let text = e.render().to_string();
            let _ = if to_out { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return if to_out { EXIT_OK } else { EXIT_ERROR };
        }
    };
    let result = match &cli.command {
        Command::Analyze(c) => analyze(c, out),
        Command::Fix(f) => fix(f, out),
        Command::Trace(t) => trace(t, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}

fn load(c: &Common) -> Result<(DaeSystem, String), Failure> {
    let bytes = std::fs::read(&c.path).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", c.path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::new(EXIT_ERROR, format!("{}: not UTF-8", c.path.display())))?;
    let sys = parse_dae(&text).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", c.path.display())))?;
    Ok((sys, doc::sha256_hex(&bytes)))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", path.display())))
}

/// Writes JSON to the `--json` target. Returns whether the text report is
/// still wanted.
fn write_json<D: Serialize>(c: &Common, d: &D, out: &mut dyn Write) -> Result<bool, Failure> {
    let Some(path) = &c.json else { return Ok(true) };
    let text = serde_json::to_string_pretty(d).map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))? + "\n";
    if path.as_os_str() == "-" {
        out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?;
        Ok(false)
    } else {
        write_file(path, &text)?;
        Ok(true)
    }
}

fn print(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))
}

fn analyze(c: &Common, out: &mut dyn Write) -> Result<i32, Failure> {
    let (sys, hash) = load(c)?;
    let mode = Mode::from(c.mode);
    let zt = ZeroTest::new(c.probe_budget, c.seed);
    let a = analyze_system(&sys, mode, &zt)?;
    let d = AnalysisDocument::new(&sys, &a, mode, &zt, hash);
    if let Some(path) = &c.emit {
        write_file(path, &emit_dae(&sys))?;
    }
    if write_json(c, &d, out)? {
        print(out, &analysis_text(&d))?;
    }
    Ok(match a.classification() {
        None => EXIT_ILL_POSED,
        Some(Classification::GenericallyNonsingular) => EXIT_OK,
        Some(Classification::UnknownProbable) => EXIT_PROBABLE,
        Some(_) => EXIT_SINGULAR,
    })
}

pub fn analysis_text(d: &AnalysisDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "system {}: {} equations in {} (mode {})",
        d.system,
        d.equations.len(),
        d.variables.join(", "),
        d.mode
    );
    let sigma = if d.mode == "formal" { &d.sigma_formal } else { &d.sigma_true };
    let val = d.value.map_or("-inf".to_string(), |v| v.to_string());
    let _ = writeln!(s, "\nsignature matrix, val = {val}:");
    s += &render::sigma_table(sigma, d.offsets.as_ref(), &d.variables, &d.equations);
    for diff in &d.sigma_differences {
        let show = |v: Option<i64>| v.map_or("-inf".to_string(), |v| v.to_string());
        let _ = writeln!(
            s,
            "  formal and true differ at ({}, {}): formal {}, true {}",
            diff.row,
            diff.col,
            show(diff.formal),
            show(diff.true_)
        );
    }
    if !d.well_posed {
        s += "\nstructurally ill posed: no finite transversal\n";
        return s;
    }
    if let (Some(nu), Some(dof)) = (d.structural_index, d.dof) {
        let _ = writeln!(s, "\nstructural index {nu}, degrees of freedom {dof}");
    }
    if let Some(rows) = &d.solution_scheme {
        s += "\nsolution scheme:\n";
        s += &render::scheme_table(rows);
    }
    if let Some(j) = &d.jacobian {
        s += "\nSystem Jacobian:\n";
        s += &render::jacobian_table(j);
        if !j.shaded.is_empty() {
            let cells: Vec<String> = j.shaded.iter().map(|[i, c]| format!("({i}, {c})")).collect();
            let _ = writeln!(s, "  structurally forced zeros at {}", cells.join(", "));
        }
        if let Some(det) = &j.det {
            let _ = writeln!(s, "  det = {det}");
        }
    }
    if let Some(c) = &d.classification {
        let conf = if d.confidence.verified { "proven" } else { "probable" };
        let _ = writeln!(s, "\nclassification: {c} ({conf})");
    }
    if let Some(q) = d.quasilinear {
        let _ = writeln!(s, "quasilinear: {}", if q { "yes" } else { "no" });
    }
    s
}

fn fix(f: &FixArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let c = &f.common;
    let (sys, hash) = load(c)?;
    let mode = Mode::from(c.mode);
    let opts = FixOptions {
        mode,
        zero_test: ZeroTest::new(c.probe_budget, c.seed),
        max_steps: f.max_steps,
        substitution: f.substitution.into(),
        self_check: true,
    };
    let r = fix_dae(&sys, &opts)?;
    let d = FixDocument::new(&sys, &r, mode, f.substitution.name(), hash);
    if let Some(path) = &c.emit {
        write_file(path, &d.output)?;
    }
    if write_json(c, &d, out)? {
        print(out, &fix_text(&d))?;
    }
    Ok(match r.status {
        Status::Success if r.verified => EXIT_OK,
        Status::Success => EXIT_PROBABLE,
        Status::IllPosed => EXIT_ILL_POSED,
        Status::NoMethodApplies | Status::IterationCap => EXIT_SINGULAR,
    })
}

pub fn fix_text(d: &FixDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "system {}: val = {}, {}",
        d.system,
        show_val(d.initial.sigma.value),
        d.initial.classification.as_deref().unwrap_or("ill posed")
    );
    for step in &d.steps {
        s += &step_text(step);
    }
    let v = if d.verified { "verified" } else { "unverified" };
    let _ = writeln!(s, "\nstatus: {} ({v})", d.status);
    if let Some(msg) = &d.diagnostic {
        let _ = writeln!(s, "  {msg}");
    }
    s += "\nconverted system:\n";
    s += &d.output;
    s
}

fn show_val(v: Option<i64>) -> String {
    v.map_or("-inf".to_string(), |v| v.to_string())
}

pub fn step_text(d: &StepDoc) -> String {
    let mut s = String::new();
    let (target, symbol) = if d.method == "LC" {
        (&d.before.equations[d.pivot - 1], "u")
    } else {
        (&d.before.variables[d.pivot - 1], "v")
    };
    let _ = writeln!(
        s,
        "\nstep {}: {} on {target} (l = {}), {symbol} = [{}], {}",
        d.index,
        d.method,
        d.pivot,
        d.vector.join(", "),
        d.grade
    );
    if let Some(lc) = &d.lc {
        let _ = writeln!(
            s,
            "  LC analysis: I = {}, c_under = {}, L = {}, L_hat = {}",
            render::set(&lc.i_set),
            lc.c_under,
            render::set(&lc.l_set),
            render::set(&lc.l_hat)
        );
    }
    if let Some(es) = &d.es {
        let _ = writeln!(
            s,
            "  ES analysis: J = {}, s = {}, I = {}, c_over = {}, J_hat = {}",
            render::set(&es.j_set),
            es.s,
            render::set(&es.i_set),
            es.c_over,
            render::set(&es.j_hat)
        );
    }
    let _ = writeln!(
        s,
        "  val {} -> {}",
        show_val(d.before.sigma.value),
        show_val(d.after.sigma.value)
    );
    s += &render::sigma_table(&d.after.sigma, d.after.offsets.as_ref(), &d.after.variables, &d.after.equations);
    if let Some(det) = &d.after.det {
        let _ = writeln!(s, "  det = {det}");
    }
    let _ = writeln!(
        s,
        "  classification: {}",
        d.after.classification.as_deref().unwrap_or("ill posed")
    );
    let checks = [
        ("recovery", d.checks.recovery),
        ("residual", d.checks.residual),
        ("block structure", d.checks.block_structure),
    ];
    let ran: Vec<String> = checks
        .iter()
        .filter_map(|(name, r)| r.map(|ok| format!("{name} {}", if ok { "ok" } else { "FAILED" })))
        .collect();
    if !ran.is_empty() {
        let _ = writeln!(s, "  checks: {}", ran.join(", "));
    }
    s
}

/// JSON array of strings or numbers, else a bracketed expression list.
pub fn parse_vector(sys: &DaeSystem, text: &str) -> Result<Vec<Expr>, String> {
    if let Ok(items) = serde_json::from_str::<Vec<serde_json::Value>>(text) {
        return items
            .iter()
            .map(|v| match v {
                serde_json::Value::String(s) => parse_expr(sys, s).map_err(|e| e.to_string()),
                serde_json::Value::Number(n) => parse_expr(sys, &n.to_string()).map_err(|e| e.to_string()),
                other => Err(format!("vector entry {other} is neither a string nor a number")),
            })
            .collect();
    }
    parse_expr_list(sys, text).map_err(|e| e.to_string())
}

fn trace(t: &TraceArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let c = &t.common;
    let (sys, hash) = load(c)?;
    let mode = Mode::from(c.mode);
    let entries = parse_vector(&sys, &t.vector).map_err(|e| Failure::new(EXIT_ERROR, format!("--vector: {e}")))?;
    if t.pivot == 0 {
        return Err(Failure::new(EXIT_ERROR, "--pivot is 1-based"));
    }
    let opts = FixOptions {
        mode,
        zero_test: ZeroTest::new(c.probe_budget, c.seed),
        max_steps: None,
        substitution: t.substitution.into(),
        self_check: true,
    };
    let a = analyze_system(&sys, mode, &opts.zero_test)?;
    let Some(jac) = a.jacobian.as_ref() else {
        return Err(Failure::new(EXIT_ILL_POSED, "structurally ill posed: no finite transversal"));
    };
    let method = Method::from(t.method);
    let step = match trace_step(&sys, &opts, method, entries.clone(), t.pivot - 1) {
        Ok(step) => step,
        Err(ConvertError::Linalg(LinalgError::ResidualNonzero(i))) => {
            let side = if method == Method::Lc { Side::Cokernel } else { Side::Kernel };
            let v = NullVector::new(side, entries, &opts.zero_test);
            let r = &residual(&jac.entries, &v)[i];
            let product = if side == Side::Cokernel { "J^T u" } else { "J v" };
            return Err(Failure::new(
                EXIT_ERROR,
                format!(
                    "not a {} vector: entry {} of {product} is {}",
                    if side == Side::Cokernel { "cokernel" } else { "kernel" },
                    i + 1,
                    r.display(&sys.vars)
                ),
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let d = TraceDocument {
        input_sha256: hash,
        system: sys.name.clone(),
        mode: doc::mode_name(mode).to_string(),
        substitution: t.substitution.name().to_string(),
        step: StepDoc::new(1, &sys, &step),
        output: emit_dae(&step.system),
    };
    if let Some(path) = &c.emit {
        write_file(path, &d.output)?;
    }
    if write_json(c, &d, out)? {
        let mut s = step_text(&d.step);
        s += "\nconverted system:\n";
        s += &d.output;
        print(out, &s)?;
    }
    Ok(if step.verified { EXIT_OK } else { EXIT_PROBABLE })
}
