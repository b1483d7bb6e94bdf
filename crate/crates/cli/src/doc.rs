//! Machine-readable reports. Indices are 1-based; `-inf` signature entries
//! are `null`.

use daefix::convert::{ConversionReport, EsAnalysis, LcAnalysis, Snapshot, Step, SystemAnalysis};
use daefix::dae::{emit_dae, Mode};
use daefix::jacobian::SystemJacobian;
use daefix::structural::{
    compare_signatures, quasilinearity, signature_matrix, solution_scheme, structural_index, OffsetPair,
    Quasilinearity, SignatureMatrix, SolutionScheme,
};
use daefix::{DaeSystem, ZeroTest};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Formal => "formal",
        Mode::True => "true",
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

/// `x`, `x'`, `x''`, then `x^(k)`.
pub fn derivative(name: &str, order: i64) -> String {
    match order {
        0 => name.to_string(),
        1 => format!("{name}'"),
        2 => format!("{name}''"),
        k => format!("{name}^({k})"),
    }
}

/// `name^(k)` or `name^(k+offset)` for the generic stage.
fn symbolic_derivative(name: &str, offset: i64) -> String {
    if offset == 0 {
        format!("{name}^(k)")
    } else {
        format!("{name}^(k+{offset})")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaDoc {
    pub entries: Vec<Vec<Option<i64>>>,
    pub hvt: Vec<[usize; 2]>,
    pub value: Option<i64>,
}

impl SigmaDoc {
    pub fn new(s: &SignatureMatrix) -> Self {
        SigmaDoc {
            entries: s.entries.clone(),
            hvt: s.hvt.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            value: s.value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetsDoc {
    pub c: Vec<i64>,
    pub d: Vec<i64>,
}

impl OffsetsDoc {
    pub fn new(p: &OffsetPair) -> Self {
        OffsetsDoc {
            c: p.c.clone(),
            d: p.d.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaDiffDoc {
    pub row: usize,
    pub col: usize,
    pub formal: Option<i64>,
    #[serde(rename = "true")]
    pub true_: Option<i64>,
}

/// One row of the solution-scheme table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageDoc {
    /// `"-2"`, `"-1"`, ... or `">=0"` for the generic stage.
    pub k: String,
    pub solve: Vec<String>,
    pub unknowns: Vec<String>,
    pub using: Vec<String>,
}

pub fn scheme_rows(sys: &DaeSystem, scheme: &SolutionScheme, pair: &OffsetPair) -> Vec<StageDoc> {
    let eq = |i: usize| sys.equations[i].name.as_str();
    let var = |j: usize| sys.vars[j].as_str();
    let mut rows: Vec<StageDoc> = scheme
        .stages
        .iter()
        .map(|s| StageDoc {
            k: s.k.to_string(),
            solve: s.equations.iter().map(|&(i, o)| derivative(eq(i), o)).collect(),
            unknowns: s.unknowns.iter().map(|&(j, o)| derivative(var(j), o)).collect(),
            using: s
                .knowns
                .iter()
                .map(|&(j, m)| if m == 0 { var(j).to_string() } else { format!("{}^(<={m})", var(j)) })
                .collect(),
        })
        .collect();
    let g = &scheme.generic;
    rows.push(StageDoc {
        k: ">=0".to_string(),
        solve: g.equations.iter().map(|&(i, _)| symbolic_derivative(eq(i), pair.c[i])).collect(),
        unknowns: g.unknowns.iter().map(|&(j, _)| symbolic_derivative(var(j), pair.d[j])).collect(),
        using: (0..sys.n())
            .map(|j| match pair.d[j] {
                0 => format!("{}^(<k)", var(j)),
                d => format!("{}^(<k+{d})", var(j)),
            })
            .collect(),
    });
    rows
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianDoc {
    /// Row `i` differentiated `c_i` times against `x_j^(d_j)`.
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<String>>,
    /// Positions with `d_j - c_i > sigma_ij`, forced to zero.
    pub shaded: Vec<[usize; 2]>,
    pub det: Option<String>,
}

impl JacobianDoc {
    pub fn new(sys: &DaeSystem, j: &SystemJacobian, det: Option<String>) -> Self {
        JacobianDoc {
            rows: (0..j.n).map(|i| derivative(&sys.equations[i].name, j.c[i])).collect(),
            cols: (0..j.n).map(|c| derivative(&sys.vars[c], j.d[c])).collect(),
            entries: j
                .entries
                .iter()
                .map(|r| r.iter().map(|e| e.display(&sys.vars).to_string()).collect())
                .collect(),
            shaded: j.shaded.iter().map(|&(i, c)| [i + 1, c + 1]).collect(),
            det,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceDoc {
    /// No verdict in the analysis rests on random probing alone.
    pub verified: bool,
    pub det_verdict: Option<String>,
    /// Jacobian entries only probably zero.
    pub probable_entries: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub input_sha256: String,
    pub system: String,
    pub variables: Vec<String>,
    pub equations: Vec<String>,
    pub mode: String,
    pub sigma_formal: SigmaDoc,
    pub sigma_true: SigmaDoc,
    pub sigma_differences: Vec<SigmaDiffDoc>,
    pub well_posed: bool,
    pub offsets: Option<OffsetsDoc>,
    pub value: Option<i64>,
    pub structural_index: Option<i64>,
    pub dof: Option<i64>,
    pub solution_scheme: Option<Vec<StageDoc>>,
    pub jacobian: Option<JacobianDoc>,
    pub classification: Option<String>,
    pub quasilinear: Option<bool>,
    pub confidence: ConfidenceDoc,
}

impl AnalysisDocument {
    pub fn new(sys: &DaeSystem, a: &SystemAnalysis, mode: Mode, zt: &ZeroTest, hash: String) -> Self {
        let formal = signature_matrix(sys, Mode::Formal);
        let true_ = signature_matrix(sys, Mode::True);
        let cmp = compare_signatures(&formal, &true_);
        let det = a.verdict.as_ref().and_then(|v| v.det.as_ref()).map(|d| d.display(&sys.vars).to_string());
        let probable_entries = a
            .jacobian
            .as_ref()
            .map(|j| {
                let mut out = Vec::new();
                for (i, row) in j.verdicts.iter().enumerate() {
                    for (c, v) in row.iter().enumerate() {
                        if v.is_probable() {
                            out.push([i + 1, c + 1]);
                        }
                    }
                }
                out
            })
            .unwrap_or_default();
        AnalysisDocument {
            input_sha256: hash,
            system: sys.name.clone(),
            variables: sys.vars.clone(),
            equations: sys.equations.iter().map(|e| e.name.clone()).collect(),
            mode: mode_name(mode).to_string(),
            sigma_formal: SigmaDoc::new(&formal),
            sigma_true: SigmaDoc::new(&true_),
            sigma_differences: cmp
                .differing
                .iter()
                .map(|&(i, j, f, t)| SigmaDiffDoc {
                    row: i + 1,
                    col: j + 1,
                    formal: f,
                    true_: t,
                })
                .collect(),
            well_posed: a.pair.is_some(),
            offsets: a.pair.as_ref().map(OffsetsDoc::new),
            value: a.value(),
            structural_index: a.pair.as_ref().map(structural_index),
            dof: a.value(),
            solution_scheme: a.pair.as_ref().map(|p| scheme_rows(sys, &solution_scheme(p), p)),
            jacobian: a.jacobian.as_ref().map(|j| JacobianDoc::new(sys, j, det)),
            classification: a.classification().map(|c| format!("{c:?}")),
            quasilinear: a
                .pair
                .as_ref()
                .map(|p| quasilinearity(sys, p, mode, zt) == Quasilinearity::JointlyLinear),
            confidence: ConfidenceDoc {
                verified: !a.is_probable(),
                det_verdict: a
                    .verdict
                    .as_ref()
                    .and_then(|v| v.det_verdict)
                    .map(|v| format!("{v:?}")),
                probable_entries,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDoc {
    pub variables: Vec<String>,
    pub equations: Vec<String>,
    pub sigma: SigmaDoc,
    pub offsets: Option<OffsetsDoc>,
    pub classification: Option<String>,
    pub det: Option<String>,
}

impl SnapshotDoc {
    pub fn new(sys: &DaeSystem, s: &Snapshot) -> Self {
        SnapshotDoc {
            variables: sys.vars.clone(),
            equations: sys.equations.iter().map(|e| e.name.clone()).collect(),
            sigma: SigmaDoc::new(&s.sigma),
            offsets: s.pair.as_ref().map(OffsetsDoc::new),
            classification: s.classification.map(|c| format!("{c:?}")),
            det: s.det.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcDoc {
    pub i_set: Vec<usize>,
    pub c_under: i64,
    pub l_set: Vec<usize>,
    pub l_hat: Vec<usize>,
    pub condition_ok: bool,
}

impl LcDoc {
    pub fn new(a: &LcAnalysis) -> Self {
        LcDoc {
            i_set: one_based(&a.i_set),
            c_under: a.c_under,
            l_set: one_based(&a.l_set),
            l_hat: one_based(&a.l_hat),
            condition_ok: a.condition_ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsDoc {
    pub j_set: Vec<usize>,
    pub s: usize,
    pub i_set: Vec<usize>,
    pub c_over: i64,
    pub j_hat: Vec<usize>,
    pub condition_ok: bool,
}

impl EsDoc {
    pub fn new(a: &EsAnalysis) -> Self {
        EsDoc {
            j_set: one_based(&a.j_set),
            s: a.s,
            i_set: one_based(&a.i_set),
            c_over: a.c_over,
            j_hat: one_based(&a.j_hat),
            condition_ok: a.condition_ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChecksDoc {
    pub recovery: Option<bool>,
    pub residual: Option<bool>,
    pub block_structure: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDoc {
    pub index: usize,
    pub method: String,
    pub pivot: usize,
    pub vector: Vec<String>,
    pub grade: String,
    pub lc: Option<LcDoc>,
    pub es: Option<EsDoc>,
    pub before: SnapshotDoc,
    pub after: SnapshotDoc,
    pub checks: ChecksDoc,
    pub verified: bool,
    /// The system after this step, in the text format.
    pub system: String,
}

impl StepDoc {
    /// `prev` is the system the step was applied to.
    pub fn new(index: usize, prev: &DaeSystem, step: &Step) -> Self {
        StepDoc {
            index,
            method: step.method.label().to_string(),
            pivot: step.l + 1,
            vector: step.vector.entries.iter().map(|e| e.display(&prev.vars).to_string()).collect(),
            grade: format!("{:?}", step.grade),
            lc: step.lc.as_ref().map(LcDoc::new),
            es: step.es.as_ref().map(EsDoc::new),
            before: SnapshotDoc::new(prev, &step.before),
            after: SnapshotDoc::new(&step.system, &step.after),
            checks: ChecksDoc {
                recovery: step.checks.recovery,
                residual: step.checks.residual,
                block_structure: step.checks.block_structure,
            },
            verified: step.verified,
            system: emit_dae(&step.system),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixDocument {
    pub input_sha256: String,
    pub system: String,
    pub mode: String,
    pub substitution: String,
    pub status: String,
    pub diagnostic: Option<String>,
    pub verified: bool,
    pub initial: SnapshotDoc,
    #[serde(rename = "final")]
    pub final_: SnapshotDoc,
    pub steps: Vec<StepDoc>,
    pub output: String,
}

impl FixDocument {
    pub fn new(sys: &DaeSystem, r: &ConversionReport, mode: Mode, substitution: &str, hash: String) -> Self {
        let mut prev = sys;
        let mut steps = Vec::new();
        for (k, s) in r.steps.iter().enumerate() {
            steps.push(StepDoc::new(k + 1, prev, s));
            prev = &s.system;
        }
        FixDocument {
            input_sha256: hash,
            system: sys.name.clone(),
            mode: mode_name(mode).to_string(),
            substitution: substitution.to_string(),
            status: format!("{:?}", r.status),
            diagnostic: r.diagnostic.clone(),
            verified: r.verified,
            initial: SnapshotDoc::new(sys, &r.initial),
            final_: SnapshotDoc::new(&r.system, &r.last),
            steps,
            output: emit_dae(&r.system),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub input_sha256: String,
    pub system: String,
    pub mode: String,
    pub substitution: String,
    pub step: StepDoc,
    pub output: String,
}
