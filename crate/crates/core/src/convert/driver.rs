use serde::Serialize;

use super::{
    check_es_block_structure, es_analyze, es_apply, es_residual_check, lc_analyze, lc_apply,
    lc_recover_check, lc_residual_check, select_method, ConvertError, Decision, EsAnalysis,
    EsSubstitution, Grade, LcAnalysis, Method,
};
use crate::dae::{DaeSystem, Mode};
use crate::jacobian::{classify, system_jacobian, Classification, JacobianVerdict, SystemJacobian};
use crate::linalg::{normalize_candidates, nullspace_basis, verify, NullVector, Side};
use crate::structural::{canonical_offsets, signature_matrix, OffsetPair, SignatureMatrix, StructuralError};
use crate::{Expr, ZeroTest};

#[derive(Clone, Debug)]
pub struct FixOptions {
    pub mode: Mode,
    pub zero_test: ZeroTest,
    /// Defaults to the initial signature value plus one.
    pub max_steps: Option<usize>,
    pub substitution: EsSubstitution,
    /// Run the recovery, residual and block-structure checks on every step.
    pub self_check: bool,
}

impl Default for FixOptions {
    fn default() -> Self {
        FixOptions {
            mode: Mode::True,
            zero_test: ZeroTest::default(),
            max_steps: None,
            substitution: EsSubstitution::Literal,
            self_check: true,
        }
    }
}

/// Signature matrix, offsets and System Jacobian of one system. Offsets and
/// Jacobian are absent for an ill-posed system.
#[derive(Clone, Debug)]
pub struct SystemAnalysis {
    pub sigma: SignatureMatrix,
    pub pair: Option<OffsetPair>,
    pub jacobian: Option<SystemJacobian>,
    pub verdict: Option<JacobianVerdict>,
}

impl SystemAnalysis {
    pub fn value(&self) -> Option<i64> {
        self.sigma.value
    }

    pub fn classification(&self) -> Option<Classification> {
        self.verdict.as_ref().map(|v| v.classification)
    }

    /// Some verdict behind the classification is only probable.
    pub fn is_probable(&self) -> bool {
        let det = self.verdict.as_ref().is_some_and(|v| v.probable);
        let entries = self
            .jacobian
            .as_ref()
            .is_some_and(|j| j.verdicts.iter().flatten().any(|v| v.is_probable()));
        det || entries
    }
}

pub fn analyze_system(
    sys: &DaeSystem,
    mode: Mode,
    zt: &ZeroTest,
) -> Result<SystemAnalysis, ConvertError> {
    let sigma = signature_matrix(sys, mode);
    let pair = match canonical_offsets(&sigma) {
        Ok(p) => p,
        Err(StructuralError::NotSwp) => {
            return Ok(SystemAnalysis {
                sigma,
                pair: None,
                jacobian: None,
                verdict: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let jacobian = system_jacobian(sys, &sigma, &pair, mode, zt);
    let verdict = classify(&jacobian, zt);
    Ok(SystemAnalysis {
        sigma,
        pair: Some(pair),
        jacobian: Some(jacobian),
        verdict: Some(verdict),
    })
}

/// Serializable summary of a [`SystemAnalysis`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub sigma: SignatureMatrix,
    pub value: Option<i64>,
    pub pair: Option<OffsetPair>,
    pub classification: Option<Classification>,
    pub det: Option<String>,
}

impl Snapshot {
    pub fn new(sys: &DaeSystem, a: &SystemAnalysis) -> Snapshot {
        Snapshot {
            sigma: a.sigma.clone(),
            value: a.value(),
            pair: a.pair.clone(),
            classification: a.classification(),
            det: a
                .verdict
                .as_ref()
                .and_then(|v| v.det.as_ref())
                .map(|d| d.display(&sys.vars).to_string()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StepChecks {
    pub recovery: Option<bool>,
    pub residual: Option<bool>,
    pub block_structure: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct Step {
    pub method: Method,
    pub l: usize,
    pub vector: NullVector,
    pub lc: Option<LcAnalysis>,
    pub es: Option<EsAnalysis>,
    pub grade: Grade,
    pub before: Snapshot,
    pub after: Snapshot,
    pub checks: StepChecks,
    /// No verdict in this step is only probable.
    pub verified: bool,
    /// System after the step.
    pub system: DaeSystem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Success,
    /// The signature matrix has no finite transversal.
    IllPosed,
    NoMethodApplies,
    IterationCap,
}

#[derive(Clone, Debug)]
pub struct ConversionReport {
    pub steps: Vec<Step>,
    pub status: Status,
    pub initial: Snapshot,
    pub last: Snapshot,
    /// Final system.
    pub system: DaeSystem,
    pub verified: bool,
    pub diagnostic: Option<String>,
}

/// Null-vector candidates for one side, basis vectors in column order and
/// each followed by its rescalings.
fn candidates(j: &SystemJacobian, side: Side, zt: &ZeroTest) -> Result<Vec<NullVector>, ConvertError> {
    let mut out = Vec::new();
    for v in nullspace_basis(&j.entries, side, zt)? {
        out.extend(normalize_candidates(&j.entries, &v, zt));
    }
    Ok(out)
}

/// First analysis with a constant pivot, else the first applicable one.
fn best<'a, T>(all: &'a [T], hat: impl Fn(&T) -> bool, any: impl Fn(&T) -> bool) -> Option<&'a T> {
    all.iter().find(|a| hat(a)).or_else(|| all.iter().find(|a| any(a)))
}

/// One conversion step chosen by the method-selection rule over all candidates.
pub(crate) struct Planned {
    pub decision: Decision,
    pub lc: Option<LcAnalysis>,
    pub es: Option<EsAnalysis>,
}

pub(crate) fn plan_step(
    sigma: &SignatureMatrix,
    pair: &OffsetPair,
    j: &SystemJacobian,
    zt: &ZeroTest,
) -> Result<Planned, ConvertError> {
    let lcs: Vec<LcAnalysis> = candidates(j, Side::Cokernel, zt)?
        .iter()
        .map(|u| lc_analyze(pair, u))
        .collect();
    let ess: Vec<EsAnalysis> = candidates(j, Side::Kernel, zt)?
        .iter()
        .map(|v| es_analyze(sigma, pair, v))
        .collect();
    let lc = best(&lcs, |a| !a.l_hat.is_empty(), |a| !a.l_set.is_empty()).cloned();
    let es = best(&ess, |a| !a.j_hat.is_empty(), |a| !a.j_set.is_empty()).cloned();
    let empty: Vec<usize> = Vec::new();
    let decision = select_method(
        lc.as_ref().map_or(&empty, |a| &a.l_hat),
        lc.as_ref().map_or(&empty, |a| &a.l_set),
        es.as_ref().map_or(&empty, |a| &a.j_hat),
        es.as_ref().map_or(&empty, |a| &a.j_set),
    );
    Ok(Planned { decision, lc, es })
}

/// Converts until the System Jacobian is generically nonsingular, the
/// system becomes ill posed, or no method applies.
pub fn fix_dae(sys: &DaeSystem, opts: &FixOptions) -> Result<ConversionReport, ConvertError> {
    let zt = &opts.zero_test;
    let mode = opts.mode;
    let mut cur = sys.clone();
    let mut a = analyze_system(&cur, mode, zt)?;
    let initial = Snapshot::new(&cur, &a);
    let cap = opts
        .max_steps
        .unwrap_or_else(|| a.value().map_or(0, |v| v.max(0) as usize + 1));
    let mut steps: Vec<Step> = Vec::new();
    let mut verified = !a.is_probable();
    let mut diagnostic = None;
    let status = loop {
        let (Some(val), Some(pair), Some(jac), Some(verdict)) =
            (a.value(), a.pair.clone(), a.jacobian.clone(), a.verdict.clone())
        else {
            diagnostic = Some(if steps.is_empty() {
                "signature matrix has no finite transversal".to_string()
            } else {
                format!("step {} produced a structurally ill-posed system", steps.len())
            });
            break Status::IllPosed;
        };
        if !verdict.classification.is_singular() {
            break Status::Success;
        }
        if steps.len() >= cap {
            diagnostic = Some(format!("stopped after {cap} steps"));
            break Status::IterationCap;
        }
        let plan = plan_step(&a.sigma, &pair, &jac, zt)?;
        let chosen = match plan.decision {
            Decision::Neither => {
                diagnostic = Some(format!(
                    "step {}: no null vector satisfies the LC or ES conditions",
                    steps.len() + 1
                ));
                break Status::NoMethodApplies;
            }
            Decision::UseLc(l) => Chosen::Lc(plan.lc.as_ref().expect("LC chosen from an analysis"), l),
            Decision::UseEs(l) => Chosen::Es(plan.es.as_ref().expect("ES chosen from an analysis"), l),
        };
        let (mut step, a_next) = run_step(&cur, &a, &pair, val, chosen, opts, steps.len())?;
        step.lc = plan.lc;
        step.es = plan.es;
        verified &= step.verified;
        let next = step.system.clone();
        steps.push(step);
        cur = next;
        a = a_next;
    };
    Ok(ConversionReport {
        last: Snapshot::new(&cur, &a),
        steps,
        status,
        initial,
        system: cur,
        verified,
        diagnostic,
    })
}

fn grade_of(v: &NullVector, l: usize) -> Grade {
    if v.is_nonzero_constant(l) {
        Grade::Global
    } else {
        Grade::Local
    }
}

/// The method and pivot for one step.
#[derive(Clone, Copy)]
enum Chosen<'a> {
    Lc(&'a LcAnalysis, usize),
    Es(&'a EsAnalysis, usize),
}

/// Applies one conversion to `cur` (analysed as `a`, value `val`), runs the
/// self-checks, and asserts the strict decrease of the value. Returns the
/// step and the analysis of the converted system.
fn run_step(
    cur: &DaeSystem,
    a: &SystemAnalysis,
    pair: &OffsetPair,
    val: i64,
    chosen: Chosen<'_>,
    opts: &FixOptions,
    index: usize,
) -> Result<(Step, SystemAnalysis), ConvertError> {
    let zt = &opts.zero_test;
    let mode = opts.mode;
    let seed = zt.seed.wrapping_add(index as u64);
    let mut checks = StepChecks::default();
    let (method, l, vector, next, lc, es) = match chosen {
        Chosen::Lc(an, l) => {
            let next = lc_apply(cur, pair, an, l, mode)?;
            if opts.self_check {
                let rec = lc_recover_check(cur, &next, pair, an, l, zt);
                let res = lc_residual_check(cur, &next, pair, an, l, seed);
                checks.recovery = Some(rec);
                checks.residual = Some(res);
                if !(rec && res) {
                    return Err(ConvertError::SelfCheck(format!(
                        "LC step {} failed recovery or residual check",
                        index + 1
                    )));
                }
            }
            (Method::Lc, l, an.u.clone(), next, Some(an.clone()), None)
        }
        Chosen::Es(an, l) => {
            let applied = es_apply(cur, pair, an, l, opts.substitution, mode)?;
            if opts.self_check {
                let block = check_es_block_structure(pair, an, &applied, mode);
                let res = es_residual_check(cur, &applied, seed);
                checks.block_structure = Some(block.is_ok());
                checks.residual = Some(res);
                if let Err(msg) = block {
                    return Err(ConvertError::SelfCheck(msg));
                }
                if !res {
                    return Err(ConvertError::SelfCheck(format!(
                        "ES step {} failed the residual check",
                        index + 1
                    )));
                }
            }
            (Method::Es, l, an.v.clone(), applied.system, None, Some(an.clone()))
        }
    };
    let a_next = analyze_system(&next, mode, zt)?;
    if a_next.value().is_some_and(|v| v >= val) {
        return Err(ConvertError::NoDecrease {
            before: val,
            after: a_next.value(),
        });
    }
    let verified = !vector.is_probable() && !a.is_probable() && !a_next.is_probable();
    let step = Step {
        method,
        l,
        grade: grade_of(&vector, l),
        vector,
        lc,
        es,
        before: Snapshot::new(cur, a),
        after: Snapshot::new(&next, &a_next),
        checks,
        verified,
        system: next,
    };
    Ok((step, a_next))
}

/// Applies exactly one step with a caller-supplied null vector and pivot.
/// The vector must verify as a cokernel (LC) or kernel (ES) vector of the
/// System Jacobian.
pub fn trace_step(
    sys: &DaeSystem,
    opts: &FixOptions,
    method: Method,
    entries: Vec<Expr>,
    l: usize,
) -> Result<Step, ConvertError> {
    let zt = &opts.zero_test;
    let a = analyze_system(sys, opts.mode, zt)?;
    let (Some(val), Some(pair), Some(jac)) = (a.value(), a.pair.clone(), a.jacobian.as_ref()) else {
        return Err(ConvertError::PreconditionViolated(
            "the system is structurally ill posed".into(),
        ));
    };
    if entries.len() != sys.n() {
        return Err(ConvertError::PreconditionViolated(format!(
            "vector has {} entries, the system has {}",
            entries.len(),
            sys.n()
        )));
    }
    if l >= sys.n() {
        return Err(ConvertError::PreconditionViolated(format!("pivot {} out of range", l + 1)));
    }
    let side = match method {
        Method::Lc => Side::Cokernel,
        Method::Es => Side::Kernel,
    };
    let v = NullVector::new(side, entries, zt);
    verify(&jac.entries, &v, zt)?;
    match method {
        Method::Lc => {
            let an = lc_analyze(&pair, &v);
            run_step(sys, &a, &pair, val, Chosen::Lc(&an, l), opts, 0).map(|(s, _)| s)
        }
        Method::Es => {
            let an = es_analyze(&a.sigma, &pair, &v);
            run_step(sys, &a, &pair, val, Chosen::Es(&an, l), opts, 0).map(|(s, _)| s)
        }
    }
}
