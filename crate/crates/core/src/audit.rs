//! Table audit and combined singularity verdicts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::{continue_branch, StepPolicy};
use crate::error::{Error, Result};
use crate::params::{compute_hn, compute_k0, compute_pc, k0_printed, ProblemParams};
use crate::precision::Precision;
use crate::radial::RadialGrid;
use crate::report::{CertificateReport, Verdict};
use crate::stability::{certify_stability_at, StabilitySpec, WeightKind};
use crate::subsolution::{build_omega, certify_subsolution_at, sup_h_printed, SubsolutionSpec};

/// One row of the published table: `λ′` and `β` in units of `K0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub n: u32,
    pub lambda_mult: f64,
    pub beta_mult: f64,
}

/// Rows `n = 13 … 31`; the shared `19–30` row is expanded to every `n` in it.
pub fn table1_entries() -> Vec<TableEntry> {
    (13..=31)
        .map(|n| {
            let (l, b) = match n {
                13 => (2.03, 2.15),
                14 => (2.34, 2.96),
                15 => (2.76, 3.12),
                16 => (3.13, 3.78),
                17 => (3.26, 3.60),
                18 => (3.5, 3.78),
                31 => (3.06, 4.05),
                _ => (4.6, 10.0),
            };
            TableEntry { n, lambda_mult: l, beta_mult: b }
        })
        .collect()
}

/// `{1.05·p_c(n), 50, 100, 500, 1000}` in increasing order.
pub fn default_p_grid(n: u32) -> Result<Vec<f64>> {
    let pc = compute_pc(n)?.ok_or_else(|| Error::Domain(format!("p_c(n) undefined for n = {n}")))?;
    let mut g = vec![1.05 * pc, 50.0, 100.0, 500.0, 1000.0];
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub n: u32,
    pub m: f64,
    pub p: f64,
    pub lambda_mult: f64,
    pub beta_mult: f64,
    pub sub_verdict: Verdict,
    pub sub_margin: f64,
    /// Witness `x = r^{m+α}` of the sub-solution margin.
    pub sub_witness: f64,
    pub sub_precision: Precision,
    /// Stability with the improved weight.
    pub stab_verdict: Verdict,
    pub stab_margin: f64,
    pub stab_witness: f64,
    pub stab_precision: Precision,
    /// Stability with the classical weight, reported alongside.
    pub classical_stab_verdict: Verdict,
    pub classical_stab_margin: f64,
    pub classical_stab_witness: f64,
    pub lemma34_bundle_valid: bool,
    /// Numerical failure message when a certificate could not be run.
    pub failure: Option<String>,
}

/// Artifact of a CLI run; enough to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    /// Explicit `p` values; empty means the per-row default grid.
    pub p_grid: Vec<f64>,
    pub m: f64,
    pub n_values: Vec<u32>,
    pub nodes: usize,
    pub precision: Precision,
    pub seed: u64,
    pub trials: usize,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: "table1".into(),
            p_grid: Vec::new(),
            m: 3.5,
            n_values: (13..=31).collect(),
            nodes: 400,
            precision: Precision::Double,
            seed: 0,
            trials: 200,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `β` and `λ′` satisfy the ordering: `β > λ′`, or the equality case
/// `β = λ′ = Hn/(p K0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ordering {
    pub strict: bool,
    pub equality_case: bool,
    pub satisfied: bool,
}

pub const EQUALITY_TOL: f64 = 1e-12;

pub fn ordering(params: &ProblemParams, lambda_mult: f64, beta_mult: f64) -> Result<Ordering> {
    let strict = beta_mult > lambda_mult;
    let target = compute_hn(params.n)? / (params.p * compute_k0(params.n, params.p)?);
    let close = |a: f64| (a - target).abs() <= EQUALITY_TOL * target.abs().max(1.0);
    let equality_case = close(lambda_mult) && close(beta_mult);
    Ok(Ordering { strict, equality_case, satisfied: strict || equality_case })
}

pub fn bundle_valid(sub: Verdict, stab: Verdict, ord: &Ordering) -> bool {
    sub == Verdict::Certified && stab == Verdict::Certified && ord.satisfied
}

fn audit_one(e: &TableEntry, p: f64, m: f64, precision: Precision) -> Result<AuditRow> {
    let params = ProblemParams::new(e.n, p, m)?;
    let sub_spec = SubsolutionSpec::new(params, e.lambda_mult)?;
    let omega = build_omega(&sub_spec);
    let ord = ordering(&params, e.lambda_mult, e.beta_mult)?;
    let run = || -> Result<(CertificateReport, CertificateReport, CertificateReport)> {
        let sub = certify_subsolution_at(&sub_spec, precision)?;
        let st = certify_stability_at(&StabilitySpec::new(params, e.beta_mult, WeightKind::Improved)?, &omega, precision)?;
        let cl = certify_stability_at(&StabilitySpec::new(params, e.beta_mult, WeightKind::Classical)?, &omega, precision)?;
        Ok((sub, st, cl))
    };
    Ok(match run() {
        Ok((sub, st, cl)) => AuditRow {
            n: e.n,
            m,
            p,
            lambda_mult: e.lambda_mult,
            beta_mult: e.beta_mult,
            lemma34_bundle_valid: bundle_valid(sub.verdict, st.verdict, &ord),
            sub_verdict: sub.verdict,
            sub_margin: sub.worst_margin,
            sub_witness: sub.worst_location,
            sub_precision: sub.precision,
            stab_verdict: st.verdict,
            stab_margin: st.worst_margin,
            stab_witness: st.worst_location,
            stab_precision: st.precision,
            classical_stab_verdict: cl.verdict,
            classical_stab_margin: cl.worst_margin,
            classical_stab_witness: cl.worst_location,
            failure: None,
        },
        Err(err) => AuditRow {
            n: e.n,
            m,
            p,
            lambda_mult: e.lambda_mult,
            beta_mult: e.beta_mult,
            sub_verdict: Verdict::Inconclusive,
            sub_margin: 0.0,
            sub_witness: 0.0,
            sub_precision: precision,
            stab_verdict: Verdict::Inconclusive,
            stab_margin: 0.0,
            stab_witness: 0.0,
            stab_precision: precision,
            classical_stab_verdict: Verdict::Inconclusive,
            classical_stab_margin: 0.0,
            classical_stab_witness: 0.0,
            lemma34_bundle_valid: false,
            failure: Some(err.to_string()),
        },
    })
}

/// Audits every table row at each `p`; `p_grid = None` uses [`default_p_grid`].
/// Rows come back ordered by `n`, then `p`.
pub fn audit_table1(p_grid: Option<&[f64]>, m: f64) -> Result<Vec<AuditRow>> {
    audit_table1_with(p_grid, m, &table1_entries(), Precision::Double)
}

pub fn audit_table1_with(
    p_grid: Option<&[f64]>,
    m: f64,
    entries: &[TableEntry],
    precision: Precision,
) -> Result<Vec<AuditRow>> {
    if let Some(g) = p_grid {
        if g.is_empty() {
            return Err(Error::InvalidInput("p grid is empty".into()));
        }
    }
    let mut jobs = Vec::new();
    for e in entries {
        let pc = compute_pc(e.n)?.ok_or_else(|| Error::Domain(format!("p_c(n) undefined for n = {}", e.n)))?;
        let ps = match p_grid {
            Some(g) => g.to_vec(),
            None => default_p_grid(e.n)?,
        };
        for p in ps {
            if !(p > pc) {
                return Err(Error::Domain(format!("p = {p} does not exceed p_c({}) = {pc}", e.n)));
            }
            jobs.push((*e, p));
        }
    }
    jobs.par_iter().map(|(e, p)| audit_one(e, *p, m, precision)).collect()
}

/// Exit code over audit rows.
pub fn audit_exit_code(rows: &[AuditRow]) -> i32 {
    Verdict::batch_exit_code(rows.iter().flat_map(|r| [r.sub_verdict, r.stab_verdict]))
}

/// `λ*` from a branch run compared with `λ′K0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchBound {
    pub nodes: usize,
    pub lambda_star: f64,
    pub bound: f64,
    /// `λ*/(λ′K0)`.
    pub ratio: f64,
    pub contradiction: bool,
}

/// Relative slack allowed on `λ* ≤ λ′K0`.
pub const BRANCH_BOUND_SLACK: f64 = 0.02;

/// The literal printed formulas, for comparison with the corrected ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperVariant {
    pub k0_printed: f64,
    pub k0_printed_over_k0: f64,
    pub sup_h_printed: f64,
    pub sup_h_printed_argmax: f64,
    pub subsolution_margin_printed: f64,
    pub subsolution_verdict_printed: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub n: u32,
    pub p: f64,
    pub m: f64,
    pub lambda_mult: f64,
    pub beta_mult: f64,
    pub weight: WeightKind,
    pub k0: f64,
    pub subsolution: CertificateReport,
    pub stability: CertificateReport,
    pub ordering: Ordering,
    pub bundle_valid: bool,
    pub branch: Option<BranchBound>,
    pub verdict: Verdict,
    pub paper_variant: PaperVariant,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub weight: WeightKind,
    pub precision: Precision,
    /// Run the branch with this many nodes and compare `λ*` with `λ′K0`.
    pub branch_nodes: Option<usize>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { weight: WeightKind::Improved, precision: Precision::Double, branch_nodes: None }
    }
}

pub fn singularity_report(
    params: &ProblemParams,
    lambda_mult: f64,
    beta_mult: f64,
    opts: &ReportOptions,
) -> Result<SingularityReport> {
    let sub_spec = SubsolutionSpec::new(*params, lambda_mult)?;
    let omega = build_omega(&sub_spec);
    let sub = certify_subsolution_at(&sub_spec, opts.precision)?;
    let stab = certify_stability_at(&StabilitySpec::new(*params, beta_mult, opts.weight)?, &omega, opts.precision)?;
    let ord = ordering(params, lambda_mult, beta_mult)?;
    let valid = bundle_valid(sub.verdict, stab.verdict, &ord);
    let k0 = compute_k0(params.n, params.p)?;
    let mut notes = Vec::new();

    let branch = match opts.branch_nodes {
        Some(nodes) => {
            let grid = RadialGrid::default_for(nodes, params.n)?;
            let res = continue_branch(params, &grid, &StepPolicy::default())?;
            let bound = lambda_mult * k0;
            let ratio = res.lambda_star_estimate / bound;
            let contradiction = valid && ratio > 1.0 + BRANCH_BOUND_SLACK;
            if contradiction {
                notes.push(format!("branch lambda* = {} exceeds lambda'·K0 = {bound}", res.lambda_star_estimate));
            }
            Some(BranchBound { nodes, lambda_star: res.lambda_star_estimate, bound, ratio, contradiction })
        }
        None => None,
    };

    let mut verdict = if !ord.satisfied {
        notes.push("ordering beta > lambda' fails".into());
        Verdict::Refuted
    } else {
        Verdict::combine([sub.verdict, stab.verdict])
    };
    if branch.as_ref().is_some_and(|b| b.contradiction) {
        verdict = Verdict::Refuted;
    }

    let printed = sup_h_printed(&sub_spec);
    let kp = k0_printed(params.n, params.p);
    let printed_margin = lambda_mult - printed.value;
    let paper_variant = PaperVariant {
        k0_printed: kp,
        k0_printed_over_k0: kp / k0,
        sup_h_printed: printed.value,
        sup_h_printed_argmax: printed.argmax,
        subsolution_margin_printed: printed_margin,
        subsolution_verdict_printed: crate::subsolution::classify(printed_margin, printed.error),
    };
    Ok(SingularityReport {
        n: params.n,
        p: params.p,
        m: params.m,
        lambda_mult,
        beta_mult,
        weight: opts.weight,
        k0,
        subsolution: sub,
        stability: stab,
        ordering: ord,
        bundle_valid: valid,
        branch,
        verdict,
        paper_variant,
        notes,
    })
}
