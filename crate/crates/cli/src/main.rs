use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use extremal_core::audit::{audit_exit_code, audit_table1_with, singularity_report, table1_entries, AuditRow, ReportOptions, RunConfig};
use extremal_core::branch::{check_upper_bound, continue_branch, lambda1, StepPolicy};
use extremal_core::radial::RadialGrid;
use extremal_core::report::to_canonical_json;
use extremal_core::stability::{certify_stability_at, sample_hardy_rellich, StabilitySpec, WeightFunction, WeightKind};
use extremal_core::subsolution::{build_omega, certify_subsolution_at, SubsolutionSpec};
use extremal_core::{CertificateReport, DerivedConstants, Error, Precision, ProblemParams, Verdict};

#[derive(Parser)]
#[command(name = "extremal", version, about = "Certificates and continuation for Δ²u = λ(1+u)^p on the unit ball")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Minimum working precision: double, extended or high.
    #[arg(long, default_value = "double")]
    precision: Precision,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derived constants for (n, p, m).
    Constants {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 3.5)]
        m: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Sub-solution certificate at λ = lambda_mult·K0.
    CertifySubsolution {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 3.5)]
        m: f64,
        #[arg(long)]
        lambda_mult: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Stability certificate at β = beta_mult·K0.
    CertifyStability {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 3.5)]
        m: f64,
        #[arg(long)]
        beta_mult: f64,
        #[arg(long, default_value = "improved")]
        weight: WeightKind,
        #[command(flatten)]
        common: Common,
    },
    /// Random Rayleigh-quotient check of a Hardy-Rellich weight.
    HrSample {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "improved")]
        weight: WeightKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Audit of the published (λ′, β) table.
    Table1 {
        /// JSON run configuration; flags are ignored when given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 3.5)]
        m: f64,
        /// Explicit p values (repeatable); the per-row default grid otherwise.
        #[arg(long)]
        p: Vec<f64>,
        /// Restrict to these n (repeatable).
        #[arg(long)]
        n: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal branch by λ-continuation, as CSV `lambda,u0,mu1,converged`.
    Branch {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 400)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First clamped eigenvalue λ₁.
    Eigen {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 400)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check of u_λ ≤ r^(−α) − 1 along the branch.
    BoundCheck {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 400)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combined singularity verdict.
    Report {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 3.5)]
        m: f64,
        #[arg(long)]
        lambda_mult: f64,
        #[arg(long)]
        beta_mult: f64,
        #[arg(long, default_value = "improved")]
        weight: WeightKind,
        /// Also run the branch on this many nodes and compare λ* with λ′K0.
        #[arg(long)]
        nodes: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn json_text(v: Value) -> Result<String, Error> {
    Ok(to_canonical_json(&v)? + "\n")
}

fn json_only(f: Format) -> Result<(), Error> {
    match f {
        Format::Json => Ok(()),
        Format::Csv => Err(Error::InvalidInput("this command emits JSON only".into())),
    }
}

fn certificate_csv(r: &CertificateReport) -> String {
    format!(
        "inequality,verdict,worst_margin,worst_location,location_variable,margin_error,precision,n,p,m,multiplier\n\
         {},{},{},{},{},{},{},{},{},{},{}\n",
        r.inequality,
        r.verdict,
        r.worst_margin,
        r.worst_location,
        r.location_variable,
        r.margin_error,
        r.precision,
        r.n,
        r.p,
        r.m,
        r.multiplier
    )
}

fn certificate_out(r: &CertificateReport, c: &Common) -> Result<i32, Error> {
    let text = match c.format {
        Format::Json => json_text(serde_json::to_value(r)?)?,
        Format::Csv => certificate_csv(r),
    };
    emit(&c.out, &text)?;
    Ok(r.verdict.exit_code())
}

fn audit_csv(rows: &[AuditRow]) -> String {
    let mut s = String::from(
        "n,m,p,lambda_mult,beta_mult,sub_verdict,sub_margin,sub_witness,sub_precision,\
         stab_verdict,stab_margin,stab_witness,stab_precision,\
         classical_stab_verdict,classical_stab_margin,classical_stab_witness,lemma34_bundle_valid,failure\n",
    );
    for r in rows {
        s += &format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.m,
            r.p,
            r.lambda_mult,
            r.beta_mult,
            r.sub_verdict,
            r.sub_margin,
            r.sub_witness,
            r.sub_precision,
            r.stab_verdict,
            r.stab_margin,
            r.stab_witness,
            r.stab_precision,
            r.classical_stab_verdict,
            r.classical_stab_margin,
            r.classical_stab_witness,
            r.lemma34_bundle_valid,
            r.failure.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    s
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.cmd {
        Cmd::Constants { n, p, m, common } => {
            json_only(common.format)?;
            let d = DerivedConstants::compute(&ProblemParams::new(n, p, m)?)?;
            let v = json!({ "n": n, "p": p, "m": m, "constants": d, "precision": Precision::Double });
            emit(&common.out, &json_text(v)?)?;
            Ok(0)
        }
        Cmd::CertifySubsolution { n, p, m, lambda_mult, common } => {
            let spec = SubsolutionSpec::new(ProblemParams::new(n, p, m)?, lambda_mult)?;
            let r = certify_subsolution_at(&spec, common.precision)?;
            certificate_out(&r, &common)
        }
        Cmd::CertifyStability { n, p, m, beta_mult, weight, common } => {
            let params = ProblemParams::new(n, p, m)?;
            let omega = build_omega(&SubsolutionSpec::new(params, 1.0)?);
            let r = certify_stability_at(&StabilitySpec::new(params, beta_mult, weight)?, &omega, common.precision)?;
            certificate_out(&r, &common)
        }
        Cmd::HrSample { n, weight, seed, trials, common } => {
            json_only(common.format)?;
            let s = sample_hardy_rellich(&WeightFunction::new(weight, n)?, trials, seed)?;
            let ok = s.failures.is_empty() && s.min_ratio >= 1.0 - 1e-6;
            let v = json!({ "sample": s, "passed": ok, "precision": Precision::Double });
            emit(&common.out, &json_text(v)?)?;
            Ok(if !s.failures.is_empty() { 2 } else if ok { 0 } else { 1 })
        }
        Cmd::Table1 { config, m, p, n, common } => {
            let cfg = match config {
                Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
                None => RunConfig {
                    command: "table1".into(),
                    p_grid: p,
                    m,
                    n_values: if n.is_empty() { (13..=31).collect() } else { n },
                    precision: common.precision,
                    out: common.out.as_ref().map(|p| p.display().to_string()),
                    ..Default::default()
                },
            };
            let entries: Vec<_> = table1_entries().into_iter().filter(|e| cfg.n_values.contains(&e.n)).collect();
            if entries.is_empty() {
                return Err(Error::InvalidInput("no table rows selected".into()));
            }
            let grid = (!cfg.p_grid.is_empty()).then_some(cfg.p_grid.as_slice());
            let rows = audit_table1_with(grid, cfg.m, &entries, cfg.precision)?;
            let text = match common.format {
                Format::Json => json_text(json!({ "config": cfg, "rows": rows }))?,
                Format::Csv => audit_csv(&rows),
            };
            let out = cfg.out.clone().map(PathBuf::from).or(common.out);
            emit(&out, &text)?;
            Ok(audit_exit_code(&rows))
        }
        Cmd::Branch { n, p, nodes, out } => {
            let params = ProblemParams::new(n, p, 3.5)?;
            let grid = RadialGrid::default_for(nodes, n)?;
            let res = continue_branch(&params, &grid, &StepPolicy::default())?;
            let mut s = String::from("lambda,u0,mu1,converged\n");
            for pt in &res.points {
                s += &format!("{},{},{},{}\n", pt.lambda, pt.center_value, pt.mu1, pt.converged);
            }
            emit(&out, &s)?;
            eprintln!(
                "lambda* ≈ {} (fold detected: {}, {} points, {} nodes)",
                res.lambda_star_estimate,
                res.fold_detected,
                res.points.len(),
                nodes
            );
            Ok(0)
        }
        Cmd::Eigen { n, nodes, out } => {
            let l = lambda1(n, &RadialGrid::default_for(nodes, n)?)?;
            let v = json!({
                "n": n,
                "nodes": nodes,
                "lambda1": l.value,
                "one_signed": l.one_signed,
                "min_max_ratio": l.min_max_ratio,
                "precision": Precision::Double,
            });
            emit(&out, &json_text(v)?)?;
            Ok(if l.one_signed { 0 } else { 1 })
        }
        Cmd::BoundCheck { n, p, nodes, out } => {
            let params = ProblemParams::new(n, p, 3.5)?;
            let grid = RadialGrid::default_for(nodes, n)?;
            let res = continue_branch(&params, &grid, &StepPolicy::default())?;
            let rep = check_upper_bound(&res, &params)?;
            let passed = rep.passed;
            let v = json!({ "report": rep, "lambda_star_estimate": res.lambda_star_estimate, "nodes": nodes, "precision": Precision::Double });
            emit(&out, &json_text(v)?)?;
            Ok(if passed { 0 } else { 1 })
        }
        Cmd::Report { n, p, m, lambda_mult, beta_mult, weight, nodes, common } => {
            json_only(common.format)?;
            let opts = ReportOptions { weight, precision: common.precision, branch_nodes: nodes };
            let r = singularity_report(&ProblemParams::new(n, p, m)?, lambda_mult, beta_mult, &opts)?;
            emit(&common.out, &json_text(serde_json::to_value(&r)?)?)?;
            Ok(r.verdict.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Verdict::Inconclusive.exit_code() as u8)
        }
    }
}
