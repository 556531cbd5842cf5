//! Exit criteria. Each test prints one `criterion N: PASS|FAIL` line and then
//! asserts; run with `--nocapture` to see the lines.

use std::f64::consts::E;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use extremal_core::audit::{audit_table1, singularity_report, table1_entries, ReportOptions};
use extremal_core::branch::{
    check_upper_bound, continue_branch, dominated, lambda1, max_increase, solve_bvp, weak_form_check, StepPolicy,
};
use extremal_core::params::{compute_hn, compute_k0, compute_pc, sobolev_exponent};
use extremal_core::radial::{check_discrete_positivity, DiscreteOperator, PowerSum, RadialField, RadialGrid};
use extremal_core::report::to_canonical_json;
use extremal_core::stability::{certify_stability, sample_hardy_rellich, StabilitySpec, WeightFunction, WeightKind};
use extremal_core::subsolution::{build_omega, h_profile, residual_grid, sup_h, SubsolutionSpec};
use extremal_core::{ProblemParams, Verdict};

fn verdict(id: u32, ok: bool, detail: String) {
    println!("criterion {id}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Sign change bisection on `pK0 − Hn`, written against the factored form.
fn pc_oracle(n: u32) -> f64 {
    let nf = n as f64;
    let hn = (nf * (nf - 4.0) / 4.0).powi(2);
    let f = |p: f64| {
        let a = 4.0 / (p - 1.0);
        (a + 4.0) * (a + 2.0) * (nf - 2.0 - a) * (nf - 4.0 - a) - hn
    };
    let (mut lo, mut hi) = ((nf + 4.0) / (nf - 4.0) + 1e-9, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn criterion_01_constant_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(5u32..=64);
        let ps = sobolev_exponent(n);
        let p = ps + 10f64.powf(rng.gen_range(-3.0..4.0));
        let a = 4.0 / (p - 1.0);
        let nf = n as f64;
        let rhs = (a + 4.0) * (a + 2.0) * (nf - 2.0 - a) * (nf - 4.0 - a);
        worst = worst.max(rel(p * compute_k0(n, p).unwrap(), rhs));
    }
    let mut worst_pc: f64 = 0.0;
    for n in 13..=31u32 {
        let pc = compute_pc(n).unwrap().unwrap();
        worst_pc = worst_pc.max(rel(pc * compute_k0(n, pc).unwrap(), compute_hn(n).unwrap()));
    }
    let pc13 = compute_pc(13).unwrap().unwrap();
    let oracle = pc_oracle(13);
    let ok = worst <= 1e-12 && worst_pc <= 1e-9 && (pc13 - oracle).abs() <= 0.05 && (pc13 - 28.17).abs() <= 0.05;
    verdict(
        1,
        ok,
        format!("pK0 identity {worst:.2e}; pK0 = Hn at p_c {worst_pc:.2e}; p_c(13) = {pc13:.6} (oracle {oracle:.6})"),
    );
}

#[test]
fn criterion_02_exact_singular_solution() {
    let mut worst: f64 = 0.0;
    for n in [13u32, 31] {
        for p in [30.0, 500.0] {
            let alpha = 4.0 / (p - 1.0);
            let k0 = compute_k0(n, p).unwrap();
            let u = PowerSum::new([(1.0, -alpha)], -1.0);
            let bi = u.bilaplacian(n);
            let grid = RadialGrid::default_for(1000, n).unwrap();
            for &r in grid.nodes() {
                let src = k0 * (1.0 + u.eval(r)).powf(p);
                worst = worst.max(rel(bi.eval(r), src));
            }
        }
    }
    verdict(2, worst <= 1e-8, format!("max relative residual of the singular profile {worst:.2e}"));
}

#[test]
fn criterion_03_h_profile() {
    let mut worst: f64 = 0.0;
    for n in [13u32, 20, 31, 32] {
        for p in [30.0, 100.0, 1000.0] {
            for m in [2.0, 3.5, 5.0] {
                let s = SubsolutionSpec::new(ProblemParams::new(n, p, m).unwrap(), 1.0).unwrap();
                let a1 = s.derived.a1;
                worst = worst.max(rel(h_profile(&s, 0.0).unwrap(), a1.powf(1.0 - p)));
            }
        }
    }
    let mut worst_e2: f64 = 0.0;
    for n in [13u32, 32, 40] {
        let s = SubsolutionSpec::new(ProblemParams::new(n, 1e6, 2.0).unwrap(), 1.0).unwrap();
        worst_e2 = worst_e2.max((sup_h(&s).value - E * E).abs());
    }
    verdict(3, worst <= 1e-12 && worst_e2 <= 1e-3, format!("H(0) identity {worst:.2e}; |sup H - e^2| at p = 1e6 {worst_e2:.2e}"));
}

#[test]
fn criterion_04_two_path_residual() {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut specs = Vec::new();
    for n in [13u32, 31] {
        for p in [30.0, 500.0] {
            for m in [2.0, 3.5] {
                specs.push((n, p, m, 3.0));
            }
        }
    }
    for e in table1_entries() {
        specs.push((e.n, 100.0, 3.5, e.lambda_mult));
    }
    for (n, p, m, l) in specs {
        let s = SubsolutionSpec::new(ProblemParams::new(n, p, m).unwrap(), l).unwrap();
        let g = RadialGrid::default_for(1000, n).unwrap();
        match residual_grid(&s, &g) {
            Ok(r) => worst = worst.max(r.max_rel_disagreement),
            Err(e) => failures.push(format!("({n},{p},{m}): {e}")),
        }
    }
    verdict(4, failures.is_empty() && worst <= 1e-9, format!("max relative disagreement {worst:.2e} {failures:?}"));
}

#[test]
fn criterion_05_classical_weight_dimension_threshold() {
    let beta = E * E + 0.1;
    let p = 500.0;
    let run = |n: u32| {
        let params = ProblemParams::new(n, p, 2.0).unwrap();
        let omega = build_omega(&SubsolutionSpec::new(params, E * E).unwrap());
        certify_stability(&StabilitySpec::new(params, beta, WeightKind::Classical).unwrap(), &omega).unwrap()
    };
    let high: Vec<(u32, Verdict, f64)> =
        [32u32, 33, 40, 64].iter().map(|&n| run(n)).map(|r| (r.n, r.verdict, r.worst_margin)).collect();
    let low = run(13);
    let ok = high.iter().all(|h| h.1 == Verdict::Certified) && low.verdict == Verdict::Refuted;
    verdict(
        5,
        ok,
        format!("n >= 32 (n, verdict, margin): {high:?}; n = 13: {} {:.1}", low.verdict, low.worst_margin),
    );
}

#[test]
fn criterion_06_table_audit() {
    let t = Instant::now();
    let a = audit_table1(None, 3.5).unwrap();
    let b = audit_table1(None, 3.5).unwrap();
    let elapsed = t.elapsed();
    let ja = to_canonical_json(&a).unwrap();
    let jb = to_canonical_json(&b).unwrap();
    let complete = a.iter().all(|r| {
        r.failure.is_none()
            && r.sub_margin.is_finite()
            && r.stab_margin.is_finite()
            && r.sub_witness.is_finite()
            && r.stab_witness.is_finite()
    });
    let rows_expected = (13..=31u32).count() * 5;
    let refuted = a.iter().filter(|r| r.sub_verdict == Verdict::Refuted || r.stab_verdict == Verdict::Refuted).count();
    let ok = ja == jb && complete && a.len() == rows_expected && elapsed < Duration::from_secs(300);
    verdict(
        6,
        ok,
        format!("{} rows in {elapsed:.2?}, byte-identical {}, rows with a refuted inequality {refuted}", a.len(), ja == jb),
    );
}

#[test]
fn criterion_07_hardy_rellich_sampling() {
    let mut worst = f64::INFINITY;
    let mut fails = 0;
    for n in [13u32, 31] {
        for k in [WeightKind::Classical, WeightKind::Improved] {
            let s = sample_hardy_rellich(&WeightFunction::new(k, n).unwrap(), 200, 2024).unwrap();
            worst = worst.min(s.min_ratio);
            fails += s.failures.len();
        }
    }
    verdict(7, fails == 0 && worst >= 1.0 - 1e-6, format!("min Rayleigh ratio {worst:.6}, quadrature failures {fails}"));
}

#[test]
fn criterion_08_discrete_inverse_positivity() {
    let mut worst = f64::INFINITY;
    for n in [5u32, 13, 31] {
        let op = DiscreteOperator::new(&RadialGrid::default_for(200, n).unwrap()).unwrap();
        worst = worst.min(check_discrete_positivity(&op).unwrap().min_entry);
    }
    verdict(8, worst >= -1e-10, format!("min inverse entry {worst:.3e}"));
}

#[test]
fn criterion_09_branch() {
    let t = Instant::now();
    let params = ProblemParams::new(13, 30.0, 3.5).unwrap();
    let k0 = compute_k0(13, 30.0).unwrap();
    let mut msgs = Vec::new();
    let mut ok = true;
    let mut check = |c: bool, m: String| {
        ok &= c;
        if !c {
            msgs.push(m);
        }
    };

    let g200 = RadialGrid::default_for(200, 13).unwrap();
    let lam = 1e-3;
    let small = solve_bvp(lam, &RadialField::zeros(g200.clone()), &params, &g200).unwrap();
    let plate = |r: f64| lam * (1.0 - r * r).powi(2) / (8.0 * 13.0 * 15.0);
    let dev = small.solution.grid.nodes().iter().zip(&small.solution.values).map(|(&r, &u)| (u - plate(r)).abs()).fold(0.0, f64::max)
        / plate(0.0);
    check(small.converged && dev <= 0.02, format!("small-lambda deviation {dev:.3e}"));

    let mut stars = Vec::new();
    for nodes in [200usize, 400] {
        let grid = RadialGrid::default_for(nodes, 13).unwrap();
        let res = continue_branch(&params, &grid, &StepPolicy::default()).unwrap();
        let l1 = lambda1(13, &grid).unwrap().value;
        let pts = &res.points;
        let nonincreasing = pts.iter().all(|p| max_increase(&p.solution) <= 1e-12 * (1.0 + p.center_value));
        let ordered = pts.windows(2).all(|w| w[1].lambda > w[0].lambda && dominated(&w[0].solution, &w[1].solution, 0.0));
        let u0_up = pts.windows(2).all(|w| w[1].center_value > w[0].center_value);
        let mu_ok = pts.iter().all(|p| p.mu1 > 0.0) && pts.windows(2).all(|w| w[1].mu1 < w[0].mu1);
        let star = res.lambda_star_estimate;
        let bracket = star >= k0 && star < l1 / 30.0;
        let ub = check_upper_bound(&res, &params).unwrap();
        let weak = pts.iter().skip(1).map(|p| weak_form_check(p, &params).unwrap().max_discrete).fold(0.0, f64::max);
        check(nonincreasing, format!("{nodes}: profile increases somewhere"));
        check(ordered && u0_up, format!("{nodes}: branch not monotone in lambda"));
        check(mu_ok, format!("{nodes}: mu1 not positive and decreasing"));
        check(bracket, format!("{nodes}: lambda* = {star} outside [{k0}, {})", l1 / 30.0));
        check(ub.passed, format!("{nodes}: upper bound violated by {:.3e}", ub.max_violation));
        check(weak <= 1e-6, format!("{nodes}: weak form defect {weak:.2e}"));
        println!(
            "  {nodes} nodes: lambda* = {star:.6} (K0 = {k0:.4}, lambda1/p = {:.3}), {} points, fold detected {}, last mu1/lambda1 = {:.3}",
            l1 / 30.0,
            pts.len(),
            res.fold_detected,
            pts.last().unwrap().mu1 / l1
        );
        stars.push(star);
    }
    let drift = rel(stars[0], stars[1]);
    check(drift <= 0.02, format!("refinement drift {drift:.3e}"));
    let elapsed = t.elapsed();
    check(elapsed < Duration::from_secs(120), format!("took {elapsed:.2?}"));
    verdict(
        9,
        ok,
        format!("lambda* {:.4} -> {:.4} (drift {drift:.2e}), small-lambda deviation {dev:.2e}, {elapsed:.2?} {msgs:?}", stars[0], stars[1]),
    );
}

#[test]
fn criterion_10_branch_respects_certified_bound() {
    let mut cases: Vec<(u32, f64, f64, f64)> = Vec::new();
    for e in table1_entries() {
        for p in [50.0, 100.0] {
            cases.push((e.n, p, e.lambda_mult, e.beta_mult));
        }
    }
    // bundles with λ′ just above sup H
    for (n, p) in [(13u32, 30.0), (20, 30.0), (31, 30.0), (31, 100.0)] {
        let s = SubsolutionSpec::new(ProblemParams::new(n, p, 3.5).unwrap(), 1.0).unwrap();
        let l = sup_h(&s).value * 1.001;
        cases.push((n, p, l, l + 0.01));
    }
    let opts = ReportOptions { branch_nodes: Some(400), ..Default::default() };
    let mut valid = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut violations = Vec::new();
    for (n, p, l, b) in cases {
        let params = ProblemParams::new(n, p, 3.5).unwrap();
        let quick = singularity_report(&params, l, b, &ReportOptions::default()).unwrap();
        if !quick.bundle_valid {
            continue;
        }
        valid += 1;
        let r = singularity_report(&params, l, b, &opts).unwrap();
        let br = r.branch.unwrap();
        worst_ratio = worst_ratio.max(br.ratio);
        if br.contradiction || br.ratio > 1.02 {
            violations.push((n, p, l, br.lambda_star, br.bound));
        }
    }
    verdict(
        10,
        valid > 0 && violations.is_empty(),
        format!("{valid} valid bundles, max lambda*/(lambda' K0) = {worst_ratio:.4}, violations {violations:?}"),
    );
}
