use extremal_core::audit::{audit_table1_with, singularity_report, table1_entries, ReportOptions};
use extremal_core::report::{canonicalize, to_canonical_json};
use extremal_core::stability::{certify_stability_at, StabilitySpec, WeightKind};
use extremal_core::subsolution::{build_omega, certify_subsolution_at, SubsolutionSpec};
use extremal_core::{CertificateReport, Precision, ProblemParams, Verdict};

#[test]
fn certificate_json_round_trip() {
    let params = ProblemParams::new(13, 30.0, 3.5).unwrap();
    let spec = SubsolutionSpec::new(params, 3.1).unwrap();
    let sub = certify_subsolution_at(&spec, Precision::Double).unwrap();
    let st = certify_stability_at(
        &StabilitySpec::new(params, 3.2, WeightKind::Improved).unwrap(),
        &build_omega(&spec),
        Precision::Double,
    )
    .unwrap();
    for r in [sub, st] {
        let text = to_canonical_json(&r).unwrap();
        assert_eq!(canonicalize(&text).unwrap(), text);
        let back: CertificateReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}

#[test]
fn singularity_report_round_trip() {
    let params = ProblemParams::new(28, 100.0, 3.5).unwrap();
    let r = singularity_report(&params, 4.6, 10.0, &ReportOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Certified);
    let text = to_canonical_json(&r).unwrap();
    assert_eq!(canonicalize(&text).unwrap(), text);
    let back: extremal_core::audit::SingularityReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn extended_precision_audit_agrees() {
    let e = &table1_entries()[4..6];
    let d = audit_table1_with(Some(&[50.0]), 3.5, e, Precision::Double).unwrap();
    let x = audit_table1_with(Some(&[50.0]), 3.5, e, Precision::Extended).unwrap();
    for (a, b) in d.iter().zip(&x) {
        assert_eq!(a.sub_verdict, b.sub_verdict);
        assert_eq!(a.stab_verdict, b.stab_verdict);
        assert_eq!(b.sub_precision, Precision::Extended);
        assert!((a.sub_margin - b.sub_margin).abs() < 1e-10);
        assert!((a.stab_margin - b.stab_margin).abs() < 1e-8 * a.stab_margin.abs().max(1.0));
    }
}
