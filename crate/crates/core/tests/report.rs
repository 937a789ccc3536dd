use carnot_core::analysis::{lq_annular_classify, AnnularConfig, IntegrabilityReport};
use carnot_core::calculus::FdConfig;
use carnot_core::mollify::{convergence_sweep, Component, MollifierConfig, SweepConfig};
use carnot_core::report::{emit_csv, emit_json, emit_report, Format};
use carnot_core::sampling::GridSpec;
use carnot_core::{parse_map, CarnotGroup, ValidationReport};

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-11 * a.abs().max(b.abs()).max(1e-300)
}

fn integrability() -> IntegrabilityReport {
    let g = CarnotGroup::heisenberg(1).unwrap();
    let f = parse_map("inv", &g).unwrap();
    let cfg = AnnularConfig {
        q: 1.5,
        n_max: 5,
        samples: 500,
        ..AnnularConfig::default()
    };
    lq_annular_classify(&f, &cfg).unwrap()
}

#[test]
fn integrability_report_round_trips() {
    let r = integrability();
    let text = emit_json(&r).unwrap();
    let back: IntegrabilityReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.n, r.n);
    assert_eq!(back.verdict, r.verdict);
    assert_eq!(back.excluded, r.excluded);
    assert_eq!(back.homogeneous_dimension, r.homogeneous_dimension);
    assert!(rel_close(back.slope, r.slope));
    assert!(back.sums.iter().zip(&r.sums).all(|(a, b)| rel_close(*a, *b)));
    // rounding is idempotent, so a second pass is byte-identical
    assert_eq!(emit_json(&back).unwrap(), text);
}

#[test]
fn empty_validation_report() {
    let r = ValidationReport { violations: vec![] };
    assert_eq!(emit_report(&r, Format::Json).unwrap(), r#"{"violations":[]}"#);
}

#[test]
fn convergence_csv_schema() {
    let g = CarnotGroup::heisenberg(1).unwrap();
    let f = parse_map("twist(0.5)", &g).unwrap();
    let grid = GridSpec::parse("box(-1,1,10)").unwrap().points(&g, 1).unwrap();
    let cfg = SweepConfig {
        eps: vec![0.2, 0.1, 0.05, 0.025],
        q: 2.0,
        component: Component::parse("grad", &g, &g).unwrap(),
        mollifier: MollifierConfig::default(),
        fd: FdConfig::default(),
    };
    let r = convergence_sweep(&f, &grid, &cfg).unwrap();
    let csv = emit_csv(&r).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "eps,norm,slope");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].ends_with(','), "first row has no slope: {}", lines[1]);
}

#[test]
fn floats_carry_twelve_digits() {
    let text = emit_json(&vec![std::f64::consts::PI, 1.0 / 3.0]).unwrap();
    assert_eq!(text, "[3.14159265359,0.333333333333]");
}
