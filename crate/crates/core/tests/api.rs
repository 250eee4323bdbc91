use nalgebra::DVector;
use psdpencil::interval::interval_from_diagonal;
use psdpencil::oracle::{plant_instance, scan_interval, PlantKind};
use psdpencil::{
    check_kkt, psd_interval, solve, GtrsInstance, MuInterval, OutcomeTag, SolveOptions, SymMatrix,
    Tolerances,
};

fn diag(d: &[f64]) -> SymMatrix {
    SymMatrix::from_diagonal(d).unwrap()
}

fn inst(a: SymMatrix, b: SymMatrix, la: &[f64], lb: &[f64], c: f64) -> GtrsInstance {
    GtrsInstance::new(
        a,
        b,
        DVector::from_column_slice(la),
        DVector::from_column_slice(lb),
        c,
    )
    .unwrap()
}

#[test]
fn diagonal_intervals() {
    assert_eq!(
        interval_from_diagonal(&[-1.0, 2.0], &[1.0, -1.0]),
        MuInterval::from_bounds(1.0, 2.0)
    );
    assert_eq!(
        interval_from_diagonal(&[1.0, -2.0], &[1.0, -1.0]),
        MuInterval::empty()
    );
    assert_eq!(
        interval_from_diagonal(&[0.0, 1.0], &[0.0, 0.0]),
        MuInterval::all_reals()
    );
    assert_eq!(
        interval_from_diagonal(&[1.0, -1.0], &[1.0, -1.0]),
        MuInterval::point(-1.0)
    );
}

#[test]
fn solve_examples() {
    let opts = SolveOptions::default();
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-8 * (1.0 + y.abs());

    let out = solve(
        &inst(diag(&[1.0]), diag(&[1.0]), &[-3.0], &[0.0], -1.0),
        &opts,
    )
    .unwrap();
    let cert = out.certificate.as_ref().unwrap();
    assert!(close(cert.x[0], 1.0) && close(cert.mu, 2.0) && close(out.objective.unwrap(), -5.0));

    let out = solve(
        &inst(diag(&[1.0]), diag(&[1.0]), &[-0.5], &[0.0], -1.0),
        &opts,
    )
    .unwrap();
    let cert = out.certificate.as_ref().unwrap();
    assert!(close(cert.x[0], 0.5) && cert.mu == 0.0 && close(out.objective.unwrap(), -0.25));

    let out = solve(
        &inst(
            diag(&[0.0, -1.0]),
            diag(&[1.0, 0.0]),
            &[0.0, 0.0],
            &[0.0, 0.0],
            -1.0,
        ),
        &opts,
    )
    .unwrap();
    assert_eq!(out.tag, OutcomeTag::Unbounded);

    let out = solve(
        &inst(diag(&[-1.0]), diag(&[1.0]), &[0.0], &[0.0], -1.0),
        &opts,
    )
    .unwrap();
    let cert = out.certificate.as_ref().unwrap();
    assert!(
        close(cert.x[0].abs(), 1.0) && close(cert.mu, 1.0) && close(out.objective.unwrap(), -1.0)
    );

    // empty feasible set: x² + 1 ≤ 0
    let out = solve(
        &inst(diag(&[1.0]), diag(&[1.0]), &[0.0], &[0.0], 1.0),
        &opts,
    )
    .unwrap();
    assert_eq!(out.tag, OutcomeTag::Infeasible);
}

#[test]
fn planted_solutions_round_trip_through_json() {
    for kind in PlantKind::ALL {
        let p = plant_instance(5, 6, kind);
        let text = serde_json::to_string(&p).unwrap();
        let back: psdpencil::oracle::PlantedInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        if let (Some(x), Some(mu)) = (&p.ref_x, p.ref_mu) {
            let cert = check_kkt(&p.instance, &DVector::from_column_slice(x), mu);
            assert!(cert.passes(1e-8, p.instance.scale()), "{kind:?}");
        }
    }
}

#[test]
fn interval_agrees_with_scan_on_a_fixture() {
    let (a, b) = (diag(&[-1.0, 2.0]), diag(&[1.0, -1.0]));
    let exact = psd_interval(&a, &b, &Tolerances::default())
        .unwrap()
        .interval;
    let scan = scan_interval(&a, &b, -5.0, 5.0, 1001, 1e-9).unwrap();
    for (k, p) in scan.grid.iter().enumerate() {
        if (p.mu - 1.0).abs() > 0.02 && (p.mu - 2.0).abs() > 0.02 {
            assert_eq!(
                exact.contains(p.mu),
                scan.is_psd_at(k, 1e-9, 2.0 + 5.0),
                "mu = {}",
                p.mu
            );
        }
    }
}
