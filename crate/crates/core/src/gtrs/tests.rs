use super::*;

fn diag(d: &[f64]) -> SymMatrix {
    SymMatrix::from_diagonal(d).unwrap()
}

fn vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn inst(a: SymMatrix, b: SymMatrix, la: &[f64], lb: &[f64], c: f64) -> GtrsInstance {
    GtrsInstance::new(a, b, vec(la), vec(lb), c).unwrap()
}

fn solved(i: &GtrsInstance) -> GtrsOutcome {
    solve(i, &SolveOptions::default()).unwrap()
}

fn assert_optimal(o: &GtrsOutcome, i: &GtrsInstance, mu: f64, obj: f64) {
    assert_eq!(o.tag, OutcomeTag::Optimal, "{o:?}");
    let c = o.certificate.as_ref().unwrap();
    assert!((c.mu - mu).abs() <= 1e-8, "mu {} vs {mu}", c.mu);
    assert!((o.objective.unwrap() - obj).abs() <= 1e-8, "{o:?}");
    assert!(c.passes(1e-7, i.scale()), "{c:?}");
}

#[test]
fn boundary_minimum_in_one_dimension() {
    let i = inst(diag(&[1.0]), diag(&[1.0]), &[-3.0], &[0.0], -1.0);
    let o = solved(&i);
    assert_optimal(&o, &i, 2.0, -5.0);
    assert!((o.x().unwrap()[0] - 1.0).abs() < 1e-8);
    assert_eq!(o.diagnostics.path, SolvePath::PdBisection);
}

#[test]
fn interior_minimum_in_one_dimension() {
    let i = inst(diag(&[1.0]), diag(&[1.0]), &[-0.5], &[0.0], -1.0);
    let o = solved(&i);
    assert_optimal(&o, &i, 0.0, -0.25);
    assert_eq!(o.diagnostics.path, SolvePath::ZeroMultiplier);
}

#[test]
fn empty_multiplier_set_is_unbounded() {
    let i = inst(
        diag(&[0.0, -1.0]),
        diag(&[1.0, 0.0]),
        &[0.0, 0.0],
        &[0.0, 0.0],
        -1.0,
    );
    let o = solved(&i);
    assert_eq!(o.tag, OutcomeTag::Unbounded);
    assert_eq!(
        o.unbounded_reason,
        Some(UnboundedReason::EmptyMultiplierSet)
    );
    assert!(o.witness.as_ref().unwrap().verify(&i, 1e-8));
}

#[test]
fn reducible_pair_goes_through_reduction() {
    let i = inst(
        diag(&[1.0, 0.0]),
        diag(&[1.0, 0.0]),
        &[-3.0, 0.0],
        &[0.0, 0.0],
        -1.0,
    );
    let o = solved(&i);
    assert_optimal(&o, &i, 2.0, -5.0);
    assert_eq!(o.diagnostics.path, SolvePath::SingularReduction);
    let x = o.x().unwrap();
    assert!((x[0] - 1.0).abs() < 1e-8 && x[1] == 0.0);
}

#[test]
fn reducible_pair_with_tail_terms() {
    let i = inst(
        diag(&[1.0, 0.0]),
        diag(&[1.0, 0.0]),
        &[-3.0, 1.0],
        &[0.0, 0.0],
        -1.0,
    );
    let o = solved(&i);
    assert_eq!(o.tag, OutcomeTag::Unbounded);
    assert_eq!(o.diagnostics.path, SolvePath::TailInconsistent);
    assert!(o.witness.as_ref().unwrap().verify(&i, 1e-8));

    let i = inst(
        diag(&[1.0, 0.0]),
        diag(&[1.0, 0.0]),
        &[-3.0, 1.0],
        &[0.0, 2.0],
        -1.0,
    );
    let o = solved(&i);
    assert_eq!(o.tag, OutcomeTag::Unbounded);
    assert_eq!(o.diagnostics.path, SolvePath::PinnedMultiplier);
    assert!(o.witness.as_ref().unwrap().verify(&i, 1e-8));
}

#[test]
fn endpoint_multiplier_on_singular_pencil() {
    let i = inst(diag(&[-1.0]), diag(&[1.0]), &[0.0], &[0.0], -1.0);
    let o = solved(&i);
    assert_optimal(&o, &i, 1.0, -1.0);
    assert_eq!(o.diagnostics.path, SolvePath::EndpointPencil);
    assert!((o.x().unwrap()[0].abs() - 1.0).abs() < 1e-8);
}

#[test]
fn hard_case_with_closed_interval() {
    // x(μ) = 0 on (1, 2); φ ≡ -1 puts μ* at 1
    let i = inst(
        diag(&[-1.0, 2.0]),
        diag(&[1.0, -1.0]),
        &[0.0, 0.0],
        &[0.0, 0.0],
        -1.0,
    );
    let o = solved(&i);
    assert_optimal(&o, &i, 1.0, -1.0);
    assert_eq!(o.diagnostics.path, SolvePath::EndpointPencil);
}

#[test]
fn linear_objective_on_disk() {
    let i = inst(
        diag(&[0.0, 0.0]),
        diag(&[1.0, 1.0]),
        &[1.0, 0.0],
        &[0.0, 0.0],
        -1.0,
    );
    let o = solved(&i);
    assert_optimal(&o, &i, 1.0, -2.0);
}

#[test]
fn infeasible_and_slater_violated() {
    let i = inst(diag(&[1.0]), diag(&[1.0]), &[0.0], &[0.0], 1.0);
    assert_eq!(solved(&i).tag, OutcomeTag::Infeasible);

    // g = x₁², feasible set {x₁ = 0}; f = x₂² - 2x₂ + x₁ → (0, 1)
    let i = inst(
        diag(&[0.0, 1.0]),
        diag(&[1.0, 0.0]),
        &[0.5, -1.0],
        &[0.0, 0.0],
        0.0,
    );
    let o = solved(&i);
    assert_eq!(o.tag, OutcomeTag::Optimal);
    assert!(o.diagnostics.slater_violated);
    assert!((o.objective.unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn nonconvex_trust_region() {
    // min x₁² - x₂² + 2x₂ on the unit disk: x = (0, -1), λ* = -3
    let i = inst(
        diag(&[1.0, -1.0]),
        SymMatrix::identity(2),
        &[0.0, 1.0],
        &[0.0, 0.0],
        -1.0,
    );
    let o = solved(&i);
    assert_eq!(o.tag, OutcomeTag::Optimal);
    assert!((o.objective.unwrap() + 3.0).abs() < 1e-8, "{o:?}");
}

#[test]
fn outcome_serializes() {
    let i = inst(diag(&[1.0]), diag(&[1.0]), &[-3.0], &[0.0], -1.0);
    let json = serde_json::to_value(solved(&i)).unwrap();
    assert_eq!(json["tag"], "optimal");
    assert_eq!(json["diagnostics"]["path"], "pd_bisection");
    let back: GtrsInstance = serde_json::from_value(serde_json::to_value(&i).unwrap()).unwrap();
    assert_eq!(back, i);
}
