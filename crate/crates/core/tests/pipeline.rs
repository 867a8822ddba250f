use bayes_assurance::closed_form::{power_assurance_curve, TwoPriorSpec};
use bayes_assurance::conjugate::{
    analysis_decision, posterior_update, simulate_assurance, simulate_assurance_unbalanced, ConjugateModelSpec,
    HypothesisSpec,
};
use bayes_assurance::design::{gen_design, gen_design_balanced, replicate_pair};
use bayes_assurance::goal::{rate_correct_classification_design, solve_contrast_vector, GoalSpec};
use bayes_assurance::kernels::CovarianceMatrix;
use bayes_assurance::{Alternative, McSettings};
use nalgebra::DVector;

#[test]
fn simulated_curve_tracks_closed_form() {
    let spec = TwoPriorSpec {
        theta_0: 0.15,
        theta_1: 0.25,
        sigsq: 0.3,
        n_a: 5.0,
        n_d: 20.0,
        alt: Alternative::Greater,
        alpha: 0.05,
    };
    let rows = power_assurance_curve(&[20.0, 60.0, 150.0], &spec, true, &McSettings::new(5000, 3)).unwrap();
    for r in rows {
        let sim = r.assurance_sim.unwrap();
        assert!(
            (sim - r.assurance_exact).abs() <= 0.03,
            "n={} sim {sim} exact {}",
            r.n,
            r.assurance_exact
        );
    }
}

#[test]
fn balanced_default_equals_explicit_design() {
    let model = ConjugateModelSpec::new(
        CovarianceMatrix::identity(3),
        DVector::from_vec(vec![0.2, 0.0, -0.1]),
        1.0,
    );
    let hyp = HypothesisSpec::new(DVector::from_vec(vec![1.0, -1.0, 0.0]), 0.0).unwrap();
    let mc = McSettings::new(2000, 11);
    let implicit = simulate_assurance(&model, &hyp, &[15], &mc, None).unwrap();
    let explicit = model.clone().with_design(gen_design_balanced(15, 3).unwrap());
    let explicit = simulate_assurance(&explicit, &hyp, &[15], &mc, None).unwrap();
    assert_eq!(implicit.rows, explicit.rows);
}

#[test]
fn unbalanced_is_reproducible_and_grows_with_n() {
    let model = ConjugateModelSpec::new(CovarianceMatrix::identity(2), DVector::from_vec(vec![0.3, 0.0]), 1.0);
    let hyp = HypothesisSpec::new(DVector::from_vec(vec![1.0, -1.0]), 0.0).unwrap();
    let mc = McSettings::new(4000, 5);
    let run = || {
        simulate_assurance_unbalanced(&[5, 200], &[10, 300], 1, &model, &hyp, &mc, false)
            .unwrap()
            .0
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert!(a.rows[1].assurance > a.rows[0].assurance);
}

#[test]
fn posterior_decision_on_clear_data() {
    let sizes = replicate_pair(10, 10, 1).unwrap();
    let x = gen_design(&sizes).unwrap();
    let model = ConjugateModelSpec::new(CovarianceMatrix::identity(2), DVector::zeros(2), 1.0).with_design(x);
    let y = DVector::from_iterator(20, (0..20).map(|i| if i < 10 { 2.0 } else { 0.0 }));
    let post = posterior_update(&model, &y, 0.0, 0.0).unwrap();
    let hyp = HypothesisSpec::new(DVector::from_vec(vec![1.0, -1.0]), 0.0).unwrap();
    assert!(analysis_decision(&post.m_matrix, &post.m_vector, &hyp, 1.0, Alternative::Greater, 0.05).unwrap());
    assert!(!analysis_decision(&post.m_matrix, &post.m_vector, &hyp, 1.0, Alternative::Less, 0.05).unwrap());
}

#[test]
fn goal_rate_on_generated_design() {
    let x = gen_design(&[20, 20]).unwrap();
    let u = DVector::from_vec(vec![1.0, -1.0]);
    let z = solve_contrast_vector(&x, &u).unwrap();
    assert!((z.norm_squared() - 0.1).abs() < 1e-12);
    let spec = GoalSpec {
        k: 1.0,
        pi: 0.5,
        u,
        beta_0: DVector::from_vec(vec![0.0, 0.0]),
        beta_1: DVector::from_vec(vec![0.5, 0.0]),
        sigsq: 1.0,
    };
    let r = rate_correct_classification_design(&spec, &x).unwrap();
    assert!(r > 0.5 && r < 1.0);
}
