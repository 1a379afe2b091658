//! Acceptance suite: the exit criteria for the evaluator and its
//! verification oracle. Each test prints one summary line.

mod common;

use std::time::Instant;

use common::*;
use folsem::oracle::{gen_instance, run_suites, truth, GenParams, SuiteParams};
use folsem::semantics::{eval_with, EvalOptions, Mutation};
use folsem::subst::compose;
use folsem::term::evaluate;
use folsem::{
    eval, normal_terms_equal, parse_formula, parse_subst, parse_term, print_formula, print_subst,
    print_term, substitutions_equal, Formula, FreshSupply, Interpretation, Substitution, Term,
};

fn example3_interp() -> Interpretation {
    Interpretation::from_json(
        r#"{"domain": "herbrand",
            "functions": {"c": {"arity": 0}, "f": {"arity": 1}, "g": {"arity": 1}}}"#,
    )
    .unwrap()
}

fn run(interp: &Interpretation, query: &str, theta: &str) -> folsem::Outcome {
    let phi = parse_formula(query, interp).unwrap();
    let theta = parse_subst(theta, interp).unwrap();
    let mut supply = FreshSupply::new();
    eval(&phi, &theta, interp, &mut supply).unwrap()
}

fn single_answer(interp: &Interpretation, query: &str, theta: &str, expected: &str) {
    let outcome = run(interp, query, theta);
    assert!(!outcome.has_error(), "{query}: unexpected error");
    assert_eq!(
        outcome.substitutions().len(),
        1,
        "{query}: expected one answer"
    );
    let expected = parse_subst(expected, interp).unwrap();
    assert!(
        substitutions_equal(&outcome.substitutions()[0], &expected, interp.algebra()),
        "{query}: got {}, expected {}",
        outcome.substitutions()[0],
        expected
    );
}

fn only_error(interp: &Interpretation, query: &str, theta: &str) {
    let outcome = run(interp, query, theta);
    assert!(outcome.has_error(), "{query}: expected the error state");
    assert!(
        outcome.substitutions().is_empty(),
        "{query}: expected no answers"
    );
}

#[test]
fn criterion_1_worked_example_goldens() {
    let start = Instant::now();
    let int = int_interp();

    // evaluation of s = x + (((3+2)*4) - y) collapses the ground part
    let s = parse_term("x + (((3+2)*4) - y)", &int).unwrap();
    let s_normal = evaluate(&s, int.algebra()).unwrap();
    let expected = evaluate(&parse_term("x + (20 - y)", &int).unwrap(), int.algebra()).unwrap();
    assert!(normal_terms_equal(&s_normal, &expected, int.algebra()));
    assert_eq!(print_term(s_normal.as_term()), "x + (20 - y)");

    // applying {x/6-z, y/3} substitutes values in, unevaluated
    let theta = parse_subst("{x/6-z, y/3}", &int).unwrap();
    let s_theta = theta.apply(&s);
    {
        use folsem::DomainValue::Int;
        let expected_s_theta = Term::app(
            "+",
            vec![
                Term::app("-", vec![Term::Val(Int(6.into())), Term::var("z")]),
                Term::app(
                    "-",
                    vec![
                        Term::app(
                            "*",
                            vec![
                                Term::app("+", vec![Term::constant("3"), Term::constant("2")]),
                                Term::constant("4"),
                            ],
                        ),
                        Term::Val(Int(3.into())),
                    ],
                ),
            ],
        );
        assert_eq!(s_theta, expected_s_theta);
    }

    // and evaluates to (6-z) + 17
    let s_theta_normal = evaluate(&s_theta, int.algebra()).unwrap();
    let expected = evaluate(&parse_term("(6-z) + 17", &int).unwrap(), int.algebra()).unwrap();
    assert!(normal_terms_equal(
        &s_theta_normal,
        &expected,
        int.algebra()
    ));

    // composition with {z/4} grounds everything
    let eta = parse_subst("{z/4}", &int).unwrap();
    let composed = compose(&theta, &eta, int.algebra());
    let expected = parse_subst("{x/2, y/3, z/4}", &int).unwrap();
    assert!(substitutions_equal(&composed, &expected, int.algebra()));

    // chained equations over a term algebra
    let her = example3_interp();
    single_answer(
        &her,
        "f(x) = z & g(z) = g(f(x))",
        "{x/g(y)}",
        "{x/g(y), z/f(g(y))}",
    );
    only_error(&her, "g(f(x)) = g(z)", "{x/g(y)}");

    // chained arithmetic equations
    single_answer(&int, "y = z-1 & z = x+2", "{x/1}", "{x/1, y/2, z/3}");
    single_answer(&int, "y+1 = z-1", "{y/1, z/3}", "{y/1, z/3}");
    single_answer(
        &int,
        "x*(y+1) = (v+1)*(z-1)",
        "{x/v+1, y/1, z/3}",
        "{x/v+1, y/1, z/3}",
    );
    only_error(&int, "y-1 = z-1", "{}");

    // an existential binds a local variable that leaks only through its
    // witness term, under the canonical fresh name
    let outcome = run(&her, "exists x (z = f(x))", "{}");
    assert!(!outcome.has_error());
    assert_eq!(outcome.substitutions().len(), 1);
    assert_eq!(print_subst(&outcome.substitutions()[0]), "{z/f(_y1)}");

    // deliberately undetermined arithmetic identities
    only_error(&int, "x+x = 2*x", "{}");
    only_error(&int, "x+1 = x", "{}");
    only_error(&int, "x+x = 2*x", "{y/7}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "goldens took {elapsed:?}");
    println!("criterion 1 (worked-example goldens): pass in {elapsed:?}");
}

#[test]
fn criterion_2_soundness_suite() {
    let start = Instant::now();
    let params = SuiteParams {
        count: 1000,
        seed: 42,
        gen: GenParams::default(),
        options: EvalOptions::default(),
    };
    let summary = run_suites(&params).unwrap();
    let si = summary.suites["soundness-i"];
    let sii = summary.suites["soundness-ii"];
    assert_eq!(si.fail, 0, "soundness-i failures: {:#?}", summary.failures);
    assert_eq!(si.pass, 1000, "soundness-i must apply to every instance");
    assert_eq!(
        sii.fail, 0,
        "soundness-ii failures: {:#?}",
        summary.failures
    );
    assert!(sii.pass > 0, "soundness-ii never applied");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "suite took {elapsed:?}");
    println!(
        "criterion 2 (soundness): pass — i {}/1000, ii {} pass / {} error-skipped in {elapsed:?}",
        si.pass, sii.pass, sii.not_applicable
    );
}

#[test]
fn criterion_3_notes_suite() {
    let start = Instant::now();
    let params = SuiteParams {
        count: 1000,
        seed: 42,
        gen: GenParams::default(),
        options: EvalOptions::default(),
    };
    let summary = run_suites(&params).unwrap();
    let ni = summary.suites["note-i"];
    let nii = summary.suites["note-ii"];
    let neq = summary.suites["note-equality"];
    assert_eq!(ni.fail, 0, "note-i failures: {:#?}", summary.failures);
    assert_eq!(ni.pass, 1000);
    assert_eq!(nii.fail, 0, "note-ii failures: {:#?}", summary.failures);
    assert!(nii.pass > 0, "note-ii never applied");
    assert_eq!(
        neq.fail, 0,
        "note-equality failures: {:#?}",
        summary.failures
    );
    assert_eq!(neq.pass, 1000, "generated states are always resolved");

    // finite failure from the empty state validates the negation
    let mut applicable = 0;
    for seed in 0..1000u64 {
        let instance = gen_instance(seed, &GenParams::default());
        let interp = instance.interpretation();
        let mut supply = FreshSupply::new();
        let outcome = eval(
            &instance.formula,
            &Substitution::empty(),
            &interp,
            &mut supply,
        )
        .unwrap();
        if outcome.is_failure() {
            applicable += 1;
            assert!(
                truth(
                    &interp,
                    &Substitution::empty(),
                    &Formula::not(instance.formula.clone())
                )
                .unwrap(),
                "seed {seed}: failed query whose negation is not valid: {}",
                instance.formula
            );
        }
    }
    assert!(applicable > 0, "corollary never applied");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "suite took {elapsed:?}");
    println!(
        "criterion 3 (notes): pass — note-i 1000, note-ii {} ground, note-equality 1000, corollary {} failing queries in {elapsed:?}",
        nii.pass, applicable
    );
}

#[test]
fn criterion_4_algebra_laws() {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let start = Instant::now();

    // evaluation is idempotent (1000 cases across two algebras)
    for (interp, seed) in [(int_interp(), 1u64), (finite_interp(), 2)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..500 {
            let t = gen_term_over(&mut rng, &interp, 4, &POOL);
            let once = evaluate(&t, interp.algebra()).unwrap();
            let twice = evaluate(once.as_term(), interp.algebra()).unwrap();
            assert_eq!(once, twice, "idempotence failed on {t}");
        }
    }

    // over a term algebra, evaluation only embeds ground parts as values
    let her = herbrand_interp();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let t = gen_term_over(&mut rng, &her, 4, &POOL);
        let normal = evaluate(&t, her.algebra()).unwrap();
        assert_eq!(
            normal.as_term().expand_term_values(),
            t,
            "identity failed on {t}"
        );
    }

    // composition satisfies its defining equation pointwise
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (interp, cases) in [(int_interp(), 500), (finite_interp(), 500)] {
        for _ in 0..cases {
            let theta = gen_subst_over(&mut rng, &interp, 2, &POOL, &POOL);
            let eta = gen_subst_over(&mut rng, &interp, 2, &POOL, &POOL);
            let composed = compose(&theta, &eta, interp.algebra());
            for x in theta.domain().chain(eta.domain()) {
                let lhs =
                    evaluate(&composed.apply(&Term::Var(x.clone())), interp.algebra()).unwrap();
                let rhs = evaluate(
                    &eta.apply(&theta.apply(&Term::Var(x.clone()))),
                    interp.algebra(),
                )
                .unwrap();
                assert!(normal_terms_equal(&lhs, &rhs, interp.algebra()));
            }
        }
    }

    // the empty substitution is a two-sided identity
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let interp = finite_interp();
    let e = Substitution::empty();
    for _ in 0..1000 {
        let theta = gen_subst_over(&mut rng, &interp, 2, &POOL, &POOL);
        assert!(substitutions_equal(
            &compose(&theta, &e, interp.algebra()),
            &theta,
            interp.algebra()
        ));
        assert!(substitutions_equal(
            &compose(&e, &theta, interp.algebra()),
            &theta,
            interp.algebra()
        ));
    }

    // removing a variable foreign to the prefix commutes with composition
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y = folsem::Variable::named("y");
    for _ in 0..1000 {
        let theta = gen_subst_over(&mut rng, &interp, 2, &["w", "x"], &["w", "x", "z"]);
        let eta = gen_subst_over(&mut rng, &interp, 2, &POOL, &POOL);
        let lhs = compose(&theta, &eta, interp.algebra()).without(&y);
        let rhs = compose(&theta, &eta.without(&y), interp.algebra());
        assert!(substitutions_equal(&lhs, &rhs, interp.algebra()));
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "laws took {elapsed:?}");
    println!("criterion 4 (algebra laws): pass in {elapsed:?}");
}

fn contains_exists(phi: &Formula) -> bool {
    match phi {
        Formula::Exists(..) => true,
        Formula::And(a, b) | Formula::Or(a, b) => contains_exists(a) || contains_exists(b),
        Formula::Not(a) => contains_exists(a),
        Formula::Equation(..) | Formula::Atom(..) => false,
    }
}

#[test]
fn criterion_5_fresh_name_independence() {
    let start = Instant::now();
    let params = GenParams::default();
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < 200 {
        let instance = gen_instance(seed, &params);
        seed += 1;
        if !contains_exists(&instance.formula) {
            continue;
        }
        checked += 1;
        let interp = instance.interpretation();
        let mut low = FreshSupply::starting_at(1);
        let mut high = FreshSupply::starting_at(1001);
        let a = eval(&instance.formula, &instance.subst, &interp, &mut low).unwrap();
        let b = eval(&instance.formula, &instance.subst, &interp, &mut high).unwrap();
        assert!(
            outcomes_equal_up_to_renaming(&a, &b, interp.algebra()),
            "instance {}: outcomes differ beyond renaming:\n{a}\n---\n{b}",
            instance.seed
        );
    }
    let elapsed = start.elapsed();
    println!("criterion 5 (fresh-name independence): pass on {checked} formulas in {elapsed:?}");
}

#[test]
fn criterion_6_syntax_round_trips() {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let start = Instant::now();
    let interps = [int_interp(), finite_interp(), herbrand_interp()];

    let mut terms = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    while terms < 1000 {
        for interp in &interps {
            let t = gen_term_over(&mut rng, interp, 4, &POOL);
            let reparsed = parse_term(&print_term(&t), interp)
                .unwrap_or_else(|e| panic!("term `{t}` failed to reparse: {e}"));
            assert_eq!(t, reparsed, "term round-trip");
            terms += 1;
        }
    }

    let mut formulas = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    while formulas < 1000 {
        for interp in &interps {
            let phi = gen_formula_over(&mut rng, interp, 4);
            let reparsed = parse_formula(&print_formula(&phi), interp)
                .unwrap_or_else(|e| panic!("formula `{phi}` failed to reparse: {e}"));
            assert_eq!(phi, reparsed, "formula round-trip");
            formulas += 1;
        }
    }

    let mut substs = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    while substs < 1000 {
        for interp in &interps {
            let theta = gen_subst_over(&mut rng, interp, 2, &POOL, &POOL);
            let reparsed = parse_subst(&print_subst(&theta), interp)
                .unwrap_or_else(|e| panic!("substitution `{theta}` failed to reparse: {e}"));
            assert_eq!(theta, reparsed, "substitution round-trip");
            substs += 1;
        }
    }

    let elapsed = start.elapsed();
    println!(
        "criterion 6 (round-trips): pass on {terms} terms, {formulas} formulas, {substs} substitutions in {elapsed:?}"
    );
}

#[test]
fn criterion_7_mutation_sensitivity() {
    let start = Instant::now();
    for mutation in [
        Mutation::AcceptGroundMismatch,
        Mutation::NegationErrorAsFailure,
        Mutation::SkipDrop,
    ] {
        let params = SuiteParams {
            count: 1000,
            seed: 42,
            gen: GenParams::default(),
            options: EvalOptions {
                mutation: Some(mutation),
            },
        };
        let summary = run_suites(&params).unwrap();
        assert!(
            summary.failure_count() > 0,
            "mutation {mutation:?} went undetected over 1000 instances"
        );
    }

    // sanity: the mutations do change observable outcomes
    let int = int_interp();
    let phi = parse_formula("3 = 4", &int).unwrap();
    let mut supply = FreshSupply::new();
    let mutated = eval_with(
        &phi,
        &Substitution::empty(),
        &int,
        &mut supply,
        EvalOptions {
            mutation: Some(Mutation::AcceptGroundMismatch),
        },
    )
    .unwrap();
    assert_eq!(mutated.substitutions().len(), 1);

    let elapsed = start.elapsed();
    println!("criterion 7 (mutation sensitivity): pass in {elapsed:?}");
}
