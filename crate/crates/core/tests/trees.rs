use num_complex::Complex64;
use proptest::prelude::*;
use std::collections::BTreeSet;
use std::sync::Arc;
use varactor_core::formal_expansion::*;
use varactor_core::fourier_core::*;
use varactor_core::resummation::resummed_orders;
use varactor_core::tree_engine::*;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn spec(alpha: f64, beta: f64, eps: f64) -> ProblemSpec {
    ProblemSpec::alpha_beta_sin(alpha, beta, 1.0, eps).unwrap()
}

fn all_trees(s: &ProblemSpec, k: usize, nu: &Mode, kind: ExpansionKind) -> Vec<Tree> {
    enumerate(s, k, nu, kind, u32::MAX, EnumerationLimits::default()).unwrap().collect()
}

fn has_unary_over_white(n: &Node) -> bool {
    (n.kind == NodeKind::Vertex && n.children.len() == 1 && n.children[0].kind == NodeKind::White) || n.children.iter().any(|c| has_unary_over_white(c))
}

#[test]
fn single_bullet_at_first_order() {
    let s = spec(2.0, 0.4, 0.1);
    for n in [1, -1] {
        let nu = Mode::scalar(n);
        let trees = all_trees(&s, 1, &nu, ExpansionKind::Formal);
        assert_eq!(trees.len(), 1);
        let expect = s.forcing().get(&nu) / (I * n as f64);
        assert!((value(&trees[0], &s) - expect).norm() < 1e-16);
        assert!((sum_class(1, &nu, &s, ExpansionKind::Formal, EnumerationLimits::default()).unwrap() - expect).norm() < 1e-16);
        let rec = lemma3_audit(&trees[0]).unwrap();
        assert_eq!((rec.endpoints, rec.vertices), (1, 0));
    }
}

#[test]
fn second_order_shapes() {
    let s = spec(1.0, 0.5, 0.1);
    let trees = all_trees(&s, 2, &Mode::scalar(1), ExpansionKind::Formal);
    let chains: Vec<&Tree> = trees.iter().filter(|t| t.root.children.len() == 1).collect();
    assert_eq!(chains.len(), 1);
    assert_eq!(chains[0].root.children[0].kind, NodeKind::Black);
    // the white/black pair appears in both orders
    let pairs: Vec<&Tree> = trees.iter().filter(|t| t.root.children.len() == 2).collect();
    assert_eq!(pairs.len(), 2);
    let kinds: BTreeSet<(String, String)> =
        pairs.iter().map(|t| (format!("{:?}", t.root.children[0].kind), format!("{:?}", t.root.children[1].kind))).collect();
    assert_eq!(kinds.len(), 2);
}

#[test]
fn shape_count_bound() {
    let s = spec(1.0, 0.5, 0.1);
    for k in 1..=6 {
        let mut shapes = BTreeSet::new();
        for nu in modes_within(1, 3) {
            for t in all_trees(&s, k, &nu, ExpansionKind::Formal) {
                shapes.insert(shape(&t.root));
            }
        }
        assert!(shapes.len() <= 1 << (2 * k - 1), "k={k}: {}", shapes.len());
    }
}

#[test]
fn chain_tree_modulus() {
    let f = TrigSeries::real_from_pairs(1, [(Mode::scalar(0), Complex64::new(1.0, 0.0)), (Mode::scalar(3), Complex64::new(0.2, 0.1))]).unwrap();
    let s3 = ProblemSpec::new(f, FrequencyVector::periodic(0.7), NonlinearitySpec::quadratic(), Complex64::new(0.1, 0.0)).unwrap();
    let nu = Mode::scalar(3);
    let w: f64 = 0.7 * 3.0;
    let mut node = Arc::new(Node { kind: NodeKind::Black, momentum: nu.clone(), order: 1, children: vec![] });
    for k in 2..=6 {
        node = Arc::new(Node { kind: NodeKind::Vertex, momentum: nu.clone(), order: k, children: vec![node] });
        let t = Tree { root: node.clone(), k, nu: nu.clone(), expansion: ExpansionKind::Formal };
        let expect = w.powi(k as i32 - 2) * s3.forcing().get(&nu).norm();
        assert!((value(&t, &s3).norm() - expect).abs() <= 1e-14 * expect);
        assert_eq!(lemma3_audit(&t).unwrap().unary_vertices, k - 1);
    }
}

#[test]
fn zero_mode_classes_give_the_constants() {
    let (alpha, beta) = (1.6, 0.7);
    let s = spec(alpha, beta, 0.1);
    let e = formal_orders(&s, 4).unwrap();
    let zero = Mode::scalar(0);
    let c2 = sum_class(2, &zero, &s, ExpansionKind::Formal, EnumerationLimits::default()).unwrap();
    assert!((c2 - Complex64::new(-beta * beta / (4.0 * alpha.sqrt()), 0.0)).norm() < 1e-15);
    for k in [3, 4] {
        let v = sum_class(k, &zero, &s, ExpansionKind::Formal, EnumerationLimits::default()).unwrap();
        assert!((v.re - e.constants[k]).abs() <= 1e-13 * e.constants[k].abs().max(1e-300) && v.im.abs() < 1e-14, "k={k}");
    }
}

#[test]
fn enumerated_trees_are_well_formed() {
    let s = spec(1.0, 0.5, 0.1);
    for kind in [ExpansionKind::Formal, ExpansionKind::Resummed] {
        for k in 1..=5 {
            for nu in modes_within(1, 3) {
                for t in all_trees(&s, k, &nu, kind) {
                    assert!(momentum_conserved(&t.root));
                    assert_eq!(t.root.momentum, nu);
                    assert!(!has_unary_over_white(&t.root));
                    let rec = lemma3_audit(&t).unwrap_or_else(|v| panic!("{v:?}"));
                    assert_eq!(rec.k, k);
                    let bullets = bullet_modes(&t);
                    let total = bullets.iter().fold(Mode::scalar(0), |a, m| a.add(m));
                    assert_eq!(total, nu);
                    assert_eq!(line_momenta(&t)[0], nu);
                }
            }
        }
    }
}

#[test]
fn budget_is_enforced() {
    let s = spec(1.0, 0.5, 0.1);
    let limits = EnumerationLimits { k_max: 6, max_trees: 10 };
    match enumerate(&s, 5, &Mode::scalar(1), ExpansionKind::Formal, u32::MAX, limits) {
        Err(varactor_core::Error::TreeBudget { .. }) => {}
        Err(e) => panic!("{e:?}"),
        Ok(_) => panic!("expected the budget to trip"),
    }
}

#[test]
fn quasi_periodic_trees_match_recursion() {
    let f = TrigSeries::real_from_pairs(
        2,
        [(Mode::zero(2), Complex64::new(1.0, 0.0)), (Mode::new(&[1, 0]), Complex64::new(0.0, -0.125)), (Mode::new(&[0, 1]), Complex64::new(0.0, -0.125))],
    )
    .unwrap();
    let s = ProblemSpec::new(f, FrequencyVector::golden(50), NonlinearitySpec::quadratic(), Complex64::new(0.02, 0.0)).unwrap();
    for kind in [ExpansionKind::Formal, ExpansionKind::Resummed] {
        let rec = match kind {
            ExpansionKind::Formal => formal_orders(&s, 4).unwrap(),
            ExpansionKind::Resummed => resummed_orders(&s, 4).unwrap(),
        };
        let mut gen = TreeGenerator::new(&s, kind, u32::MAX, EnumerationLimits::default());
        for k in 1..=4 {
            for nu in modes_within(2, 2) {
                let v = sum_with(&mut gen, k, &nu, &s, kind).unwrap();
                let r = rec.coeff(k, &nu);
                assert!((v - r).norm() <= 1e-12 * r.norm().max(1e-300) || (v - r).norm() < 1e-300, "{kind:?} k={k} nu={nu:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tree_sums_equal_recursion(alpha in 0.2f64..5.0, beta in 0.05f64..1.0, eps in 0.01f64..0.2) {
        let s = spec(alpha, beta, eps);
        let formal = formal_orders(&s, 4).unwrap();
        let resummed = resummed_orders(&s, 4).unwrap();
        for (kind, rec) in [(ExpansionKind::Formal, &formal), (ExpansionKind::Resummed, &resummed)] {
            let mut gen = TreeGenerator::new(&s, kind, u32::MAX, EnumerationLimits::default());
            for k in 1..=4 {
                for nu in modes_within(1, 3) {
                    let v = sum_with(&mut gen, k, &nu, &s, kind).unwrap();
                    let r = rec.coeff(k, &nu);
                    prop_assert!((v - r).norm() <= 1e-12 * r.norm() || (v - r).norm() == 0.0);
                }
            }
        }
    }
}
