use proptest::prelude::*;
use wz_symbolic::poly::NORMAL;
use wz_symbolic::*;

fn terms(line: &str, unknowns: &[&str]) -> Vec<Term> {
    parse_terms(line, unknowns).unwrap()
}

fn poly(lines: &[&str], unknowns: &[&str]) -> Poly {
    let all: Vec<Term> = lines.iter().flat_map(|l| terms(l, unknowns)).collect();
    expand_terms(&all).unwrap()
}

fn shown(cs: &[Constraint]) -> Vec<String> {
    cs.iter().map(|c| c.to_string()).collect()
}

#[test]
fn dimension_examples() {
    let t4 = Target::a4();
    let t = &terms("boundary b[i] F[j,k] eps[i,j,k] f1", &["f1"])[0];
    assert_eq!(t.dimension(), 3);
    assert!(dimension_check(t, &t4));
    for t in terms("boundary F[i,j] eps[i,j,k] D[k](f3)", &["f3"]) {
        assert_eq!(t.dimension(), 3);
        assert!(dimension_check(&t, &t4));
    }
    let bbb = &terms("boundary b[i] b[j] b[k] eps[i,j,k]", &[])[0];
    assert!(dimension_check(bbb, &t4));
    assert!(expand_terms(&[bbb.clone()]).unwrap().is_zero());
    assert!(!dimension_check(&terms("boundary b[i] b[i]", &[])[0], &t4));
}

#[test]
fn antisymmetric_entry_is_dropped() {
    let text = "ansatz a4\nvariation chiral\nunknowns f1\nboundary dphi b[i] b[j] b[k] eps[i,j,k] f1\nboundary dphi b[i] F[n,i] f1\n";
    let a = Ansatz::parse(text).unwrap();
    assert_eq!(a.entries.len(), 1);
    assert_eq!(a.dropped.len(), 1);
}

#[test]
fn shipped_terms_have_target_dimension() {
    for a in [Ansatz::a45(), Ansatz::a3stru()] {
        for t in a.terms() {
            assert_eq!(t.dimension(), a.target.dimension(t.domain), "{t}");
        }
    }
    assert_eq!(Target::a4().dimension(Domain::Boundary), 3);
    assert_eq!(Target::a3().dimension(Domain::Boundary), 3);
}

#[test]
fn unknown_symbol_is_a_schema_error() {
    assert!(matches!(parse_terms("boundary dphi q[i] b[i]", &[]), Err(Error::Schema(_))));
    assert!(matches!(parse_terms("boundary dphi b[i] b[i] g7", &["f1"]), Err(Error::Schema(_))));
}

#[test]
fn wrong_dimension_is_rejected() {
    let text = "ansatz a4\nvariation chiral\nunknowns f1\nboundary dphi b[i] b[i] f1\n";
    assert!(matches!(Ansatz::parse(text), Err(Error::Dimension(_))));
}

#[test]
fn proportional_entries_are_rejected() {
    let text = "ansatz a4\nvariation chiral\nunknowns f1\nboundary dphi b[i] F[n,i] f1\nboundary 3 dphi F[n,j] b[j] f1\n";
    assert!(matches!(Ansatz::parse(text), Err(Error::Structural(_))));
}

#[test]
fn uncontracted_index_lists_offender() {
    let t = terms("boundary dphi b[i] F[n,j]", &[]);
    match expand_terms(&t) {
        Err(Error::Structural(v)) => assert!(v[0].contains("index 'i'")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn chiral_variation_product_rule() {
    // f(θ)_{:k} → −2δφ f″θ_{:k} − 2(δφ)_{:k}f′
    let t = terms("boundary A[k] D[k](f3)", &["f3"]);
    let varied: Vec<Term> = t.iter().flat_map(|t| chiral_variation(t, 1)).collect();
    let expected = poly(&["boundary -2 dphi1 theta[:k] A[k] f3''", "boundary -2 dphi1[:k] A[k] f3'"], &["f3"]);
    assert_eq!(expand_terms(&varied).unwrap(), expected);
}

#[test]
fn chiral_variation_of_axial_field() {
    let t = terms("boundary b[i] A[i]", &[]);
    let varied = chiral_variation(&t[0], 1);
    assert_eq!(expand_terms(&varied).unwrap(), poly(&["boundary dphi1[:i] A[i]"], &[]));
    let normal = terms("boundary b[n] F[n,i:i]", &[]);
    let varied = chiral_variation(&normal[0], 2);
    assert_eq!(expand_terms(&varied).unwrap(), poly(&["boundary dphi2[:n] F[n,i:i]"], &[]));
}

#[test]
fn field_strength_is_chirally_inert() {
    let t = terms("boundary F[i,j] F[i,j] dA1[n]", &[]);
    assert!(chiral_variation(&t[0], 1).is_empty());
}

#[test]
fn gauge_variation_hits_a_and_f_only() {
    let t = terms("boundary b[i] A[i] F[n,j] A[j]", &[]);
    assert_eq!(gauge_variation(&t[0], 1).len(), 3);
    let t = terms("boundary b[i] theta[:i] f1", &["f1"]);
    assert!(gauge_variation(&t[0], 1).is_empty());
}

#[test]
fn ibp_single_step() {
    let lhs = poly(&["boundary dphi1[:k] A[k] f1"], &["f1"]);
    let rhs = poly(&["boundary -1 dphi1 D[k](A[k] f1)"], &["f1"]);
    assert_eq!(ibp_normalize(&lhs).unwrap(), rhs);
}

#[test]
fn ibp_leaves_underived_test_field() {
    let p = poly(&["boundary dphi1 b[i] F[n,i:j,j] f2"], &["f2"]);
    assert_eq!(ibp_normalize(&p).unwrap(), p);
}

#[test]
fn ibp_antisymmetric_pair() {
    let p = poly(&["boundary dphi1[:j] dphi2[:k] eps[i,j,k] A[i]", "boundary -1 dphi2[:j] dphi1[:k] eps[i,j,k] A[i]"], &[]);
    let hand = poly(&["boundary -2 dphi1 dphi2[:k] A[i:j] eps[i,j,k]"], &[]);
    assert_eq!(ibp_normalize(&p).unwrap(), hand);
}

#[test]
fn normal_derivatives_never_move() {
    let p = poly(&["boundary dphi1[:n] A[n]"], &[]);
    assert!(matches!(integrate_by_parts(&p, 1, NORMAL), Err(Error::Structural(_))));
    // They also survive normalization untouched.
    assert_eq!(ibp_normalize(&p).unwrap(), p);
    let bulk = poly(&["bulk dphi1[:a] A[a]"], &[]);
    assert!(matches!(ibp_normalize(&bulk), Err(Error::Structural(_))));
}

#[test]
fn wess_zumino_for_general_ansatz() {
    let cs = wz_constraints(&Ansatz::a45()).unwrap();
    assert_eq!(shown(&cs), vec!["f1 - 2 f3' = 0", "f2 - 2 f4' = 0"]);
    let c = &cs[0];
    assert_eq!(c.terms[0].function.as_deref(), Some("f1"));
    assert_eq!((c.terms[1].derivative_order, c.terms[1].coefficient.as_str()), (1, "-2"));
}

#[test]
fn wess_zumino_solved_ansatz_is_consistent() {
    let text = "ansatz a4\nvariation chiral\nunknowns f3 f4 f5\n\
        bulk dphi eps4[a,b,c,d] F[a,b] F[c,d]\n\
        boundary 2 dphi b[i] F[j,k] eps[i,j,k] f3'\n\
        boundary 2 dphi b[i] F[n,i] f4'\n\
        boundary dphi F[i,j] D[k](f3) eps[i,j,k]\n\
        boundary dphi F[n,i] D[i](f4)\n\
        boundary dphi f5 F[n,i:i]\n";
    assert!(wz_constraints(&Ansatz::parse(text).unwrap()).unwrap().is_empty());
}

#[test]
fn volume_term_alone_is_consistent() {
    let text = "ansatz a4\nvariation chiral\nunknowns\nbulk -1/32 dphi eps4[a,b,c,d] F[a,b] F[c,d]\n";
    let a = Ansatz::parse(text).unwrap();
    assert!(a.normalized_commutator().unwrap().is_zero());
    assert!(wz_constraints(&a).unwrap().is_empty());
}

#[test]
fn second_variation_symmetry() {
    let cs = symmetry_constraint(&Ansatz::a3stru()).unwrap();
    assert_eq!(shown(&cs), vec!["G0' = 0"]);
    // The surviving integrand is ε^{ijk}δA¹_iδA²_kθ_{:j}G₀′ up to normalisation.
    let p = Ansatz::a3stru().normalized_commutator().unwrap();
    let hand = poly(&["boundary dA1[i] dA2[k] theta[:j] eps[i,j,k] G0'"], &["G0"]);
    assert!(p.ratio_to(&hand).is_some(), "{p}");
}

#[test]
fn constant_coefficient_gives_no_constraint() {
    let text = "ansatz a3\nvariation gauge\nunknowns G1\nboundary dA[i] eps[i,j,k] A[k:j]\nboundary dA[i] eps[i,j,k] D[j](b[k] G1)\n";
    assert!(symmetry_constraint(&Ansatz::parse(text).unwrap()).unwrap().is_empty());
}

#[test]
fn added_theta_dependent_term_is_constrained() {
    let text = "ansatz a3\nvariation gauge\nunknowns H\nboundary dA[i] eps[i,j,k] A[k:j]\nboundary dA[i] eps[i,j,k] D[j](A[k] H)\n";
    assert_eq!(shown(&symmetry_constraint(&Ansatz::parse(text).unwrap()).unwrap()), vec!["H' = 0"]);
}

#[test]
fn wrong_variation_kind_is_refused() {
    assert!(matches!(wz_constraints(&Ansatz::a3stru()), Err(Error::Schema(_))));
    assert!(matches!(symmetry_constraint(&Ansatz::a45()), Err(Error::Schema(_))));
}

#[test]
fn constraints_serialize() {
    let cs = wz_constraints(&Ansatz::a45()).unwrap();
    let v = serde_json::to_value(&cs).unwrap();
    assert_eq!(v[1]["terms"][1]["function"], "f4");
    assert_eq!(v[1]["terms"][1]["derivative_order"], 1);
}

#[test]
fn printer_round_trips() {
    for a in [Ansatz::a45(), Ansatz::a3stru()] {
        let unknowns: Vec<&str> = a.unknowns.iter().map(String::as_str).collect();
        for t in a.terms() {
            let back = parse_terms(&t.to_string(), &unknowns).unwrap();
            assert_eq!(back, vec![t.clone()]);
        }
    }
}

const POOL: &[&str] = &[
    "boundary b[i] b[i] f1",
    "boundary theta[:i] b[i] f2",
    "boundary F[i,j] theta[:k] eps[i,j,k] f3",
    "boundary b[i] F[n,i] f4",
    "boundary theta[:i,i] f5",
    "boundary b[n] b[i:i] f1",
    "boundary b[i] F[j,k] eps[i,j,k] f2",
    "boundary b[n] theta[:n] f3",
];

const VARIED_POOL: &[&str] = &[
    "boundary dphi1[:k] A[k] f1",
    "boundary dphi1[:j] dphi2[:k] eps[i,j,k] A[i]",
    "boundary dphi1[:i,i] dphi2 f2",
    "boundary dphi2[:i] dphi1[:n] b[i] f3",
    "boundary dphi1[:j] theta[:k] F[i,n] eps[i,j,k] f4",
    "boundary dphi1 dphi2[:i] b[i] f5",
];

const UNKNOWNS: &[&str] = &["f1", "f2", "f3", "f4", "f5"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalization_is_idempotent(pick in proptest::collection::vec((0..VARIED_POOL.len(), -3i64..4), 1..5)) {
        let lines: Vec<String> = pick.iter().map(|(i, c)| VARIED_POOL[*i].replacen("boundary", &format!("boundary {c}"), 1)).collect();
        let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        let once = ibp_normalize(&poly(&refs, UNKNOWNS)).unwrap();
        prop_assert_eq!(ibp_normalize(&once).unwrap(), once);
    }

    #[test]
    fn chiral_variations_commute(pick in proptest::collection::vec((0..POOL.len(), 1i64..4), 1..4)) {
        let mut raw = Vec::new();
        for (i, c) in &pick {
            let t = terms(&POOL[*i].replacen("boundary", &format!("boundary {c}"), 1), UNKNOWNS);
            for t in &t {
                for a in chiral_variation(t, 2) {
                    raw.extend(chiral_variation(&a, 1));
                }
                for a in chiral_variation(t, 1) {
                    raw.extend(chiral_variation(&a, 2).into_iter().map(|x| x.scaled((-1).into())));
                }
            }
        }
        prop_assert!(ibp_normalize(&expand_terms(&raw).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn constraints_ignore_term_order(seed in any::<u64>()) {
        let header: Vec<&str> = wz_symbolic::A45.lines().filter(|l| !l.starts_with("boundary") && !l.starts_with("bulk")).collect();
        let mut body: Vec<&str> = wz_symbolic::A45.lines().filter(|l| l.starts_with("boundary") || l.starts_with("bulk")).collect();
        let mut s = seed;
        for i in (1..body.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            body.swap(i, (s >> 33) as usize % (i + 1));
        }
        let text = format!("{}\n{}\n", header.join("\n"), body.join("\n"));
        let cs = wz_constraints(&Ansatz::parse(&text).unwrap()).unwrap();
        prop_assert_eq!(shown(&cs), vec!["f1 - 2 f3' = 0".to_string(), "f2 - 2 f4' = 0".to_string()]);
    }
}
