use std::collections::HashMap;
use std::time::Instant;

use proptest::prelude::*;
use splitfree::bassserre::SplittingSpec;
use splitfree::decider::{decide_with, DecideOptions, WitnessSide};
use splitfree::vflift::{
    decide_vf, decide_vf_with, generates_free_group, verify_vf_verdict, GeneratorSpec, PresentationSpec, VfEvidence,
    VfOptions, VfPresentation, VfSplittingSpec, VfVerdict,
};
use splitfree::words::{cyclic_compare, CyclicRelation, CyclicWord, Word};
use splitfree::Error;

/// Regular right action of the permutation group generated by `gens`,
/// with element 0 the identity.
fn regular(gens: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = gens[0].len();
    let compose = |a: &Vec<usize>, b: &Vec<usize>| (0..n).map(|i| b[a[i]]).collect::<Vec<_>>();
    let mut elems: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(elems[0].clone(), 0)]);
    let mut i = 0;
    while i < elems.len() {
        for g in gens {
            let next = compose(&elems[i], g);
            if !index.contains_key(&next) {
                index.insert(next.clone(), elems.len());
                elems.push(next);
            }
        }
        i += 1;
    }
    gens.iter().map(|g| elems.iter().map(|e| index[&compose(e, g)]).collect()).collect()
}

fn cyclic_shift(n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|i| (i + k) % n).collect()
}

fn pres_spec(names: &str, images: Vec<Vec<usize>>, relators: &[&str]) -> PresentationSpec {
    let q_size = images[0].len();
    PresentationSpec {
        generators: names.chars().zip(images).map(|(c, image)| GeneratorSpec { name: c.to_string(), image }).collect(),
        relators: relators.iter().map(|s| s.to_string()).collect(),
        q_size,
    }
}

/// `<r, s | r^3, s^2>` onto `Z/6` with `r -> 2`, `s -> 3`.
fn modular() -> PresentationSpec {
    pres_spec("rs", vec![cyclic_shift(6, 2), cyclic_shift(6, 3)], &["rrr", "ss"])
}

fn free2() -> PresentationSpec {
    pres_spec("ab", vec![vec![0], vec![0]], &[])
}

fn w(p: &VfPresentation, s: &str) -> splitfree::vflift::GroupElement {
    p.parse(s).unwrap()
}

fn corpus() -> Vec<PresentationSpec> {
    let s3 = regular(&[vec![1, 0, 2], vec![1, 2, 0]]);
    let klein = regular(&[vec![1, 0, 3, 2], vec![2, 3, 0, 1], vec![3, 2, 1, 0]]);
    vec![
        free2(),
        pres_spec("ab", vec![cyclic_shift(2, 1), cyclic_shift(2, 0)], &[]),
        pres_spec("ab", vec![cyclic_shift(3, 1), cyclic_shift(3, 0)], &[]),
        modular(),
        pres_spec("sr", s3.clone(), &["ss", "rrr"]),
        pres_spec("st", vec![cyclic_shift(2, 1), cyclic_shift(2, 1)], &["ss", "tt"]),
        pres_spec("xy", vec![cyclic_shift(3, 1), cyclic_shift(3, 1)], &["xxx", "yyy"]),
        pres_spec("xy", vec![cyclic_shift(4, 2), cyclic_shift(4, 1)], &["xx", "yyyy"]),
        pres_spec("sa", vec![cyclic_shift(2, 1), cyclic_shift(2, 0)], &["ss"]),
        pres_spec("abc", klein, &["aa", "bb", "cc"]),
        pres_spec("xy", vec![cyclic_shift(12, 3), cyclic_shift(12, 2)], &["xxxx", "yyyyyy"]),
        pres_spec("xya", vec![cyclic_shift(12, 4), cyclic_shift(12, 3), cyclic_shift(12, 1)], &["xxx", "yyyy"]),
    ]
}

fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

#[test]
fn free_kernels_have_the_euler_rank() {
    for spec in corpus() {
        let p = VfPresentation::new(&spec).unwrap();
        assert_eq!(p.kernel_rank() as i64, p.euler_rank(), "{spec:?}");
        for i in 1..=p.kernel_rank() {
            assert_eq!(p.coset(p.kernel_generator(i)), 0);
        }
    }
}

#[test]
fn trivial_quotient_and_index_two() {
    let p = VfPresentation::new(&free2()).unwrap();
    assert_eq!(p.kernel_rank(), 2);
    let l = p.lift_multiword(&w(&p, "abAB")).unwrap();
    assert_eq!(l.members.len(), 1);
    assert_eq!(l.power.to_string(), "abAB");

    let p = VfPresentation::new(&corpus()[1]).unwrap();
    let l = p.lift_multiword(&w(&p, "b")).unwrap();
    assert_eq!(l.order, 1);
    assert_eq!(l.members.len(), 2);
    assert_eq!(l.normalized.roots().len(), 2);
    let expanded: Vec<String> = l.members.iter().map(|m| p.format(&p.expand(m))).collect();
    assert_eq!(expanded, vec!["b", "abA"]);
}

#[test]
fn modular_group_example() {
    let p = VfPresentation::new(&modular()).unwrap();
    assert_eq!(p.kernel_rank(), 2);
    let given: Vec<Word> = ["srsrr", "srrsr"].iter().map(|s| p.kernel_word(&w(&p, s)).unwrap()).collect();
    assert!(generates_free_group(&given, p.kernel_basis()));

    let h = w(&p, "sr");
    let lift = p.lift_multiword(&h).unwrap();
    assert_eq!(lift.order, 6);
    // sr maps onto Q, so coset representatives can be taken to be powers of
    // sr times kernel elements, and all six conjugates of w are conjugate
    // in the kernel
    for m in &lift.members {
        let c = CyclicWord::from_word(m).unwrap();
        let first = CyclicWord::from_word(&lift.members[0]).unwrap();
        assert_eq!(cyclic_compare(&c, &first).unwrap(), CyclicRelation::EqualClass);
    }
    assert_eq!(lift.normalized.roots().len(), 1);

    let m = p.conjugation_matrix(&h);
    let m3 = matmul(&matmul(&m, &m), &m);
    assert_eq!(m3, vec![vec![-1, 0], vec![0, -1]]);
    assert_eq!(matmul(&m3, &m3), vec![vec![1, 0], vec![0, 1]]);
    assert!(!p.is_factor(&h).unwrap());
}

#[test]
fn commensurators() {
    let p = VfPresentation::new(&free2()).unwrap();
    assert_eq!(p.commensurator(&w(&p, "ab")).unwrap().index(), 1);
    let c = p.commensurator(&w(&p, "aa")).unwrap();
    let reps: Vec<String> = c.representatives.iter().map(|g| p.format(g)).collect();
    assert_eq!(reps, vec!["", "a"]);
    assert!(p.is_factor(&w(&p, "ab")).unwrap());
    assert!(!p.is_factor(&w(&p, "abAB")).unwrap());
    assert!(!p.is_factor(&w(&p, "aa")).unwrap());

    let p = VfPresentation::new(&modular()).unwrap();
    let c = p.commensurator(&w(&p, "srsr")).unwrap();
    assert!(c.index() >= 2);
    let h = w(&p, "srsr");
    let sr = w(&p, "sr");
    // sr lies in the coset of some representative
    assert!(c.representatives.iter().any(|g| {
        let z = p.mul(&p.inverse(g), &sr);
        (-4..=4).any(|n| p.pow(&h, n) == z)
    }));
}

#[test]
fn finite_order_is_refused() {
    let p = VfPresentation::new(&modular()).unwrap();
    assert_eq!(p.lift_multiword(&w(&p, "srS")).unwrap_err(), Error::FiniteOrder);
    assert_eq!(p.commensurator(&w(&p, "rr")).unwrap_err(), Error::FiniteOrder);
}

#[test]
fn lifts_do_not_depend_on_the_tree() {
    for spec in corpus() {
        let p = VfPresentation::new(&spec).unwrap();
        let n = p.generator_count() as i32;
        let order: Vec<i32> = (1..=n).rev().flat_map(|g| [-g, g]).collect();
        let q = VfPresentation::with_letter_order(&spec, Some(&order)).unwrap();
        for h in ["ab", "sr", "xy", "st", "sa", "abc", "xya", "aB"] {
            let Ok(g) = p.parse(h) else { continue };
            let (Ok(lp), Ok(lq)) = (p.lift_multiword(&g), q.lift_multiword(&g)) else {
                continue;
            };
            let moved: Vec<CyclicWord> = lp
                .normalized
                .roots()
                .iter()
                .map(|r| CyclicWord::from_word(&q.kernel_word(&p.expand(&r.to_word())).unwrap()).unwrap())
                .collect();
            assert_eq!(moved.len(), lq.normalized.roots().len(), "{h}");
            for r in &moved {
                assert!(
                    lq.normalized.roots().iter().any(|s| s == r || *s == r.inverse()),
                    "{h}: {r} not among lifted roots"
                );
            }
        }
    }
}

#[test]
fn factors_square_to_non_factors() {
    for spec in corpus() {
        let p = VfPresentation::new(&spec).unwrap();
        // minimization enumerates Whitehead moves, exponential in the rank
        if p.kernel_rank() > 4 {
            continue;
        }
        for h in ["a", "ab", "sr", "xy", "st", "sa", "abc", "xya", "aab", "srsrr"] {
            let Ok(g) = p.parse(h) else { continue };
            if p.image_order(&g) > 0 && p.lift_multiword(&g).is_err() {
                continue;
            }
            if p.is_factor(&g).unwrap() {
                assert!(!p.is_factor(&p.pow(&g, 2)).unwrap(), "{h}");
            }
        }
    }
}

fn two_copies(c: &str) -> VfSplittingSpec {
    VfSplittingSpec::Amalgam { a: modular(), b: modular(), c_a: c.into(), c_b: c.into() }
}

#[test]
fn amalgams_of_the_modular_group_are_not_virtually_free() {
    let start = Instant::now();
    let spec = two_copies("sr");
    let v = decide_vf(&spec).unwrap();
    let VfVerdict::NotVirtuallyFree { evidence: VfEvidence::Detour { certificates }, reports } = &v else {
        panic!("{v:?}")
    };
    assert_eq!(certificates.iter().map(|c| c.radius).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    assert!(reports.iter().all(|r| !r.factor && !r.lift_basic));
    assert!(verify_vf_verdict(&spec, &v));
    let json = v.to_json();
    assert_eq!(json["schema"], "csl/1");
    let back: VfVerdict = serde_json::from_value(json).unwrap();
    assert_eq!(back, v);
    assert!(start.elapsed().as_secs() < 120);

    let quick = VfOptions { radii: vec![1, 2], ..Default::default() };
    for c in ["srsrr", "srr"] {
        let spec = VfSplittingSpec::Amalgam { a: modular(), b: modular(), c_a: c.into(), c_b: "sr".into() };
        let v = decide_vf_with(&spec, &quick).unwrap();
        assert!(!v.is_virtually_free(), "{c}");
        assert!(verify_vf_verdict(&spec, &v), "{c}");
    }
}

#[test]
fn hnn_extensions_of_the_modular_group_are_not_virtually_free() {
    let spec = VfSplittingSpec::Hnn { a: modular(), c1: "sr".into(), c2: "rs".into() };
    let v = decide_vf(&spec).unwrap();
    assert!(matches!(v, VfVerdict::NotVirtuallyFree { evidence: VfEvidence::BaumslagSolitar { .. }, .. }), "{v:?}");
    assert!(verify_vf_verdict(&spec, &v));

    let quick = VfOptions { radii: vec![1, 2], ..Default::default() };
    let spec = VfSplittingSpec::Hnn { a: modular(), c1: "sr".into(), c2: "srsrr".into() };
    let v = decide_vf_with(&spec, &quick).unwrap();
    assert!(!v.is_virtually_free(), "{v:?}");
    assert!(verify_vf_verdict(&spec, &v));
}

#[test]
fn torsion_free_cases_match_the_free_decider() {
    let spec = VfSplittingSpec::Amalgam { a: free2(), b: free2(), c_a: "a".into(), c_b: "abAB".into() };
    let v = decide_vf(&spec).unwrap();
    assert!(matches!(v, VfVerdict::VirtuallyFree { side: WitnessSide::A, .. }));
    assert!(verify_vf_verdict(&spec, &v));

    let spec = VfSplittingSpec::Hnn { a: free2(), c1: "a".into(), c2: "b".into() };
    let v = decide_vf(&spec).unwrap();
    assert!(v.is_virtually_free());
    assert!(verify_vf_verdict(&spec, &v));
    let VfVerdict::VirtuallyFree { moves, .. } = &v else { unreachable!() };
    let mut tampered = v.clone();
    if let VfVerdict::VirtuallyFree { side, .. } = &mut tampered {
        *side = WitnessSide::A;
    }
    assert!(!verify_vf_verdict(&spec, &tampered));
    assert!(moves.len() < 100);

    let spec = VfSplittingSpec::Hnn { a: free2(), c1: "a".into(), c2: "aa".into() };
    let v = decide_vf(&spec).unwrap();
    assert!(matches!(v, VfVerdict::NotVirtuallyFree { evidence: VfEvidence::BaumslagSolitar { .. }, .. }));
    assert!(verify_vf_verdict(&spec, &v));
}

#[test]
fn spec_json_round_trip() {
    let json = serde_json::json!({
        "type": "hnn",
        "A": {"generators": [{"name": "r", "image": [2, 3, 4, 5, 0, 1]}, {"name": "s", "image": [3, 4, 5, 0, 1, 2]}],
              "relators": ["rrr", "ss"], "q_size": 6},
        "c1": "sr", "c2": "rs"
    });
    let spec = VfSplittingSpec::from_json(&json.to_string()).unwrap();
    assert_eq!(spec, VfSplittingSpec::Hnn { a: modular(), c1: "sr".into(), c2: "rs".into() });
    assert_eq!(serde_json::to_value(&spec).unwrap(), json);
}

fn element_strategy(names: &'static str, max: usize) -> impl Strategy<Value = String> {
    let letters: Vec<char> = names.chars().flat_map(|c| [c, c.to_ascii_uppercase()]).collect();
    proptest::collection::vec(proptest::sample::select(letters), 0..=max).prop_map(|v| v.into_iter().collect())
}

fn free_word(rank: usize, max: usize) -> impl Strategy<Value = Vec<i32>> {
    let letters: Vec<i32> = (1..=rank as i32).flat_map(|x| [x, -x]).collect();
    proptest::collection::vec(proptest::sample::select(letters), 0..=max)
}

fn two_letter_word(max: usize) -> impl Strategy<Value = Word> {
    free_word(2, max)
        .prop_map(|l| splitfree::words::reduce_word(&l, splitfree::words::Basis::new(2).unwrap()).unwrap())
        .prop_filter("nontrivial", |w| !w.is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rewriting_recombines(s in element_strategy("rs", 8), pick in 0usize..12) {
        let specs = corpus();
        let spec = if pick % 2 == 0 { modular() } else { specs[pick % specs.len()].clone() };
        let p = VfPresentation::new(&spec).unwrap();
        let names: String = spec.generators.iter().map(|g| g.name.clone()).collect();
        let mapped: String = s.chars().map(|c| {
            let i = "rs".find(c.to_ascii_lowercase()).unwrap() % names.len();
            let n = names.chars().nth(i).unwrap();
            if c.is_ascii_uppercase() { n.to_ascii_uppercase() } else { n }
        }).collect();
        let g = p.parse(&mapped).unwrap();
        let (k, point) = p.rewrite(&g);
        prop_assert_eq!(point, p.coset(&g));
        prop_assert_eq!(p.mul(&p.expand(&k), p.coset_rep(point)), g);
    }

    #[test]
    fn expanding_then_rewriting_is_reduction(raw in free_word(2, 10)) {
        let p = VfPresentation::new(&modular()).unwrap();
        let f = splitfree::words::reduce_word(&raw, p.kernel_basis()).unwrap();
        prop_assert_eq!(p.kernel_word(&p.expand(&f)).unwrap(), f);
    }

    #[test]
    fn trivial_quotient_agrees_with_the_free_decider(a in two_letter_word(6), b in two_letter_word(6)) {
        let vf = VfSplittingSpec::Amalgam { a: free2(), b: free2(), c_a: a.to_string(), c_b: b.to_string() };
        let quick = VfOptions { radii: vec![], ..Default::default() };
        let free = decide_with(&SplittingSpec::amalgam(a, b).unwrap(), &DecideOptions { radii: vec![], ..Default::default() }).unwrap();
        prop_assert_eq!(decide_vf_with(&vf, &quick).unwrap().is_virtually_free(), free.is_free());
    }
}
