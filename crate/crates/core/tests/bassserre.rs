use splitfree::bassserre::{
    build_ball, check_certificate, detour_certificate, gamma, verify_certificate, CertificatePoint,
    CertificatePosition, CertificateSegment, Complex, ComplexModel, Point, Position, SplittingSpec,
    DEFAULT_POINT_BUDGET,
};
use splitfree::words::{Basis, Word};
use splitfree::Error;

fn amalgam(a: &str, b: &str) -> SplittingSpec {
    serde_json::from_value(serde_json::json!({"type": "amalgam", "rankA": 2, "rankB": 2, "wA": a, "wB": b})).unwrap()
}

fn hnn(rank: usize, w1: &str, w2: &str) -> SplittingSpec {
    serde_json::from_value(serde_json::json!({"type": "hnn", "rankA": rank, "w1": w1, "w2": w2})).unwrap()
}

fn base_vertex(w: &str) -> Point {
    Point { space: 0, position: Position::Vertex(Word::parse(w, Basis::new(2).unwrap()).unwrap()) }
}

fn complex(spec: &SplittingSpec) -> Complex {
    Complex::new(ComplexModel::from_spec(spec).unwrap())
}

#[test]
fn spec_json_round_trip() {
    let spec = amalgam("abAB", "xyXY");
    let SplittingSpec::Amalgam { w_b, .. } = &spec else { panic!() };
    assert_eq!(w_b.to_string(), "abAB");
    let text = serde_json::to_string(&spec).unwrap();
    assert!(text.contains("\"wB\":\"xyXY\""));
    assert_eq!(SplittingSpec::from_json(&text).unwrap(), spec);
    assert!(SplittingSpec::from_json(r#"{"type":"hnn","rankA":2,"w1":"","w2":"a"}"#).is_err());
}

#[test]
fn radius_zero_ball_is_the_center() {
    for spec in [amalgam("abAB", "xyXY"), amalgam("a", "xx"), hnn(2, "abAB", "b")] {
        let ball = build_ball(&spec, 0).unwrap();
        assert_eq!(ball.points.len(), 1);
        assert_eq!(ball.points[0], (base_vertex(""), 0));
        assert!(ball.edges.is_empty());
    }
}

#[test]
fn a_edges_have_the_b_word_length() {
    let ball = build_ball(&amalgam("a", "xx"), 2).unwrap();
    assert_eq!(ball.distance_to(&base_vertex("a")), Some(2));
    assert_eq!(ball.distance_to(&base_vertex("b")), Some(2));
    assert_eq!(ball.distance_to(&base_vertex("ab")), None);
}

#[test]
fn gamma_follows_the_edge_word() {
    let spec = amalgam("abAB", "xyXY");
    assert_eq!(gamma(&spec, 0).unwrap(), base_vertex(""));
    assert_eq!(gamma(&spec, 16).unwrap(), base_vertex("abAB"));
    assert_eq!(gamma(&spec, 32).unwrap(), base_vertex("abABabAB"));
    assert_eq!(gamma(&spec, -16).unwrap(), base_vertex("baBA"));
    assert_eq!(gamma(&spec, 4).unwrap(), base_vertex("a"));
    assert_eq!(
        gamma(&spec, 5).unwrap().position,
        Position::Edge { from: Word::parse("a", Basis::new(2).unwrap()).unwrap(), generator: 2, offset: 1 }
    );
    // rotations of the edge word give their own base line
    let spec = amalgam("BabA", "xyXY");
    assert_eq!(gamma(&spec, 16).unwrap(), base_vertex("BabA"));
    assert_eq!(gamma(&spec, -4).unwrap(), base_vertex("a"));
}

#[test]
fn surface_vertex_space_is_isometrically_embedded() {
    let spec = amalgam("abAB", "xyXY");
    let ball = build_ball(&spec, 8).unwrap();
    let basis = Basis::new(2).unwrap();
    let mut seen = 0;
    for (p, d) in &ball.points {
        if p.space != 0 {
            continue;
        }
        let tree = match &p.position {
            Position::Vertex(w) => 4 * w.len() as u32,
            Position::Edge { from, generator, offset } => {
                let next = from.mul(&Word::generator(basis, *generator).unwrap());
                (4 * from.len() as u32 + offset).min(4 * next.len() as u32 + 4 - offset)
            }
        };
        assert_eq!(*d, tree, "{p:?}");
        seen += 1;
    }
    // all 17 tree vertices of radius two, plus subdivision points
    assert_eq!(
        ball.points.iter().filter(|(p, _)| p.space == 0 && matches!(p.position, Position::Vertex(_))).count(),
        17
    );
    assert!(seen > 17);
}

fn distances_along_gamma(spec: &SplittingSpec, s: i64, reach: u32) -> Vec<(i64, Option<u32>)> {
    let mut cx = complex(spec);
    let dist = cx.distances(&cx.gamma(s), reach, DEFAULT_POINT_BUDGET).unwrap();
    (-(reach as i64)..=reach as i64).map(|dt| (dt, dist.get(&cx.gamma(s + dt)).copied())).collect()
}

#[test]
fn gamma_is_a_geodesic_for_amalgams() {
    for spec in [amalgam("abAB", "xyXY"), amalgam("aa", "xx"), amalgam("aab", "xyxY")] {
        for s in [0, 3, 7, -5] {
            for (dt, d) in distances_along_gamma(&spec, s, 10) {
                assert_eq!(d, Some(dt.unsigned_abs() as u32), "{spec:?} s={s} dt={dt}");
            }
        }
    }
}

#[test]
fn gamma_is_a_quasi_geodesic_for_hnn() {
    let spec = hnn(2, "abAB", "b");
    let fit = splitfree::bassserre::quasi_geodesic_fit(&spec, &[0, 1, 2], 7).unwrap();
    assert!(fit.lambda >= 1.0 && fit.lambda <= 8.0, "{fit:?}");
    for &(dt, d) in &fit.samples {
        assert!(d as f64 >= dt.abs() as f64 / fit.lambda - fit.epsilon - 1e-9);
        assert!(d as i64 <= dt.abs());
    }
}

#[test]
fn balls_are_complete_and_symmetric() {
    for spec in [amalgam("abAB", "xyXY"), hnn(2, "abAB", "b"), amalgam("aa", "xxy")] {
        let big = build_ball(&spec, 6).unwrap();
        let small = build_ball(&spec, 4).unwrap();
        let mut inner: Vec<_> = big.points.iter().filter(|(_, d)| *d <= 4).cloned().collect();
        inner.sort();
        let mut got = small.points.clone();
        got.sort();
        assert_eq!(inner, got);
        let mut cx = small.complex.clone();
        let center = cx.base_point();
        for (p, d) in small.points.iter().step_by(7).take(20) {
            let from_p = cx.distances(p, *d, DEFAULT_POINT_BUDGET).unwrap();
            assert_eq!(from_p.get(&center), Some(d));
        }
    }
}

#[test]
fn commensurable_hnn_roots_are_refused() {
    assert_eq!(build_ball(&hnn(2, "a", "aa"), 2).unwrap_err(), Error::CommensurableRoots);
    assert_eq!(build_ball(&hnn(2, "ab", "BA"), 2).unwrap_err(), Error::CommensurableRoots);
}

#[test]
fn dot_export_mentions_every_point() {
    let ball = build_ball(&amalgam("aa", "xx"), 2).unwrap();
    let dot = ball.to_dot();
    assert!(dot.starts_with("graph ball {"));
    assert_eq!(dot.matches(" -- ").count(), ball.edges.len());
    assert!(dot.contains("style=dashed"));
}

#[test]
fn surface_certificates_verify() {
    let spec = amalgam("abAB", "xyXY");
    for r in 1..=4 {
        let cert = detour_certificate(&spec, r).unwrap();
        assert_eq!(check_certificate(&spec, &cert), Ok(()));
        assert_eq!(cert.t_minus, -cert.t_plus);
        assert!(cert.stages.iter().any(|s| s.operation == "horizontal"));
    }
}

#[test]
fn divisible_words_need_only_vertical_pushes() {
    let spec = amalgam("aa", "xx");
    let cert = detour_certificate(&spec, 3).unwrap();
    assert!(verify_certificate(&spec, &cert));
    assert!(cert.stages.iter().all(|s| s.operation == "clean" || s.operation == "vertical"));
    assert!(cert.stages.iter().any(|s| s.operation == "vertical"));
}

#[test]
fn free_splittings_have_no_detour() {
    assert!(matches!(detour_certificate(&amalgam("ab", "xyXY"), 2), Err(Error::NotApplicable(_))));
    assert!(matches!(detour_certificate(&hnn(2, "a", "b"), 1), Err(Error::NotApplicable(_))));
    assert!(detour_certificate(&hnn(2, "a", "aa"), 1).is_err());
}

#[test]
fn hnn_certificates_verify() {
    let spec = hnn(2, "abAB", "b");
    for r in 1..=3 {
        let cert = detour_certificate(&spec, r).unwrap();
        assert!(verify_certificate(&spec, &cert));
        let far = distances_along_gamma(&spec, 0, 2 * r);
        let d_end = far.iter().find(|(dt, _)| *dt == cert.t_plus).and_then(|(_, d)| *d);
        assert!(d_end.is_none_or(|d| d >= 2 * r));
    }
}

#[test]
fn stage_minimum_strictly_increases() {
    for (spec, r) in [(amalgam("abAB", "xyXY"), 3), (amalgam("aa", "xx"), 3), (hnn(2, "abAB", "b"), 3)] {
        let cert = detour_certificate(&spec, r).unwrap();
        let mins: Vec<u32> = cert.rounds.iter().map(|r| r.min_distance.unwrap_or(u32::MAX)).collect();
        assert!(mins.len() >= 2);
        assert_eq!(mins[0], 0);
        assert!(mins.windows(2).all(|w| w[0] < w[1]), "{mins:?}");
        assert!(*mins.last().unwrap() > r);
    }
}

#[test]
fn certificates_survive_json() {
    let spec = amalgam("abAB", "xyXY");
    let cert = detour_certificate(&spec, 2).unwrap();
    let text = serde_json::to_string(&cert).unwrap();
    assert!(text.contains("\"tMinus\""));
    let back = serde_json::from_str(&text).unwrap();
    assert_eq!(cert, back);
    assert!(verify_certificate(&spec, &back));
}

#[test]
fn tampered_certificates_fail() {
    let spec = amalgam("abAB", "xyXY");
    let cert = detour_certificate(&spec, 2).unwrap();

    let mut moved_end = cert.clone();
    let k = moved_end.segments.len() / 2;
    *moved_end.segments[k].to_mut() =
        CertificatePoint { space: vec![], position: CertificatePosition::Vertex("ab".into()) };
    assert!(!verify_certificate(&spec, &moved_end));

    let mut gap = cert.clone();
    gap.segments.remove(k);
    assert!(!verify_certificate(&spec, &gap));

    let mut shifted = cert.clone();
    shifted.t_plus += 1;
    assert!(!verify_certificate(&spec, &shifted));

    let mut through_center = cert.clone();
    let origin = CertificatePoint { space: vec![], position: CertificatePosition::Vertex(String::new()) };
    let first = through_center.segments[0].from().clone();
    through_center.segments.insert(0, CertificateSegment::Horizontal { from: origin.clone(), to: first });
    through_center
        .segments
        .insert(0, CertificateSegment::Horizontal { from: through_center.segments[0].from().clone(), to: origin });
    if let CertificateSegment::Horizontal { from, .. } = &mut through_center.segments[0] {
        *from = splitfree_point(&spec, cert.t_minus);
    }
    assert!(
        matches!(check_certificate(&spec, &through_center), Err(Error::MalformedCertificate(m)) if m.contains("ball"))
    );

    let mut fake_rung = cert.clone();
    fake_rung.segments.insert(
        1,
        CertificateSegment::Vertical { from: cert.segments[0].to().clone(), to: cert.segments[0].to().clone() },
    );
    assert!(!verify_certificate(&spec, &fake_rung));
}

fn splitfree_point(spec: &SplittingSpec, t: i64) -> CertificatePoint {
    let p = gamma(spec, t).unwrap();
    let position = match p.position {
        Position::Vertex(w) => CertificatePosition::Vertex(w.to_string()),
        Position::Edge { from, generator, offset } => {
            CertificatePosition::Edge { from: from.to_string(), generator, offset }
        }
    };
    CertificatePoint { space: vec![], position }
}
