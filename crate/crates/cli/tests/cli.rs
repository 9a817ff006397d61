use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use dvbc::document::{parse, Document, NamedCochain};
use dvbc_core::fixtures::{
    gauged_trivial, random_bundle, random_cochain, random_scalar_cochain, rank1_filled_triangle,
    rotation_bundle_circle, with_trivial_summand, CanonicalComplex,
};
use dvbc_core::{Bundle, SimplexKey, VBCochain};
use nalgebra::DVector;
use serde_json::Value;
use tempfile::TempDir;

fn dvbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dvbc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn bundle_doc(b: Bundle) -> Document {
    Document {
        complex: Some(b.complex().clone()),
        bundle: Some(Arc::new(b)),
        ..Document::default()
    }
}

fn write(dir: &TempDir, name: &str, doc: &Document) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, doc.serialize()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_report(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn line<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["lines"]
        .as_array()
        .unwrap()
        .iter()
        .find(|l| l["name"] == name)
        .unwrap_or_else(|| panic!("no line {name} in {report}"))
}

#[test]
fn trivial_bundle_passes_every_check() {
    let dir = TempDir::new().unwrap();
    let x = Arc::new(CanonicalComplex::Tetrahedron.build());
    let path = write(&dir, "trivial.json", &bundle_doc(Bundle::trivial(x, 2)));
    let out = dvbc(&["check", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn random_bundle_satisfies_bianchi() {
    let dir = TempDir::new().unwrap();
    let x = Arc::new(CanonicalComplex::Simplex4Boundary.build());
    let path = write(
        &dir,
        "random.json",
        &bundle_doc(random_bundle(x, 3, 17).unwrap()),
    );
    let out = dvbc(&["check", "--json", "--seed", "5", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let report = json_report(&out);
    let bianchi = line(&report, "bianchi");
    assert_eq!(bianchi["status"], "pass");
    assert!(bianchi["residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(line(&report, "leibniz_wedge_higher")["status"], "skip");
}

#[test]
fn corrupted_inverse_fails_involution() {
    let dir = TempDir::new().unwrap();
    let e = rank1_filled_triangle(2.0, 3.0, 6.0);
    let mut doc = bundle_doc(e.clone());
    let mut inv = e.transport(1, 0).unwrap().clone();
    inv[(0, 0)] += 0.25;
    doc.inverses.insert((0, 1), inv);
    let path = write(&dir, "corrupt.json", &doc);
    let out = dvbc(&["check", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains("FAIL  involution"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn malformed_files_exit_with_usage_status() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        "{\n  \"format\": 1,\n  \"complex\": {\"cells\": [[0, 1]]\n",
    )
    .unwrap();
    let out = dvbc(&["check", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));

    std::fs::write(
        &path,
        r#"{"format": 1, "complex": {"cells": [[0, 1]]}, "bundle": {"fibers": [{"vertex": 0, "dim": 1}, {"vertex": 1, "dim": 1}], "transports": []}}"#,
    )
    .unwrap();
    let out = dvbc(&["check", s(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("missing transport for edge [0,1]"),
        "{}",
        stderr(&out)
    );

    assert_eq!(
        dvbc(&["check", "/nonexistent/file.json"]).status.code(),
        Some(2)
    );
    assert_eq!(dvbc(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn curvature_of_trivial_bundle_is_zero() {
    let dir = TempDir::new().unwrap();
    let x = Arc::new(CanonicalComplex::Tetrahedron.build());
    let path = write(&dir, "trivial.json", &bundle_doc(Bundle::trivial(x, 2)));
    let out = dvbc(&["curvature", s(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let doc = parse(&stdout(&out)).unwrap();
    let Some(NamedCochain::Hom(f)) = doc.cochains.get("curvature") else {
        panic!("no curvature section");
    };
    assert_eq!(f.values().len(), 4);
    assert_eq!(f.max_abs(), 0.0);
}

#[test]
fn trivialize_round_trip_through_check() {
    let dir = TempDir::new().unwrap();
    let x = Arc::new(CanonicalComplex::TetraBoundary.build());
    let path = write(
        &dir,
        "gauged.json",
        &bundle_doc(gauged_trivial(x, 2, 3).unwrap()),
    );
    let gauged = dir.path().join("out.json");
    let out = dvbc(&["trivialize", s(&path), "-o", s(&gauged)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = parse(&std::fs::read_to_string(&gauged).unwrap()).unwrap();
    assert!(doc.gauge.is_some());
    let out = dvbc(&["check", "--json", s(&gauged)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_report(&out);
    assert!(
        line(&report, "gauged_transports")["residual"]
            .as_f64()
            .unwrap()
            <= 1e-9
    );
}

#[test]
fn obstructions_exit_with_failure() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "rot.json", &bundle_doc(rotation_bundle_circle(0.7)));
    let out = dvbc(&["trivialize", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains("nontrivial_holonomy"),
        "{}",
        stdout(&out)
    );

    let path = write(
        &dir,
        "tri.json",
        &bundle_doc(rank1_filled_triangle(2.0, 3.0, 5.0)),
    );
    let out = dvbc(&["trivialize", s(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("non_flat"));
    assert_eq!(dvbc(&["flat", s(&path)]).status.code(), Some(1));

    let path = write(
        &dir,
        "flat.json",
        &bundle_doc(rank1_filled_triangle(2.0, 3.0, 6.0)),
    );
    assert_eq!(dvbc(&["flat", s(&path)]).status.code(), Some(0));
}

#[test]
fn pullback_along_the_tetrahedron_collapse() {
    let dir = TempDir::new().unwrap();
    let tet = Document {
        complex: Some(Arc::new(CanonicalComplex::Tetrahedron.build())),
        ..Document::default()
    };
    let e =
        Arc::new(random_bundle(Arc::new(CanonicalComplex::FilledTriangle.build()), 2, 8).unwrap());
    let alpha = random_cochain(&e, 1, 9).unwrap();
    let mut tri = bundle_doc((*e).clone());
    tri.cochains
        .insert("alpha".into(), NamedCochain::Vector(alpha.clone()));
    let (dom, cod) = (write(&dir, "tet.json", &tet), write(&dir, "tri.json", &tri));
    let out = dvbc(&["pullback", s(&dom), s(&cod), "--map", "0=0,1=1,2=2,3=0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = parse(&stdout(&out)).unwrap();
    let Some(NamedCochain::Vector(fa)) = doc.cochains.get("alpha") else {
        panic!("alpha missing");
    };
    assert_eq!(fa.value(&SimplexKey::edge(0, 3)), DVector::zeros(2));
    let expect = -(e.transport(1, 0).unwrap() * alpha.value(&SimplexKey::edge(0, 1)));
    assert!((fa.value(&SimplexKey::edge(1, 3)) - expect).amax() < 1e-15);

    let out = dvbc(&["pullback", s(&dom), s(&cod), "--map", "0=0,1=1,2=2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dnabla_and_wedge_commands() {
    let dir = TempDir::new().unwrap();
    let e = Arc::new(random_bundle(Arc::new(CanonicalComplex::Tetrahedron.build()), 2, 4).unwrap());
    let mut doc = bundle_doc((*e).clone());
    let alpha = random_cochain(&e, 1, 5).unwrap();
    let w = random_scalar_cochain(e.complex(), 1, 6).unwrap();
    doc.cochains
        .insert("alpha".into(), NamedCochain::Vector(alpha.clone()));
    doc.cochains
        .insert("w".into(), NamedCochain::Scalar(w.clone()));
    let path = write(&dir, "doc.json", &doc);

    let out = dvbc(&["dnabla", s(&path), "alpha"]);
    assert_eq!(out.status.code(), Some(0));
    let got = parse(&stdout(&out)).unwrap();
    let Some(NamedCochain::Vector(d)) = got.cochains.get("d_alpha") else {
        panic!("d_alpha missing");
    };
    let expect = dvbc_core::cochain::d_nabla(&alpha).unwrap();
    assert!(d.distance(&expect) < 1e-15);

    let mut results: Vec<VBCochain> = Vec::new();
    for mode in ["permutation", "outer-alpha", "outer-w"] {
        let out = dvbc(&[
            "wedge",
            s(&path),
            "alpha",
            "w",
            "--mode",
            mode,
            "--name",
            "aw",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        match parse(&stdout(&out)).unwrap().cochains.remove("aw") {
            Some(NamedCochain::Vector(c)) => results.push(c),
            other => panic!("{other:?}"),
        }
    }
    assert!(results[0].distance(&results[1]) < 1e-12);
    assert!(results[0].distance(&results[2]) < 1e-12);

    assert_eq!(
        dvbc(&["dnabla", s(&path), "missing"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dvbc(&["wedge", s(&path), "w", "alpha"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dvbc(&["dnabla", s(&path), "alpha", "--name", "w"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn parallel_sections_with_reduction() {
    let dir = TempDir::new().unwrap();
    let x = Arc::new(CanonicalComplex::TetraSkeleton.build());
    let path = write(
        &dir,
        "split.json",
        &bundle_doc(with_trivial_summand(x, 3, 2, 21).unwrap()),
    );
    let out = dvbc(&["parallel-sections", "--reduce", s(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = parse(&stdout(&out)).unwrap();
    assert!(doc.cochains.contains_key("parallel_0"));
    assert!(doc.cochains.contains_key("parallel_1"));
    assert!(!doc.cochains.contains_key("parallel_2"));
    let reduced = doc
        .bundle
        .unwrap()
        .apply_gauge(&doc.gauge.unwrap())
        .unwrap();
    for u in reduced.stored_transports().values() {
        assert!((u.view((0, 0), (2, 2)) - nalgebra::DMatrix::<f64>::identity(2, 2)).amax() < 1e-9);
        assert!(u.view((2, 0), (1, 2)).amax() < 1e-9);
    }
}

#[test]
fn command_output_is_canonical() {
    let dir = TempDir::new().unwrap();
    let x = Arc::new(CanonicalComplex::FilledTriangle.build());
    let path = write(
        &dir,
        "doc.json",
        &bundle_doc(random_bundle(x, 2, 1).unwrap()),
    );
    let first = stdout(&dvbc(&["curvature", s(&path)]));
    let again = dir.path().join("again.json");
    std::fs::write(&again, &first).unwrap();
    let second = stdout(&dvbc(&["curvature", s(&again), "--name", "F2"]));
    let reparsed = parse(&second).unwrap();
    assert_eq!(reparsed.serialize(), second);
    assert_eq!(parse(&first).unwrap().serialize(), first);
}

#[test]
fn random_documents_round_trip_byte_for_byte() {
    for seed in 0..30 {
        let x = Arc::new(CanonicalComplex::Simplex4Boundary.build());
        let e = Arc::new(random_bundle(x, 1 + (seed % 3) as usize, seed).unwrap());
        let mut doc = bundle_doc((*e).clone());
        doc.gauge = Some(dvbc_core::fixtures::random_gauge(&e, seed ^ 1));
        doc.metric = Some(dvbc_core::Metric::euclidean(&e));
        for k in 0..=2 {
            let a = random_cochain(&e, k, seed ^ (k as u64 + 2)).unwrap();
            doc.cochains
                .insert(format!("a{k}"), NamedCochain::Vector(a));
        }
        let text = doc.serialize();
        let back = parse(&text).unwrap();
        assert_eq!(back, doc, "seed {seed}");
        assert_eq!(back.serialize(), text, "seed {seed}");
    }
}
