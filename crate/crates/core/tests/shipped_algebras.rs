//! The definition files shipped under `algebras/` stay in lock-step with the
//! built-in catalog: each file parses, reproduces the catalog instance it
//! documents, and satisfies the Jacobi identity on a finite window.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use wittkit::catalog::catalog;
use wittkit::dsl::parse_document;
use wittkit::scalar::GaussianRational;
use wittkit::tps::{check_tps, natural_product};
use wittkit::Window;

fn q(s: &str) -> GaussianRational {
    GaussianRational::parse(s).unwrap()
}

fn read(name: &str) -> String {
    let path: PathBuf =
        [env!("CARGO_MANIFEST_DIR"), "..", "..", "algebras", name].iter().collect();
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, GaussianRational> {
    pairs.iter().map(|(k, v)| (k.to_string(), q(v))).collect()
}

#[test]
fn witt_file_matches_catalog() {
    let doc = parse_document(&read("witt.liealg")).unwrap();
    assert_eq!(doc.algebra, catalog("witt", &BTreeMap::new(), &[]).unwrap());
    assert_eq!(doc.product, Some(natural_product(&doc.algebra).unwrap()));
}

#[test]
fn w_ab_file_matches_catalog() {
    let doc = parse_document(&read("w_ab.liealg")).unwrap();
    let cat = catalog("w_ab", &params(&[("a", "1"), ("b", "-1")]), &[]).unwrap();
    assert_eq!(doc.algebra, cat);
    let product = doc.product.expect("file declares a product");
    assert_eq!(product, natural_product(&doc.algebra).unwrap());
    // the declared product really is transposed-Poisson compatible at b = -1
    let window = Window::new(0, -2, 2).unwrap();
    let report = check_tps(&doc.algebra, &product, &window, None);
    assert!(report.passed(), "{report:?}");
}

#[test]
fn w_abs_file_matches_catalog() {
    let doc = parse_document(&read("w_abs.liealg")).unwrap();
    let cat = catalog("w_abs", &params(&[("a", "2"), ("b", "-1")]), &[]).unwrap();
    assert_eq!(doc.algebra, cat);
    assert!(doc.product.is_none());
}

#[test]
fn wn_g_file_matches_catalog() {
    let doc = parse_document(&read("wn_g.liealg")).unwrap();
    let cat = catalog("wn_g", &params(&[("n", "2")]), &[q("1")]).unwrap();
    assert_eq!(doc.algebra, cat);
}

#[test]
fn hwn_g_file_matches_catalog() {
    let doc = parse_document(&read("hwn_g.liealg")).unwrap();
    let cat = catalog("hwn_g", &params(&[("n", "1")]), &[q("1")]).unwrap();
    assert_eq!(doc.algebra, cat);
}

#[test]
fn every_shipped_file_satisfies_jacobi() {
    for (file, window) in [
        ("witt.liealg", Window::new(0, -3, 3).unwrap()),
        ("w_ab.liealg", Window::new(0, -3, 3).unwrap()),
        ("w_abs.liealg", Window::new(0, -3, 3).unwrap()),
        ("wn_g.liealg", Window::new(2, -2, 2).unwrap()),
        ("hwn_g.liealg", Window::new(2, -2, 2).unwrap()),
    ] {
        let doc = parse_document(&read(file)).unwrap();
        let report = doc.algebra.check_jacobi(&window);
        assert!(report.is_clean(), "{file}: {:?}", report.violations.first());
        assert!(report.triples_checked > 0, "{file}: empty window");
    }
}
