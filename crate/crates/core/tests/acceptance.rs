//! Acceptance suite: ten end-to-end checks, one per shipped guarantee.
//!
//! Each test prints a single `acceptance NN <label>: PASS/FAIL (...)` line
//! (run with `cargo test --test acceptance -- --nocapture` to see them all)
//! and fails the build if its guarantee does not hold. All comparisons are
//! exact; no tolerances anywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wittkit::catalog::catalog;
use wittkit::dsl::{parse_document, ParseErrorKind};
use wittkit::halfderiv::{
    check_half_derivation, classify_interior, default_core, family_hwn, family_w_ab,
    family_w_abs, family_wn, hwn_coeff, hwn_coeff_closed_form, solve_half_derivations, Coeffs,
    ShiftMap, ShiftSeeds, SolutionSpace,
};
use wittkit::tps::{
    check_poisson, check_tps, left_mult_map, natural_product, solve_tps, GeneratorCheck,
    MutationProduct,
};
use wittkit::{AlgebraDef, BasisIndex, Element, GaussianRational, Window};

// ---------------------------------------------------------------------------
// harness
// ---------------------------------------------------------------------------

fn criterion(label: &str, body: impl FnOnce() -> Result<String, String>) {
    let started = Instant::now();
    match body() {
        Ok(detail) => println!("{label}: PASS ({detail}; {:.2?})", started.elapsed()),
        Err(msg) => {
            println!("{label}: FAIL ({msg})");
            panic!("{label}: {msg}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn q(text: &str) -> GaussianRational {
    GaussianRational::parse(text).unwrap()
}

fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, GaussianRational> {
    pairs.iter().map(|(k, v)| (k.to_string(), q(v))).collect()
}

fn scalar_params(pairs: &[(&str, GaussianRational)]) -> BTreeMap<String, GaussianRational> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn window(alpha: i64, lo: i64, hi: i64) -> Window {
    Window::new(alpha, lo, hi).unwrap()
}

fn rand_scalar(rng: &mut ChaCha8Rng) -> GaussianRational {
    GaussianRational::from_parts(
        rng.gen_range(-6..=6),
        rng.gen_range(1..=4),
        rng.gen_range(-6..=6),
        rng.gen_range(1..=4),
    )
}

fn rand_nonzero(rng: &mut ChaCha8Rng) -> GaussianRational {
    loop {
        let c = rand_scalar(rng);
        if !c.is_zero() {
            return c;
        }
    }
}

fn random_pairs(
    basis: &[BasisIndex],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(BasisIndex, BasisIndex)> {
    (0..count)
        .map(|_| {
            (
                basis[rng.gen_range(0..basis.len())].clone(),
                basis[rng.gen_range(0..basis.len())].clone(),
            )
        })
        .collect()
}

fn all_pairs(basis: &[BasisIndex]) -> Vec<(BasisIndex, BasisIndex)> {
    let mut out = Vec::new();
    for (i, x) in basis.iter().enumerate() {
        for y in &basis[i..] {
            out.push((x.clone(), y.clone()));
        }
    }
    out
}

/// Random element supported on at most three distinct window basis elements.
fn random_element(basis: &[BasisIndex], rng: &mut ChaCha8Rng) -> Element {
    let support = rng.gen_range(1..=3usize);
    let mut used = BTreeSet::new();
    let mut e = Element::zero();
    while used.len() < support {
        let idx = rng.gen_range(0..basis.len());
        if used.insert(idx) {
            e.add_term(basis[idx].clone(), rand_nonzero(rng));
        }
    }
    e
}

fn solve_and_classify(
    alg: &AlgebraDef,
    shift: &GaussianRational,
    w_in: &Window,
    w_out: &Window,
) -> Result<(usize, SolutionSpace), String> {
    let space = solve_half_derivations(alg, shift, w_in, w_out).map_err(|e| e.to_string())?;
    let core = default_core(&space).map_err(|e| e.to_string())?;
    let interior = classify_interior(alg, &space, &core).map_err(|e| e.to_string())?;
    Ok((interior.dimension, space))
}

// ---------------------------------------------------------------------------
// 01: the shipped bracket tables are Lie brackets (antisymmetry is
// structural; Jacobi is checked on every window triple)
// ---------------------------------------------------------------------------

#[test]
fn a01_bracket_tables_satisfy_jacobi() {
    criterion("acceptance 01 bracket-validity", || {
        let mut cases: Vec<(AlgebraDef, Window)> = vec![
            (
                catalog("w_abs", &params(&[("a", "1"), ("b", "-1")]), &[]).unwrap(),
                window(0, -4, 4),
            ),
            (
                catalog("w_ab", &params(&[("a", "0"), ("b", "2")]), &[]).unwrap(),
                window(0, -4, 4),
            ),
        ];
        for n in ["-2", "-1", "0", "1", "2", "3"] {
            cases.push((
                catalog("wn_g", &params(&[("n", n)]), &[q("1")]).unwrap(),
                window(2, -4, 4),
            ));
        }
        for n in ["-1", "0", "1", "2"] {
            cases.push((
                catalog("hwn_g", &params(&[("n", n)]), &[q("1")]).unwrap(),
                window(2, -4, 4),
            ));
        }
        let mut triples = 0usize;
        for (alg, w) in &cases {
            let report = alg.check_jacobi(w);
            ensure!(
                report.is_clean(),
                "{} has {} Jacobi violations on {}",
                alg.name,
                report.violations.len(),
                w
            );
            triples += report.triples_checked;
        }
        Ok(format!("{} algebras, {} triples, 0 violations", cases.len(), triples))
    });
}

// ---------------------------------------------------------------------------
// 02: the three closed-form shift families really are 1/2-derivations, with
// random parameters and random nonzero coefficients
// ---------------------------------------------------------------------------

#[test]
fn a02_shift_families_are_half_derivations() {
    criterion("acceptance 02 family-verification", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x02);
        let mut pairs_checked = 0usize;

        // diagonal + L->I family on W(a, -1)
        let a = rand_scalar(&mut rng);
        let alg =
            catalog("w_ab", &scalar_params(&[("a", a), ("b", q("-1"))]), &[]).unwrap();
        let mut alphas = Coeffs::new();
        let mut betas = Coeffs::new();
        let mut placed = 0;
        while placed < 3 {
            let t = rng.gen_range(-3..=3i64);
            let c = rand_nonzero(&mut rng);
            let slot = if rng.gen_bool(0.5) { &mut alphas } else { &mut betas };
            if !slot.contains_key(&t) {
                slot.insert(t, c);
                placed += 1;
            }
        }
        let map = family_w_ab(&alg, &alphas, &betas).map_err(|e| e.to_string())?;
        let basis = alg.enumerate_basis(&window(0, -6, 6));
        let pairs = random_pairs(&basis, 200, &mut rng);
        let report =
            check_half_derivation(&alg, &map, &pairs, None).map_err(|e| e.to_string())?;
        ensure!(report.is_clean(), "w_ab family left {} residuals", report.failures.len());
        pairs_checked += report.pairs_checked;

        // same plus the odd-sector gamma family on W(a, -1, 1/2)
        let a = rand_scalar(&mut rng);
        let alg =
            catalog("w_abs", &scalar_params(&[("a", a), ("b", q("-1"))]), &[]).unwrap();
        let mut alphas = Coeffs::new();
        let mut betas = Coeffs::new();
        let mut gammas = Coeffs::new();
        let mut placed = 0;
        while placed < 3 {
            let t = rng.gen_range(-3..=3i64);
            let c = rand_nonzero(&mut rng);
            let slot = match rng.gen_range(0..3) {
                0 => &mut alphas,
                1 => &mut betas,
                _ => &mut gammas,
            };
            if !slot.contains_key(&t) {
                slot.insert(t, c);
                placed += 1;
            }
        }
        let map = family_w_abs(&alg, &alphas, &betas, &gammas).map_err(|e| e.to_string())?;
        let basis = alg.enumerate_basis(&window(0, -6, 6));
        let pairs = random_pairs(&basis, 200, &mut rng);
        let report =
            check_half_derivation(&alg, &map, &pairs, None).map_err(|e| e.to_string())?;
        ensure!(report.is_clean(), "w_abs family left {} residuals", report.failures.len());
        pairs_checked += report.pairs_checked;

        // single-cell family on the group-graded algebra, random n and
        // random nonzero generator degree
        let n = rng.gen_range(-3..=3i64);
        let gen = rand_nonzero(&mut rng);
        let alg = catalog(
            "wn_g",
            &scalar_params(&[("n", GaussianRational::from_int(n))]),
            &[gen],
        )
        .unwrap();
        let mut seeds = ShiftSeeds::new();
        while seeds.len() < 3 {
            let key = (vec![rng.gen_range(-2..=2i64)], rng.gen_range(-3..=3i64));
            let c = rand_nonzero(&mut rng);
            seeds.entry(key).or_insert(c);
        }
        let map = family_wn(&alg, &seeds).map_err(|e| e.to_string())?;
        let basis = alg.enumerate_basis(&window(2, -4, 4));
        let pairs = random_pairs(&basis, 200, &mut rng);
        let report =
            check_half_derivation(&alg, &map, &pairs, None).map_err(|e| e.to_string())?;
        ensure!(
            report.is_clean(),
            "wn_g family (n={n}) left {} residuals",
            report.failures.len()
        );
        pairs_checked += report.pairs_checked;

        Ok(format!("3 families, {pairs_checked} random pairs, zero residual"))
    });
}

// ---------------------------------------------------------------------------
// 03: off the special parameter (b != -1) the solver finds scalars only
// ---------------------------------------------------------------------------

#[test]
fn a03_generic_parameters_admit_only_scalars() {
    criterion("acceptance 03 generic-triviality", || {
        let w_in = window(0, -5, 5);
        let w_out = window(0, -10, 10);
        let mut solves = 0usize;

        let check = |alg: &AlgebraDef,
                     shift: &GaussianRational,
                     expect_identity: bool|
         -> Result<(), String> {
            let (dim, space) = solve_and_classify(alg, shift, &w_in, &w_out)?;
            if expect_identity {
                ensure!(
                    dim == 1,
                    "{} shift {shift}: interior dimension {dim}, expected 1",
                    alg.name
                );
                let id = ShiftMap::identity(alg, GaussianRational::one());
                ensure!(
                    space.contains_shift_map(alg, &id).map_err(|e| e.to_string())?,
                    "{} shift {shift}: identity missing from solution space",
                    alg.name
                );
            } else {
                ensure!(
                    dim == 0,
                    "{} shift {shift}: interior dimension {dim}, expected 0",
                    alg.name
                );
            }
            Ok(())
        };

        let ab = catalog("w_ab", &params(&[("a", "0"), ("b", "2")]), &[]).unwrap();
        for t in -2..=2i64 {
            check(&ab, &GaussianRational::from_int(t), t == 0)?;
            solves += 1;
        }

        let abs = catalog("w_abs", &params(&[("a", "1"), ("b", "0")]), &[]).unwrap();
        for t in -2..=2i64 {
            check(&abs, &GaussianRational::from_int(t), t == 0)?;
            solves += 1;
        }
        for num in [-3i64, -1, 1, 3] {
            check(&abs, &GaussianRational::ratio(num, 2), false)?;
            solves += 1;
        }

        Ok(format!("{solves} solves: dimension 1 at shift 0 (scalars), 0 elsewhere"))
    });
}

// ---------------------------------------------------------------------------
// 04: at b = -1 the solver finds exactly the documented families
// ---------------------------------------------------------------------------

#[test]
fn a04_special_parameter_admits_shift_families() {
    criterion("acceptance 04 special-parameter-dimensions", || {
        let w_in = window(0, -5, 5);
        let w_out = window(0, -10, 10);
        let alg = catalog("w_abs", &params(&[("a", "0"), ("b", "-1")]), &[]).unwrap();

        for t in -1..=1i64 {
            let shift = GaussianRational::from_int(t);
            let (dim, space) = solve_and_classify(&alg, &shift, &w_in, &w_out)?;
            ensure!(dim == 2, "integer shift {t}: interior dimension {dim}, expected 2");
            let alpha = family_w_abs(&alg, &Coeffs::from([(t, GaussianRational::one())]), &Coeffs::new(), &Coeffs::new())
                .map_err(|e| e.to_string())?;
            let beta = family_w_abs(&alg, &Coeffs::new(), &Coeffs::from([(t, GaussianRational::one())]), &Coeffs::new())
                .map_err(|e| e.to_string())?;
            for (name, map) in [("alpha", alpha), ("beta", beta)] {
                ensure!(
                    space.contains_shift_map(&alg, &map).map_err(|e| e.to_string())?,
                    "integer shift {t}: {name} family missing from solution space"
                );
            }
        }

        for t in -1..=0i64 {
            let shift = &GaussianRational::from_int(t) + &GaussianRational::ratio(1, 2);
            let (dim, space) = solve_and_classify(&alg, &shift, &w_in, &w_out)?;
            ensure!(
                dim == 1,
                "half shift {t}+1/2: interior dimension {dim}, expected 1"
            );
            let gamma = family_w_abs(&alg, &Coeffs::new(), &Coeffs::new(), &Coeffs::from([(t, GaussianRational::one())]))
                .map_err(|e| e.to_string())?;
            ensure!(
                space.contains_shift_map(&alg, &gamma).map_err(|e| e.to_string())?,
                "half shift {t}+1/2: gamma family missing from solution space"
            );
        }

        Ok("dimension 2 at integer shifts -1,0,1 and 1 at half shifts -1/2,1/2".to_string())
    });
}

// ---------------------------------------------------------------------------
// 05: on the group-graded algebra the solver recovers exactly the
// one-dimensional (grade shift, index shift) cells
// ---------------------------------------------------------------------------

#[test]
fn a05_group_graded_solver_recovers_cells() {
    criterion("acceptance 05 graded-cell-dimensions", || {
        let alg = catalog("wn_g", &params(&[("n", "2")]), &[q("1")]).unwrap();
        let w_in = window(2, -2, 2);
        let w_out = window(3, -4, 4);
        let core = window(1, -1, 1);
        let l = alg.family_id("L").map_err(|e| e.to_string())?;

        for d in -1..=1i64 {
            let shift = GaussianRational::from_int(d);
            let space = solve_half_derivations(&alg, &shift, &w_in, &w_out)
                .map_err(|e| e.to_string())?;
            let interior =
                classify_interior(&alg, &space, &core).map_err(|e| e.to_string())?;
            ensure!(
                interior.dimension == 5,
                "grade shift {d}: interior dimension {}, expected 5",
                interior.dimension
            );
            ensure!(interior.all_shift_type(), "grade shift {d}: non-cell solution fitted");
            let mut cells = Vec::new();
            for fit in &interior.fitted {
                let terms = fit.map.terms();
                ensure!(
                    terms.len() == 1,
                    "grade shift {d}: fitted map with {} terms, expected a single cell",
                    terms.len()
                );
                let term = &terms[0];
                ensure!(
                    term.source == l && term.target == l,
                    "grade shift {d}: cell outside the L family"
                );
                ensure!(
                    term.alpha_shift == vec![d],
                    "grade shift {d}: cell with group shift {:?}",
                    term.alpha_shift
                );
                ensure!(
                    term.coeff.is_one(),
                    "grade shift {d}: cell coefficient {} != 1",
                    term.coeff
                );
                cells.push(term.i_shift);
            }
            cells.sort_unstable();
            ensure!(
                cells == vec![-2, -1, 0, 1, 2],
                "grade shift {d}: cells at index shifts {cells:?}, expected -2..=2"
            );
        }

        Ok("3 grade shifts x 5 index cells, each exactly one-dimensional".to_string())
    });
}

// ---------------------------------------------------------------------------
// 06: the hwn coefficient recurrence, its zeros at positive multiples of n,
// and the closed form all agree
// ---------------------------------------------------------------------------

#[test]
fn a06_hwn_coefficient_recurrence_holds() {
    criterion("acceptance 06 hwn-recurrence", || {
        let one = GaussianRational::one();
        let mut checks = 0usize;
        for n in [1i64, 2, 3] {
            for d in [q("1"), q("2"), q("1+i")] {
                // adjacency: d*a(k) + (k - n)*a(k - n) = 0 across every
                // residue class covering [-10, 10]
                for m in 0..n {
                    let mut vals = BTreeMap::new();
                    for k in -10..=10i64 {
                        if (k - m) % n == 0 {
                            vals.insert(k, hwn_coeff(n, &d, m, &one, k).map_err(|e| e.to_string())?);
                        }
                    }
                    for (&k, v) in &vals {
                        if let Some(prev) = vals.get(&(k - n)) {
                            let lhs = &(&d * v)
                                + &(&GaussianRational::from_int(k - n) * prev);
                            ensure!(
                                lhs.is_zero(),
                                "recurrence violated at n={n} d={d} k={k}: residual {lhs}"
                            );
                            checks += 1;
                        }
                    }
                }
                // zeros at every positive multiple of n in the seed class
                for k in 1..=5i64 {
                    let v = hwn_coeff(n, &d, 0, &one, k * n).map_err(|e| e.to_string())?;
                    ensure!(v.is_zero(), "a({}) = {v} != 0 for n={n} d={d}", k * n);
                    checks += 1;
                }
                // closed form vs. recurrence wherever both are defined
                for m in 0..n {
                    for t in 0..=4u32 {
                        let k = m + (t as i64) * n;
                        let closed = hwn_coeff_closed_form(n, &d, m, &one, t)
                            .map_err(|e| e.to_string())?;
                        let rec = hwn_coeff(n, &d, m, &one, k).map_err(|e| e.to_string())?;
                        ensure!(
                            closed == rec,
                            "closed form {closed} != recurrence {rec} at n={n} d={d} k={k}"
                        );
                        checks += 1;
                    }
                }
            }
        }
        Ok(format!("{checks} exact identities over n in 1..=3, d in {{1, 2, 1+i}}"))
    });
}

// ---------------------------------------------------------------------------
// 07 + 08: mutations of the built-in commutative products pass the
// transposed Poisson laws, break ordinary Leibniz, and every left
// multiplication is a 1/2-derivation
// ---------------------------------------------------------------------------

struct MutationCase {
    alg: AlgebraDef,
    products: Vec<MutationProduct>,
    z_window: Window,
    check_window: Window,
}

/// Deterministic shared fixture: ten random mutation products per bracket.
fn mutation_cases() -> Vec<MutationCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0708);
    let mut out = Vec::new();

    let a = rand_scalar(&mut rng);
    let alg = catalog("w_abs", &scalar_params(&[("a", a), ("b", q("-1"))]), &[]).unwrap();
    let base = natural_product(&alg).unwrap();
    let z_window = window(0, -2, 2);
    let basis = alg.enumerate_basis(&z_window);
    let products = (0..10)
        .map(|_| MutationProduct { base: base.clone(), w: random_element(&basis, &mut rng) })
        .collect();
    out.push(MutationCase { alg, products, z_window, check_window: window(0, -3, 3) });

    let mut graded_products = Vec::new();
    let mut graded_algs = Vec::new();
    for n in ["1", "2"] {
        let alg = catalog("wn_g", &params(&[("n", n)]), &[q("1")]).unwrap();
        let base = natural_product(&alg).unwrap();
        let basis = alg.enumerate_basis(&window(1, -2, 2));
        let products: Vec<MutationProduct> = (0..5)
            .map(|_| MutationProduct { base: base.clone(), w: random_element(&basis, &mut rng) })
            .collect();
        graded_algs.push(alg);
        graded_products.push(products);
    }
    for (alg, products) in graded_algs.into_iter().zip(graded_products) {
        out.push(MutationCase {
            alg,
            products,
            z_window: window(1, -2, 2),
            check_window: window(1, -3, 3),
        });
    }
    out
}

#[test]
fn a07_mutation_products_pass_tps_laws() {
    criterion("acceptance 07 mutation-tps", || {
        let mut products_checked = 0usize;
        for case in mutation_cases() {
            let mut leibniz_broken = false;
            for product in &case.products {
                let report = check_tps(&case.alg, product, &case.check_window, None);
                ensure!(
                    report.commutative.is_none(),
                    "{}: mutation broke commutativity",
                    case.alg.name
                );
                ensure!(
                    report.associative.is_none(),
                    "{}: mutation broke associativity",
                    case.alg.name
                );
                ensure!(
                    report.compatible.is_none(),
                    "{}: mutation broke bracket compatibility",
                    case.alg.name
                );
                let poisson = check_poisson(&case.alg, product, &case.z_window, None);
                if !poisson.is_clean() {
                    ensure!(
                        poisson.first_failure.is_some(),
                        "{}: Leibniz failures reported without a witness",
                        case.alg.name
                    );
                    leibniz_broken = true;
                }
                products_checked += 1;
            }
            ensure!(
                leibniz_broken,
                "{}: no mutation produced a Leibniz counterexample",
                case.alg.name
            );
        }
        Ok(format!(
            "{products_checked} random mutations: all transposed-Poisson laws exact, Leibniz witnessed"
        ))
    });
}

#[test]
fn a08_left_multiplication_is_half_derivation() {
    criterion("acceptance 08 left-multiplication", || {
        let mut maps_checked = 0usize;
        for case in mutation_cases() {
            let basis = case.alg.enumerate_basis(&case.z_window);
            let pairs = all_pairs(&basis);
            for product in &case.products {
                for z in &basis {
                    let map = left_mult_map(
                        product,
                        Element::from_term(z.clone(), GaussianRational::one()),
                    );
                    let report = check_half_derivation(&case.alg, &map, &pairs, None)
                        .map_err(|e| e.to_string())?;
                    ensure!(
                        report.is_clean(),
                        "{}: left multiplication by {} left {} residuals",
                        case.alg.name,
                        case.alg.render_basis(z),
                        report.failures.len()
                    );
                    maps_checked += 1;
                }
            }
        }
        Ok(format!("{maps_checked} left-multiplication maps, zero residual"))
    });
}

// ---------------------------------------------------------------------------
// 09: on the hwn algebra the product solve returns only the zero product
// ---------------------------------------------------------------------------

#[test]
fn a09_hwn_product_solve_is_trivial() {
    criterion("acceptance 09 hwn-product-solve", || {
        let alg = catalog("hwn_g", &params(&[("n", "1")]), &[q("1")]).unwrap();
        let solve_window = window(1, -3, 3);
        let k_window = (-17i64, 17i64);

        let mut generators = vec![ShiftMap::identity(&alg, GaussianRational::one())];
        for d in [-1i64, 1] {
            let seeds = ShiftSeeds::from([((vec![d], 0), GaussianRational::one())]);
            generators.push(family_hwn(&alg, &seeds, k_window).map_err(|e| e.to_string())?);
        }

        // truncated coefficient families are only trustworthy where the
        // window cannot see the cut: shrink the output accordingly
        let trusted = window(
            2 * solve_window.alpha_coeff_bound + 1,
            k_window.0 + 2 * solve_window.i_max + 1,
            k_window.1 + 2 * solve_window.i_min,
        );
        let outcome = solve_tps(&alg, &generators, &solve_window, GeneratorCheck::Windowed(&trusted))
            .map_err(|e| e.to_string())?;
        ensure!(
            outcome.dimension == 0,
            "product solution space has dimension {}, expected 0",
            outcome.dimension
        );
        ensure!(
            outcome.solutions.len() == 1 && outcome.solutions[0].trivial,
            "expected only the explicitly labeled zero product"
        );
        Ok(format!(
            "{} generators over {}: only the zero product survives",
            generators.len(),
            solve_window
        ))
    });
}

// ---------------------------------------------------------------------------
// 10: the shipped .liealg sources reproduce the catalog brackets, and
// malformed input is rejected with exact positions
// ---------------------------------------------------------------------------

#[test]
fn a10_dsl_sources_match_catalog() {
    criterion("acceptance 10 dsl-fidelity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x10);
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../algebras");
        let cases: [(&str, &str, Vec<(&str, &str)>, Vec<&str>); 5] = [
            ("witt.liealg", "witt", vec![], vec![]),
            ("w_ab.liealg", "w_ab", vec![("a", "1"), ("b", "-1")], vec![]),
            ("w_abs.liealg", "w_abs", vec![("a", "2"), ("b", "-1")], vec![]),
            ("wn_g.liealg", "wn_g", vec![("n", "2")], vec!["1"]),
            ("hwn_g.liealg", "hwn_g", vec![("n", "1")], vec!["1"]),
        ];
        for (file, name, ps, gens) in &cases {
            let text = std::fs::read_to_string(format!("{root}/{file}"))
                .map_err(|e| format!("{file}: {e}"))?;
            let doc = parse_document(&text).map_err(|e| format!("{file}: {e}"))?;
            let gens: Vec<GaussianRational> = gens.iter().map(|g| q(g)).collect();
            let reference = catalog(name, &params(ps), &gens).unwrap();
            let w = if gens.is_empty() { window(0, -6, 6) } else { window(2, -4, 4) };
            let basis = reference.enumerate_basis(&w);
            for (x, y) in random_pairs(&basis, 100, &mut rng) {
                let got = doc.algebra.bracket_basis(&x, &y);
                let want = reference.bracket_basis(&x, &y);
                ensure!(
                    got == want,
                    "{file}: bracket mismatch at [{}, {}]",
                    reference.render_basis(&x),
                    reference.render_basis(&y)
                );
            }
        }

        // malformed sources: kind and exact 1-based line/column
        let malformed: [(&str, ParseErrorKind, (u32, u32)); 3] = [
            (
                "algebra x() {\n    family L offset 0 grade (0, 1);\n    bracket [L(m), M(n)] = (n - m) * L(m + n);\n}\n",
                ParseErrorKind::UnknownName,
                (3, 20),
            ),
            (
                "algebra x(a = 1) {\n    family L offset 0 grade (0, 1);\n    family L offset 0 grade (0, 1);\n}\n",
                ParseErrorKind::Duplicate,
                (3, 12),
            ),
            ("algebra x(a = 1 / 2) {\n}\n", ParseErrorKind::Lex, (1, 17)),
        ];
        for (text, kind, at) in &malformed {
            let err = parse_document(text).map_err(|e| e).unwrap_err();
            ensure!(
                err.kind == *kind,
                "expected {kind:?} error, got {:?}: {}",
                err.kind,
                err.message
            );
            ensure!(
                (err.span.line, err.span.col) == *at,
                "error reported at {}:{}, expected {}:{}",
                err.span.line,
                err.span.col,
                at.0,
                at.1
            );
        }

        Ok("5 sources x 100 random brackets equal, 3 malformed inputs located".to_string())
    });
}
