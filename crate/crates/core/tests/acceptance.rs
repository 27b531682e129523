//! Acceptance suite: one line per criterion, `[PASS]` or `[FAIL]`, with timing.
//!
//! Reference values come from a brute-force rational Gram–Schmidt written
//! here, on moments computed here from their closed forms, so the pipeline is
//! never its own oracle for the classical families.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use favard::cap::{extract_cap, verify_adjointness, verify_commutators, verify_jacobi_relation};
use favard::fock::{build_fock, compare_moments};
use favard::gradation::GradedBasis;
use favard::jacobi::{
    creation_word_image, decompose, distinct_permutations, verify_favard_conditions,
    JacobiSequence, COMPATIBILITY,
};
use favard::linalg::{Matrix, PsdPseudoInverse};
use favard::mindex::{creation_shift, enumerate_level, MultiIndex};
use favard::moments::{CatalogMeasure, MomentFunctional};
use favard::{Error, Rational, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Zero};

type Q = Rational;

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn fact(n: u32) -> Q {
    (1..=n).fold(q(1), |acc, k| acc * q(k as i64))
}

// ---------------------------------------------------------------------------
// Oracle: closed-form moments and dense Gram–Schmidt over monomials.

#[derive(Clone, Copy, Debug)]
enum Family {
    Gaussian,
    Uniform,
    Exponential,
}

fn moment_1d(family: Family, k: u32) -> Q {
    match family {
        Family::Gaussian if k % 2 == 1 => q(0),
        // (k−1)!! by recursion
        Family::Gaussian => (1..k).step_by(2).fold(q(1), |acc, i| acc * q(i as i64)),
        Family::Uniform if k % 2 == 1 => q(0),
        Family::Uniform => Q::new(BigInt::one(), BigInt::from(k + 1)),
        Family::Exponential => fact(k),
    }
}

fn moment(family: Family, m: &[u32]) -> Q {
    m.iter().fold(q(1), |acc, &k| acc * moment_1d(family, k))
}

/// Exponent vectors of total degree `<= top`, grouped by degree.
fn monomials(d: usize, top: usize) -> Vec<Vec<Vec<u32>>> {
    let mut by_degree = vec![Vec::new(); top + 1];
    let mut cur = vec![0u32; d];
    loop {
        let deg: u32 = cur.iter().sum();
        if deg as usize <= top {
            by_degree[deg as usize].push(cur.clone());
        }
        // odometer
        let mut i = 0;
        loop {
            if i == d {
                return by_degree;
            }
            cur[i] += 1;
            if cur[i] as usize <= top {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}

type Dense = BTreeMap<Vec<u32>, Q>;

fn inner(family: Family, a: &Dense, b: &Dense) -> Q {
    let mut s = q(0);
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Vec<u32> = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            s += ca.clone() * cb * moment(family, &m);
        }
    }
    s
}

fn times_coordinate(p: &Dense, j: usize) -> Dense {
    p.iter()
        .map(|(m, c)| {
            let mut m = m.clone();
            m[j] += 1;
            (m, c.clone())
        })
        .collect()
}

/// Per level: monic orthogonal polynomials keyed by their leading exponent.
/// Assumes a nondegenerate functional (all norms positive).
fn oracle_levels(family: Family, d: usize, top: usize) -> Vec<BTreeMap<Vec<u32>, Dense>> {
    let mut orthogonal: Vec<Dense> = Vec::new();
    let mut levels = Vec::new();
    for group in monomials(d, top) {
        let mut level = BTreeMap::new();
        let lower = orthogonal.clone();
        for m in group {
            let mono: Dense = [(m.clone(), q(1))].into_iter().collect();
            let mut p = mono.clone();
            for o in &lower {
                let c = inner(family, o, &mono) / inner(family, o, o);
                for (k, v) in o {
                    *p.entry(k.clone()).or_insert_with(|| q(0)) -= c.clone() * v;
                }
            }
            p.retain(|_, v| !v.is_zero());
            level.insert(m, p);
        }
        // orthonormal-free Gram–Schmidt inside the level for later projections
        let mut done: Vec<Dense> = Vec::new();
        for p in level.values() {
            let mut r = p.clone();
            for o in &done {
                let c = inner(family, o, p) / inner(family, o, o);
                for (k, v) in o {
                    *r.entry(k.clone()).or_insert_with(|| q(0)) -= c.clone() * v;
                }
            }
            r.retain(|_, v| !v.is_zero());
            done.push(r);
        }
        orthogonal.extend(done);
        levels.push(level);
    }
    levels
}

/// `(G_n, [α_{j|n}])` in the crate's level order.
fn oracle_jacobi(family: Family, d: usize, top: usize) -> Vec<(Matrix<Q>, Vec<Matrix<Q>>)> {
    let levels = oracle_levels(family, d, top);
    (0..=top)
        .map(|n| {
            let order: Vec<Vec<u32>> = enumerate_level(d, n)
                .iter()
                .map(|m| m.exponents().to_vec())
                .collect();
            let ps: Vec<&Dense> = order.iter().map(|m| &levels[n][m]).collect();
            let g = Matrix::from_fn(ps.len(), ps.len(), |a, b| inner(family, ps[a], ps[b]));
            let g_inv = favard::linalg::inverse(&g, 0.0).expect("nondegenerate");
            let alpha = (0..d)
                .map(|j| {
                    let b = Matrix::from_fn(ps.len(), ps.len(), |a, c| {
                        inner(family, ps[a], &times_coordinate(ps[c], j))
                    });
                    g_inv.matmul(&b)
                })
                .collect();
            (g, alpha)
        })
        .collect()
}

fn catalog(family: Family) -> CatalogMeasure {
    match family {
        Family::Gaussian => CatalogMeasure::GaussianProduct,
        Family::Uniform => CatalogMeasure::UniformBox,
        Family::Exponential => CatalogMeasure::ExponentialProduct,
    }
}

fn run_exact(measure: &CatalogMeasure, d: usize, top: usize) -> favard::jacobi::Decomposition<Q> {
    let phi = MomentFunctional::<Q>::from_catalog(measure, d, 2 * top + 1).unwrap();
    decompose(&phi, top, 0.0).unwrap()
}

fn scalar_of(m: &Matrix<Q>) -> Q {
    assert_eq!((m.rows(), m.cols()), (1, 1));
    m[(0, 0)].clone()
}

fn timed(limit: Option<Duration>, label: &str, f: impl FnOnce()) -> Duration {
    let start = Instant::now();
    f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        assert!(elapsed < limit, "{label} took {elapsed:?}, limit {limit:?}");
    }
    elapsed
}

/// Atomic measures used wherever a finite support is needed.
fn atoms(d: usize) -> CatalogMeasure {
    let third = Q::new(BigInt::one(), BigInt::from(3));
    let pts: Vec<Vec<i64>> = match d {
        1 => vec![vec![0], vec![1], vec![2]],
        2 => vec![vec![0, 0], vec![1, -1], vec![2, 1]],
        _ => vec![vec![0, 1, 0], vec![1, 0, -1], vec![-1, 2, 1]],
    };
    CatalogMeasure::Atoms(
        pts.into_iter()
            .map(|p| (p.into_iter().map(q).collect(), third.clone()))
            .collect(),
    )
}

fn all_catalog(d: usize) -> Vec<CatalogMeasure> {
    let mut v = vec![
        CatalogMeasure::GaussianProduct,
        CatalogMeasure::UniformBox,
        CatalogMeasure::ExponentialProduct,
        CatalogMeasure::RademacherProduct,
        atoms(d),
    ];
    if d == 2 {
        v.push(CatalogMeasure::CircleUniform);
    }
    v
}

// ---------------------------------------------------------------------------
// Criteria.

fn ac1_classical_one_dimensional() -> String {
    // Gaussian: Gω_n = n!, α_n = 0 for n <= 8
    let t = timed(Some(Duration::from_secs(1)), "gaussian", || {
        let dec = run_exact(&CatalogMeasure::GaussianProduct, 1, 8);
        let oracle = oracle_jacobi(Family::Gaussian, 1, 8);
        for n in 0..=8 {
            assert_eq!(scalar_of(dec.jacobi.gomega(n)), fact(n as u32), "Gω_{n}");
            assert_eq!(dec.jacobi.gomega(n), &oracle[n].0);
            assert!(scalar_of(dec.jacobi.alpha(0, n)).is_zero());
            assert_eq!(dec.jacobi.alpha(0, n), &oracle[n].1[0]);
        }
    });
    // uniform: ω_n = n²/(4n²−1) for n <= 6
    let u = timed(Some(Duration::from_secs(1)), "uniform", || {
        let dec = run_exact(&CatalogMeasure::UniformBox, 1, 6);
        let oracle = oracle_jacobi(Family::Uniform, 1, 6);
        for n in 1..=6 {
            let omega = scalar_of(dec.jacobi.gomega(n)) / scalar_of(dec.jacobi.gomega(n - 1));
            let n2 = (n * n) as i64;
            assert_eq!(
                omega,
                Q::new(BigInt::from(n2), BigInt::from(4 * n2 - 1)),
                "ω_{n}"
            );
            assert_eq!(dec.jacobi.gomega(n), &oracle[n].0);
            assert_eq!(dec.jacobi.alpha(0, n), &oracle[n].1[0]);
        }
    });
    // exponential: α_n = 2n+1, ω_n = n² for n <= 5
    let e = timed(Some(Duration::from_secs(1)), "exponential", || {
        let dec = run_exact(&CatalogMeasure::ExponentialProduct, 1, 5);
        let oracle = oracle_jacobi(Family::Exponential, 1, 5);
        for n in 0..=5 {
            assert_eq!(
                scalar_of(dec.jacobi.alpha(0, n)),
                q(2 * n as i64 + 1),
                "α_{n}"
            );
            assert_eq!(dec.jacobi.alpha(0, n), &oracle[n].1[0]);
            assert_eq!(dec.jacobi.gomega(n), &oracle[n].0);
            if n > 0 {
                let omega = scalar_of(dec.jacobi.gomega(n)) / scalar_of(dec.jacobi.gomega(n - 1));
                assert_eq!(omega, q((n * n) as i64), "ω_{n}");
            }
        }
    });
    format!("gaussian {t:.2?}, uniform {u:.2?}, exponential {e:.2?}")
}

fn ac2_gaussian_plane() -> String {
    let t = timed(Some(Duration::from_secs(5)), "gaussian d=2", || {
        let dec = run_exact(&CatalogMeasure::GaussianProduct, 2, 4);
        let oracle = oracle_jacobi(Family::Gaussian, 2, 4);
        for n in 0..=4 {
            let idx = enumerate_level(2, n);
            // n!·T_n has diagonal m!
            let expected = Matrix::diagonal(
                &idx.iter()
                    .map(|m| Q::from_integer(m.factorial()))
                    .collect::<Vec<_>>(),
            );
            assert_eq!(dec.jacobi.gomega(n), &expected, "Gω_{n}");
            assert_eq!(dec.jacobi.gomega(n), &oracle[n].0);
            let omega = dec.jacobi.omega(n);
            let nf = fact(n as u32);
            assert_eq!(omega, Matrix::identity(idx.len()).scale(&nf), "Ω_{n}");
            for j in 0..2 {
                assert!(dec.jacobi.alpha(j, n).is_zero_within(0.0));
            }
        }
    });
    format!("N=4 in {t:.2?}")
}

fn ac3_roundtrip() -> String {
    let mut exact_words = 0;
    let mut float_words = 0;
    let mut float_dev: f64 = 0.0;
    let t = timed(Some(Duration::from_secs(30)), "round trips", || {
        for d in 1..=3 {
            for measure in all_catalog(d) {
                for top in 1..=4 {
                    let max_len = 2 * top + 1;
                    let phi =
                        MomentFunctional::<Q>::from_catalog(&measure, d, 2 * top + 1).unwrap();
                    let dec = decompose(&phi, top, 0.0).unwrap();
                    let (fock, ops) = build_fock(&dec.jacobi, 0.0).unwrap();
                    let r = compare_moments(&phi, &fock, &ops, max_len, 0.0, true).unwrap();
                    assert!(
                        r.passed,
                        "{} d={d} N={top}: {:?}",
                        measure.name(),
                        r.check.failures.first()
                    );
                    assert_eq!(r.max_deviation, 0.0);
                    exact_words += r.words_checked;

                    let phi =
                        MomentFunctional::<f64>::from_catalog(&measure, d, 2 * top + 1).unwrap();
                    let dec = decompose(&phi, top, 1e-10).unwrap();
                    let (fock, ops) = build_fock(&dec.jacobi, 1e-10).unwrap();
                    let r = compare_moments(&phi, &fock, &ops, max_len, 1e-9, true).unwrap();
                    assert!(
                        r.passed,
                        "float {} d={d} N={top}: {:?}",
                        measure.name(),
                        r.check.failures.first()
                    );
                    float_dev = float_dev.max(r.max_deviation);
                    float_words += r.words_checked;
                }
            }
        }
    });
    format!("{exact_words} exact words (deviation 0), {float_words} float words (max deviation {float_dev:.1e}) in {t:.2?}")
}

fn ac4_operator_identities() -> String {
    let mut cases = 0;
    for family in [Family::Gaussian, Family::Uniform, Family::Exponential] {
        for d in 1..=3 {
            let top = 4;
            let phi =
                MomentFunctional::<Q>::from_catalog(&catalog(family), d, 2 * top + 1).unwrap();
            let gb = GradedBasis::build(&phi, top, 0.0).unwrap();
            let cap = extract_cap(&gb, &phi).unwrap();
            let jr = verify_jacobi_relation(&cap, &gb, &phi, 0.0).unwrap();
            assert!(
                jr.passed && jr.max_deviation == 0.0,
                "{family:?} d={d}: {:?}",
                jr.failures.first()
            );
            let adj = verify_adjointness(&cap, 0.0);
            assert!(adj.passed, "{family:?} d={d}: {:?}", adj.failures.first());
            let comm = verify_commutators(&cap, 0.0);
            assert!(comm.passed, "{family:?} d={d}: {:?}", comm.failures.first());
            // creators commute entrywise as well
            for n in 0..top - 1 {
                for j in 0..d {
                    for k in 0..d {
                        assert_eq!(
                            cap.aplus(j, n + 1).matmul(cap.aplus(k, n)),
                            cap.aplus(k, n + 1).matmul(cap.aplus(j, n))
                        );
                    }
                }
            }
            // the preservation part agrees with the oracle
            let oracle = oracle_jacobi(family, d, 2.min(top));
            for (n, (_, alpha)) in oracle.iter().enumerate() {
                for j in 0..d {
                    assert_eq!(
                        cap.azero(j, n),
                        &alpha[j],
                        "{family:?} d={d} a⁰_{{{j}|{n}}}"
                    );
                }
            }
            cases += 1;
        }
    }
    format!("{cases} (family, d) cases at N=4, all identities exact")
}

fn ac5_degeneracy() -> String {
    // Rademacher, d=1: termination at 2, every later level null
    let dec = run_exact(&CatalogMeasure::RademacherProduct, 1, 6);
    assert_eq!(dec.gradation.termination_level(), Some(2));
    assert_eq!(dec.gradation.ranks(), vec![1, 1, 0, 0, 0, 0, 0]);
    for n in 2..=6 {
        assert!(scalar_of(dec.jacobi.gomega(n)).is_zero());
    }
    // three atoms on the line: termination at 3
    let dec3 = run_exact(&atoms(1), 1, 5);
    assert_eq!(dec3.gradation.termination_level(), Some(3));
    assert_eq!(dec3.gradation.ranks(), vec![1, 1, 1, 0, 0, 0]);
    // circle: kernel (1,0,1) at level 2, i.e. x² + y² − 1
    let dec = run_exact(&CatalogMeasure::CircleUniform, 2, 4);
    let ker = dec.gradation.kernel_basis(2);
    assert_eq!(ker.len(), 1);
    let k = &ker[0];
    assert!(k[1].is_zero() && k[0] == k[2] && !k[0].is_zero());
    let poly = dec.gradation.level(2).combine(k);
    let scale = Q::one() / k[0].clone();
    let expected = favard::poly::Polynomial::from_terms(
        2,
        [
            (MultiIndex::new(vec![2, 0]), q(1)),
            (MultiIndex::new(vec![0, 2]), q(1)),
            (MultiIndex::new(vec![0, 0]), q(-1)),
        ],
    );
    assert_eq!(poly.scale(&scale), expected);
    // kernel lifts: every kernel vector of Gω_n lands in ker Gω_{n+1}
    let mut lifts = 0;
    for n in 2..4 {
        let kern = PsdPseudoInverse::new(dec.jacobi.gomega(n), 0.0).kernel;
        assert_eq!(kern.len(), n - 1, "dim ker Gω_{n}");
        for x in &kern {
            for j in 0..2 {
                let lifted = creation_shift::<Q>(2, n, j).matvec(x);
                assert!(dec
                    .jacobi
                    .gomega(n + 1)
                    .matvec(&lifted)
                    .iter()
                    .all(Zero::is_zero));
                lifts += 1;
            }
        }
    }
    let favard = verify_favard_conditions(&dec.jacobi, Some(&dec.gradation), 0.0);
    assert!(favard.passed);
    format!("rademacher→2, 3 atoms→3, circle kernel (1,0,1), {lifts} kernel lifts verified")
}

const VIOLATING_1D: &str = r#"{
  "d": 1, "N": 3, "order": "graded-lex", "metric": "m!/n!",
  "levels": [
    {"n": 0, "Gomega": [["1"]], "alpha": {"1": [["0"]]}},
    {"n": 1, "Gomega": [["1"]], "alpha": {"1": [["0"]]}},
    {"n": 2, "Gomega": [["0"]], "alpha": {"1": [["0"]]}},
    {"n": 3, "Gomega": [["1"]], "alpha": {"1": [["0"]]}}
  ]
}"#;

fn ac6_compatibility_is_adjointability() -> String {
    // one dimension: ω_2 = 0 but ω_3 ≠ 0
    let bad = JacobiSequence::<Q>::from_file_str(VIOLATING_1D).unwrap();
    let report = verify_favard_conditions(&bad, None, 0.0);
    assert_eq!(report.first_failure(), Some((COMPATIBILITY, 2)));
    let err = build_fock(&bad, 0.0).unwrap_err();
    assert!(
        matches!(
            err,
            Error::InconsistentAdjoint {
                level: 3,
                coordinate: 1
            }
        ),
        "{err}"
    );
    assert!(err.to_string().contains("inconsistent adjoint"));
    let repaired = JacobiSequence::<Q>::from_file_str(&VIOLATING_1D.replace(
        r#"{"n": 3, "Gomega": [["1"]]"#,
        r#"{"n": 3, "Gomega": [["0"]]"#,
    ))
    .unwrap();
    assert!(verify_favard_conditions(&repaired, None, 0.0).passed);
    build_fock(&repaired, 0.0).unwrap();

    // the plane: circle data whose level-3 metric is made definite, so the
    // zero-norm x² + y² − 1 no longer lifts
    let circle = run_exact(&CatalogMeasure::CircleUniform, 2, 3).jacobi;
    let mut file: serde_json::Value = serde_json::from_str(&circle.to_file_string()).unwrap();
    let identity: Vec<Vec<String>> = (0..4)
        .map(|r| {
            (0..4)
                .map(|c| if r == c { "1/8" } else { "0" }.to_string())
                .collect()
        })
        .collect();
    file["levels"][3]["Gomega"] = serde_json::json!(identity);
    let bad = JacobiSequence::<Q>::from_file_str(&file.to_string()).unwrap();
    let err = build_fock(&bad, 0.0).unwrap_err();
    assert!(
        matches!(err, Error::InconsistentAdjoint { level: 3, .. }),
        "{err}"
    );
    let repaired = JacobiSequence::<Q>::from_file_str(&circle.to_file_string()).unwrap();
    build_fock(&repaired, 0.0).unwrap();
    format!("1-d and circle violations rejected ({err}); repaired files accepted")
}

fn ac7_float_exact_agreement() -> String {
    let mut worst: f64 = 0.0;
    let mut entries = 0;
    for d in 1..=3 {
        for measure in all_catalog(d) {
            let top = 4;
            let exact = run_exact(&measure, d, top).jacobi;
            let phi = MomentFunctional::<f64>::from_catalog(&measure, d, 2 * top + 1).unwrap();
            let float = decompose(&phi, top, 1e-10).unwrap().jacobi;
            for n in 0..=top {
                let mut pairs = vec![(exact.gomega(n), float.gomega(n))];
                for j in 0..d {
                    pairs.push((exact.alpha(j, n), float.alpha(j, n)));
                }
                for (e, f) in pairs {
                    for r in 0..e.rows() {
                        for c in 0..e.cols() {
                            let dev = (e[(r, c)].to_f64() - f[(r, c)]).abs();
                            assert!(
                                dev <= 1e-10,
                                "{} d={d} n={n} ({r},{c}): {dev:e}",
                                measure.name()
                            );
                            worst = worst.max(dev);
                            entries += 1;
                        }
                    }
                }
            }
        }
    }
    format!("{entries} entries, max deviation {worst:.1e}")
}

fn ac8_word_order() -> String {
    let mut words = 0;
    for measure in [
        CatalogMeasure::GaussianProduct,
        CatalogMeasure::UniformBox,
        CatalogMeasure::ExponentialProduct,
        atoms(3),
    ] {
        let dec = run_exact(&measure, 3, 3);
        for m in enumerate_level(3, 3) {
            let reference = creation_word_image(&dec.cap, &m.canonical_word());
            for word in distinct_permutations(&m.canonical_word()) {
                assert_eq!(
                    creation_word_image(&dec.cap, &word),
                    reference,
                    "{} {word:?}",
                    measure.name()
                );
                words += 1;
            }
        }
    }
    // 3 + 18 + 6 orderings per measure at d=3, n=3
    assert_eq!(words, 4 * 27);
    format!("{words} orderings across 4 measures agree exactly")
}

type Criterion = (&'static str, &'static str, fn() -> String);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        (
            "AC1",
            "1-d classical families (exact)",
            ac1_classical_one_dimensional,
        ),
        (
            "AC2",
            "d=2 Gaussian Gω_n = n!·T_n, α = 0 (exact)",
            ac2_gaussian_plane,
        ),
        (
            "AC3",
            "round-trip closure, catalog d<=3, N<=4",
            ac3_roundtrip,
        ),
        (
            "AC4",
            "operator identities (exact)",
            ac4_operator_identities,
        ),
        (
            "AC5",
            "degeneracy: termination, kernels, lifts",
            ac5_degeneracy,
        ),
        (
            "AC6",
            "compatibility ⇔ adjointability",
            ac6_compatibility_is_adjointability,
        ),
        (
            "AC7",
            "float/exact agreement within 1e-10",
            ac7_float_exact_agreement,
        ),
        ("AC8", "word-order independence of U_3, d=3", ac8_word_order),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (id, title, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let line = match &result {
            Ok(detail) => format!("[PASS] {id} {title}: {detail} ({elapsed:.2?})"),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                failed.push(id);
                format!("[FAIL] {id} {title}: {msg}")
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
