use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use obstruct_core::beta::{parse_beta, BetaSystem, Certificate, PrecisionPolicy, Tail};
use obstruct_core::decomposition::{filtration_coverage, BetaDecomposition, DecompositionScheme};
use obstruct_core::factors::{apply_code, factor_language, BlockCode, FactorShift};
use obstruct_core::formats::{
    measure_from_json, measure_to_json, parse_block_code, parse_expansion_file, parse_word_file, write_block_code,
    write_expansion_file, write_word_file,
};
use obstruct_core::mme::{counting_suite, empirical_mme, parry_measure, CountingParams, Mass};
use obstruct_core::qfield::Quadratic;
use obstruct_core::symbolic::ShiftSpace;
use obstruct_core::word::{all_words, Word};

fn rational_system(p: i64, q: i64) -> BetaSystem {
    let beta = parse_beta(&format!("{p}/{q}")).unwrap();
    BetaSystem::from_beta(&beta, 40, &PrecisionPolicy::default()).unwrap()
}

/// Greedy digits of 1 in base p/q by exact rational iteration.
fn greedy_digits(p: i64, q: i64, n: usize) -> Vec<u8> {
    let beta = BigRational::new(BigInt::from(p), BigInt::from(q));
    let mut x = BigRational::one();
    (0..n)
        .map(|_| {
            let y = &x * &beta;
            let d = y.floor();
            x = y - &d;
            d.to_integer().to_u8().unwrap()
        })
        .collect()
}

fn admissible(v: &[u8], w: &[u8]) -> bool {
    (0..v.len()).all(|i| v[i..] <= w[..v.len() - i])
}

/// Non-integer rationals in (1, 4): the expansion of 1 never terminates.
fn non_integer_rational() -> impl Strategy<Value = (i64, i64)> {
    (2i64..6, 1i64..24).prop_filter_map("in (1, 4), non-integer", |(q, k)| {
        let p = q + k;
        (p < 4 * q && p % q != 0).then_some((p, q))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn language_is_the_lexicographic_rule((p, q) in non_integer_rational(), n in 1usize..9) {
        let sys = rational_system(p, q);
        let w = greedy_digits(p, q, n);
        prop_assert_eq!(sys.expansion().prefix(n), w.clone());
        let alphabet = sys.alphabet_size();
        let expected: Vec<Word> =
            all_words(alphabet, n).filter(|v| admissible(v.symbols(), &w)).collect();
        prop_assert_eq!(sys.enumerate(n).unwrap(), expected.clone());
        prop_assert_eq!(sys.count(n).unwrap(), BigUint::from(expected.len()));
    }

    #[test]
    fn split_pieces_reassemble((p, q) in non_integer_rational(), n in 0usize..10, pick in any::<prop::sample::Index>()) {
        let sys = rational_system(p, q);
        let scheme = BetaDecomposition::new(&sys);
        let words = sys.enumerate(n).unwrap();
        let v = &words[pick.index(words.len())];
        let split = scheme.split(v).unwrap();
        let (a, g, s) = split.pieces(v);
        prop_assert_eq!(a.concat(&g).concat(&s), v.clone());
        prop_assert!(scheme.member_p(&a).unwrap());
        prop_assert!(scheme.member_g(&g).unwrap());
        prop_assert!(scheme.member_s(&s).unwrap());
        prop_assert_eq!(s.symbols(), &sys.expansion().prefix(s.len())[..]);
    }

    #[test]
    fn coverage_grows_with_the_level((p, q) in non_integer_rational(), n in 1usize..12) {
        let sys = rational_system(p, q);
        let scheme = BetaDecomposition::new(&sys);
        let mut prev = BigRational::zero();
        for m in 0..=n {
            let c = filtration_coverage(&scheme, m, n).unwrap();
            prop_assert!(c >= prev);
            prev = c;
        }
        prop_assert_eq!(prev, BigRational::one());
    }

    #[test]
    fn parry_measure_is_consistent((p, q) in non_integer_rational()) {
        let sys = rational_system(p, q);
        let mu = parry_measure(&sys, 6).unwrap();
        prop_assert!(mu.normalization_error() < 1e-9);
        prop_assert!(mu.extension_error(false) < 1e-9);
        prop_assert!(mu.extension_error(true) < 1e-9);
    }

    #[test]
    fn word_files_roundtrip(words in prop::collection::vec(prop::collection::vec(0u8..12, 0..10), 0..8)) {
        let words: Vec<Word> = words.into_iter().map(Word::new).collect();
        prop_assert_eq!(parse_word_file(&write_word_file(&words, 12)).unwrap(), words.clone());
        prop_assert_eq!(parse_word_file(&write_word_file(&words, 12).replace('\n', "\n\n# note\n")).unwrap(), words);
    }

    #[test]
    fn block_codes_roundtrip(window in 1usize..4, images in prop::collection::vec(0u8..3, 27)) {
        let rules = all_words(3, window).zip(images).map(|(b, y)| format!("{} -> {y}", b.render(3))).collect::<Vec<_>>();
        let code = parse_block_code(&rules.join("\n")).unwrap();
        prop_assert_eq!(code.window(), window);
        prop_assert_eq!(parse_block_code(&write_block_code(&code)).unwrap(), code);
    }

    #[test]
    fn images_of_words_lie_in_the_factor(map in prop::collection::vec(0u8..2, 4), n in 1usize..9) {
        let sys = BetaSystem::golden_mean();
        let code = BlockCode::new(2, all_words(2, 2).zip(map).collect(), vec!["0".into(), "1".into()]).unwrap();
        let image = FactorShift::new(&sys, &code).unwrap();
        let language = factor_language(&sys, &code, n).unwrap();
        prop_assert_eq!(image.enumerate(n).unwrap(), language.clone());
        for v in sys.enumerate(n + 1).unwrap() {
            prop_assert!(language.contains(&apply_code(&code, &v).unwrap()));
        }
    }

    #[test]
    fn quadratic_field_operations(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in 1i64..50, r in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let x = Quadratic::new(BigRational::from_integer(a.into()), BigRational::from_integer(b.into()), r);
        let y = Quadratic::new(BigRational::new(c.into(), d.into()), BigRational::one(), r);
        let sum = &x + &y;
        prop_assert!((sum.to_f64() - (x.to_f64() + y.to_f64())).abs() < 1e-9 * (1.0 + sum.to_f64().abs()));
        prop_assert_eq!(&(&x * &y) / &y, x.clone());
        prop_assert_eq!(x.norm(), (&x * &x.conjugate()).as_rational().unwrap().clone());
        prop_assert_eq!(x.signum(), x.to_f64().partial_cmp(&0.0).unwrap() as i32);
    }
}

#[test]
fn counting_suite_passes_beyond_two_letters() {
    for literal in ["1+sqrt(2)", "5/2", "3", "(3+sqrt(5))/2"] {
        let beta = parse_beta(literal).unwrap();
        let sys = BetaSystem::from_beta(&beta, 64, &PrecisionPolicy::default()).unwrap();
        let params = CountingParams { n_max: 14, ..CountingParams::default() };
        let report = counting_suite(&BetaDecomposition::new(&sys), &params).unwrap();
        for check in &report.checks {
            assert!(check.ok(), "β = {literal}: ({}) {:?} {:?}", check.id, check.status, check.witness);
        }
    }
}

#[test]
fn empirical_full_shift_is_uniform() {
    let full = BetaSystem::full_shift(3);
    let mu = empirical_mme(&full, 40, 3).unwrap();
    for v in all_words(3, 1) {
        assert_eq!(mu.mass(&v).unwrap(), Mass::Rational(BigRational::new(BigInt::one(), BigInt::from(3))));
    }
    assert!(mu.normalization_error() == 0.0);
}

#[test]
fn measure_and_expansion_files_roundtrip() {
    let golden = BetaSystem::golden_mean();
    let mu = parry_measure(&golden, 5).unwrap();
    let back = measure_from_json(&measure_to_json(&mu)).unwrap();
    assert_eq!(back.table().len(), mu.table().len());
    for (u, m) in mu.table() {
        assert_eq!(back.mass(u).unwrap().to_f64(), m.to_f64(), "{u}");
    }
    let uniform = parry_measure(&BetaSystem::full_shift(2), 4).unwrap();
    assert_eq!(measure_from_json(&measure_to_json(&uniform)).unwrap().table(), uniform.table());
    for literal in ["(1+sqrt(5))/2", "3/2", "2", "1+sqrt(2)"] {
        let sys = BetaSystem::from_beta(&parse_beta(literal).unwrap(), 32, &PrecisionPolicy::default()).unwrap();
        let text = write_expansion_file(sys.expansion());
        let e = parse_expansion_file(&text).unwrap();
        assert_eq!(e.digits(), sys.expansion().digits(), "{literal}");
        match (e.tail(), sys.expansion().tail()) {
            (Tail::Truncated { horizon: a, certificate }, Tail::Truncated { horizon: b, .. }) => {
                assert_eq!((a, certificate), (b, &Certificate::Supplied), "{literal}")
            }
            (a, b) => assert_eq!(a, b, "{literal}"),
        }
    }
}
