use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use obstruct_core::beta::BetaSystem;
use obstruct_core::decomposition::{
    filtration_coverage, free_concatenation_property, min_gluing_time, obstruction_entropy_upper,
    zero_padding_property, BetaDecomposition, DecompositionScheme, DegenerateDecomposition, GluingTime, SpecParams,
};
use obstruct_core::factors::{
    factor_entropy_positive, factor_mme_check, factor_suffix_entropy, induced_specification, nonexpansive_growth,
    FactorEntropyVerdict, FactorShift, InducedDecomposition,
};
use obstruct_core::formats::{counts_csv, measure_from_json, measure_to_json, parse_block_code, parse_word_file, write_word_file};
use obstruct_core::mme::{
    counting_suite, empirical_mme, filtration_pairs, gibbs_check, max_cylinder_difference, measure_entropy,
    mixing_check, mixing_liminf_probe, parry_measure, positive_mass_count, CheckStatus, CountingParams,
    CountingReport, CylinderMeasure,
};
use obstruct_core::symbolic::{upper_entropy, AutomatonCollection, OrbitCollection, ScaleIndex, ShiftSpace};
use obstruct_core::word::Word;

use crate::config::{DecompOp, RunConfig, SchemeKind};
use crate::{read_file, CliError, Outcome, RunOutput};

/// Gap between `log β` and the obstruction entropy below which the
/// entropy-gap hypothesis is reported as unmet.
const ENTROPY_GAP_MARGIN: f64 = 1e-2;
/// Longest word in each pair of the mixing check.
const MIXING_WORD_LEN: usize = 2;
/// Number of gaps past `2τ_M` in the mixing check.
const MIXING_GAPS: usize = 4;
/// Offsets of the `[0] ∩ σ^{-m}[0]` probe.
const PROBE_OFFSETS: usize = 10;
/// Cap on `n` for the exhaustive decomposition properties.
const PROPERTY_LEN: usize = 14;
/// Largest `|L_n|` enumerated by the exhaustive decomposition properties.
const PROPERTY_WORDS: u64 = 1 << 17;
/// Largest level of a Parry table built by `verify`.
const MEASURE_WORDS: u64 = 1 << 16;
const POSITIVE_MASS_GAMMAS: [(i64, i64); 3] = [(1, 4), (1, 2), (3, 4)];
/// Length of the `2^m` concatenations in the factor entropy search.
const FACTOR_CONCAT: usize = 6;
/// Cap on `n` for the factor searches that enumerate preimages.
const FACTOR_SEARCH_LEN: usize = 12;
const FACTOR_MME_LENGTHS: (usize, usize) = (500, 1000);
const FACTOR_MME_TOLERANCE: f64 = 0.05;

/// Longer exact values are left out of reports.
const EXACT_STRING_LEN: usize = 64;

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn ratio_value(r: &BigRational) -> Value {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string() })
}

fn beta_value(sys: &BetaSystem) -> Value {
    json!({ "value": sys.beta().render(), "approx": sys.beta().to_f64(), "log": sys.entropy() })
}

/// One named check with its status and details.
struct Check {
    name: &'static str,
    status: &'static str,
    outcome: Outcome,
    report: Value,
}

impl Check {
    fn new(name: &'static str, outcome: Outcome, report: Value) -> Self {
        let status = match outcome {
            Outcome::Pass => "pass",
            Outcome::Violation => "fail",
            Outcome::Inconclusive => "inconclusive",
        };
        Check { name, status, outcome, report }
    }

    fn from_bool(name: &'static str, pass: bool, report: Value) -> Self {
        Self::new(name, if pass { Outcome::Pass } else { Outcome::Violation }, report)
    }

    fn skipped(name: &'static str, reason: &str) -> Self {
        Check { name, status: "skipped", outcome: Outcome::Pass, report: json!({ "reason": reason }) }
    }

    fn to_value(&self) -> Value {
        json!({ "name": self.name, "status": self.status, "report": self.report })
    }
}

fn checks_output(checks: &[Check], mut result: Value, files: Vec<(String, String)>, csv: Vec<(String, String)>) -> RunOutput {
    result["checks"] = Value::Array(checks.iter().map(Check::to_value).collect());
    RunOutput { outcome: Outcome::combine(checks.iter().map(|c| c.outcome)), result, files, csv }
}

fn scheme_for<'a>(kind: SchemeKind, sys: &'a BetaSystem, beta: &'a BetaDecomposition) -> Box<dyn DecompositionScheme + 'a> {
    match kind {
        SchemeKind::Beta => Box::new(beta.clone()),
        SchemeKind::Degenerate => Box::new(DegenerateDecomposition::new(sys)),
    }
}

fn counts_upto(sys: &BetaSystem, n_max: usize) -> Result<Vec<(usize, num_bigint::BigUint)>, CliError> {
    (1..=n_max).map(|n| Ok((n, sys.count(n)?))).collect()
}

pub fn expand(config: &RunConfig, sys: &BetaSystem) -> Result<RunOutput, CliError> {
    let w = sys.expansion();
    let size = sys.alphabet_size();
    let result = json!({
        "beta": beta_value(sys),
        "greedy": sys.greedy().render(),
        "expansion": w.render(),
        "digits": Word::new(w.digits().to_vec()).render(size),
        "tail": value(w.tail()),
        "horizon": sys.horizon(),
        "alphabet_size": size,
        "automaton_states": sys.automaton().num_states(),
    });
    let n_max = sys.horizon().map_or(config.n_max, |h| h.min(config.n_max));
    let csv = vec![
        ("automaton.csv".to_string(), sys.automaton().edge_list_csv()),
        ("counts.csv".to_string(), counts_csv(&counts_upto(sys, n_max)?)),
    ];
    Ok(RunOutput { outcome: Outcome::Pass, result, files: Vec::new(), csv })
}

pub fn entropy(config: &RunConfig, sys: &BetaSystem) -> Result<RunOutput, CliError> {
    let counts = counts_upto(sys, config.n_max)?;
    let estimate = upper_entropy(&AutomatonCollection::whole_shift(sys), ScaleIndex(config.depth), config.n_max)?;
    let log_beta = sys.entropy();
    let result = json!({
        "beta": beta_value(sys),
        "n_max": config.n_max,
        "entropy": estimate.rate,
        "regression": estimate.regression,
        "tail_sup": estimate.tail_sup,
        "log_beta": log_beta,
        "deviation": (estimate.rate - log_beta).abs(),
        "closed_form": sys.beta().as_integer().map(|k| format!("log {k}")),
        "counts": counts.iter().map(|(n, c)| json!({ "n": n, "count": c.to_string() })).collect::<Vec<_>>(),
        "horizon": sys.horizon(),
    });
    Ok(RunOutput { outcome: Outcome::Pass, result, files: Vec::new(), csv: vec![("counts.csv".into(), counts_csv(&counts))] })
}

fn counting_outcome(r: &CountingReport) -> Outcome {
    Outcome::combine(r.checks.iter().map(|c| match c.status {
        CheckStatus::Pass | CheckStatus::Skipped(_) => Outcome::Pass,
        CheckStatus::Fail => Outcome::Violation,
        CheckStatus::Inconclusive => Outcome::Inconclusive,
    }))
}

fn load_measure(config: &RunConfig, sys: &BetaSystem) -> Result<CylinderMeasure, CliError> {
    Ok(match &config.measure_file {
        Some(path) => measure_from_json(&read_file(path)?)?,
        None => parry_measure(sys, longest_len_within(sys, config.measure_depth, MEASURE_WORDS)?.max(1))?,
    })
}

pub fn verify(config: &RunConfig, sys: &BetaSystem) -> Result<RunOutput, CliError> {
    let beta_scheme = BetaDecomposition::new(sys);
    let scheme = scheme_for(config.scheme, sys, &beta_scheme);
    let scheme = scheme.as_ref();
    let j = config.depth;
    let log_beta = sys.entropy();
    let beta = sys.beta();
    let mut checks = Vec::new();

    let params = CountingParams { n_max: config.n_max, j, tau_max: config.tau_max, ..CountingParams::default() };
    let counting = counting_suite(scheme, &params)?;
    checks.push(Check::new("counting", counting_outcome(&counting), value(&counting)));
    let c1 = counting.c1_sup;

    let obstruction = obstruction_entropy_upper(scheme, ScaleIndex(j), config.n_max)?;
    let gap_met = !scheme.is_degenerate() && obstruction.rate + ENTROPY_GAP_MARGIN < log_beta;
    let unmet = "entropy-gap hypothesis unmet";

    let measure = load_measure(config, sys)?;
    let depth = measure.depth();
    // the Gibbs and mixing bounds on G^M are stated with the gluing time of G^M
    let level_collection = scheme.filtration(config.level);
    let level_params = spec_params_for(level_collection.as_ref(), j)?;
    let (level_gluing, _) = min_gluing_time(level_collection.as_ref(), ScaleIndex(j), config.tau_max, &level_params)?;
    let tau_m = match level_gluing {
        GluingTime::Found { tau } => Some(tau),
        _ => None,
    };
    if !gap_met {
        checks.push(Check::skipped("gibbs", unmet));
        checks.push(Check::skipped("mixing", unmet));
        checks.push(Check::skipped("mixing-probe", unmet));
        checks.push(Check::skipped("positive-mass", unmet));
    } else {
        if depth > j {
            let g = gibbs_check(&measure, scheme, config.level, 1..=depth - j, j)?;
            let g = match tau_m {
                Some(t) => g.with_proof_constant(c1, t, log_beta),
                None => g,
            };
            checks.push(Check::from_bool("gibbs", g.pass, value(&g)));
        } else {
            checks.push(Check::new("gibbs", Outcome::Inconclusive, json!({ "reason": "measure depth too small" })));
        }

        // gaps 2τ_M ..= 2τ_M + MIXING_GAPS; a Parry table is rebuilt deep enough
        let needed = tau_m.map(|t| 2 * MIXING_WORD_LEN + 2 * t + MIXING_GAPS);
        let deeper = match needed {
            Some(d) if d > depth && config.measure_file.is_none() && longest_len_within(sys, d, MEASURE_WORDS)? == d => {
                Some(parry_measure(sys, d)?)
            }
            _ => None,
        };
        let mixing_measure = deeper.as_ref().unwrap_or(&measure);
        let window = tau_m.map(|t| (2 * t, mixing_measure.depth().saturating_sub(2 * MIXING_WORD_LEN)));
        match window.filter(|(lo, hi)| hi >= lo) {
            Some((lo, hi)) => {
                let tau = lo / 2;
                let pairs = filtration_pairs(scheme, config.level, MIXING_WORD_LEN)?;
                let label = format!("G^{} pairs", config.level);
                let m = mixing_check(mixing_measure, beta, &pairs, lo..=hi.min(lo + MIXING_GAPS), tau, &label)?
                    .with_proof_constant(c1, log_beta);
                checks.push(Check::from_bool("mixing", m.pass, value(&m)));
            }
            None => checks.push(Check::new(
                "mixing",
                Outcome::Inconclusive,
                json!({ "reason": "no gluing time for G^M within tau-max, or measure depth too small", "gluing": value(&level_gluing) }),
            )),
        }

        let offsets = PROBE_OFFSETS.min(depth.saturating_sub(1));
        let zero = vec![Word::from_digits("0")];
        let probe = mixing_liminf_probe(&measure, &zero, &zero, 1..=offsets)?;
        let pair = [(zero[0].clone(), zero[0].clone())];
        let k_prime = mixing_check(&measure, beta, &pair, 0..=offsets.saturating_sub(1), 0, "[0], [0]")?.k_found;
        let floor = k_prime * beta.to_f64().powi(-2);
        let inf = probe.infimum().unwrap_or(0.0);
        let pass = offsets > 0 && inf > 0.0 && inf >= floor * (1.0 - 1e-12);
        checks.push(Check::from_bool("mixing-probe", pass, json!({ "probe": value(&probe), "k_prime": k_prime, "floor": floor })));

        let mut rows = Vec::new();
        let mut pass = true;
        for (num, den) in POSITIVE_MASS_GAMMAS {
            let gamma = BigRational::new(BigInt::from(num), BigInt::from(den));
            let c_gamma = counting.c_gamma(num as f64 / den as f64);
            for n in 1..=depth {
                let count = positive_mass_count(&measure, &gamma, n)?;
                let bound = c_gamma * beta.to_f64().powi(n as i32);
                pass &= count as f64 >= bound;
                rows.push(json!({ "gamma": format!("{num}/{den}"), "n": n, "count": count, "bound": bound }));
            }
        }
        checks.push(Check::from_bool("positive-mass", pass, json!({ "rows": rows })));
    }

    let cov_n = config.n_max.min(20);
    let (rows, monotone) = coverage_table(scheme, config.level, cov_n)?;
    checks.push(Check::from_bool("coverage", monotone, json!({ "rows": rows, "monotone_in_m": monotone })));

    let good = scheme.good();
    let good_params = spec_params_for(good.as_ref(), j)?;
    let (verdict, reports) = min_gluing_time(good.as_ref(), ScaleIndex(j), config.tau_max, &good_params)?;
    let outcome = gluing_outcome(&verdict);
    checks.push(Check::new("specification", outcome, json!({ "verdict": value(&verdict), "last": reports.last().map(value) })));

    let prop_len = longest_len_within(sys, config.n_max.min(PROPERTY_LEN), PROPERTY_WORDS)?;
    if scheme.is_degenerate() {
        checks.push(Check::skipped("zero-padding", "degenerate scheme"));
    } else {
        let (padding, _) = zero_padding_property(sys, prop_len)?;
        checks.push(Check::from_bool("zero-padding", padding.holds, value(&padding)));
    }
    let concat = free_concatenation_property(scheme, prop_len)?;
    checks.push(Check::from_bool("free-concatenation", concat.holds, value(&concat)));

    let language = AutomatonCollection::whole_shift(sys);
    let (language_tau, _) =
        min_gluing_time(&language, ScaleIndex(j), config.tau_max, &spec_params_for(&language, j)?)?;
    let result = json!({
        "beta": beta_value(sys),
        "scheme": scheme.name(),
        "degenerate": scheme.is_degenerate(),
        "hypotheses": {
            "entropy_gap": gap_met,
            "obstruction_entropy": obstruction.rate,
            "log_beta": log_beta,
        },
        "language_gluing": value(&language_tau),
        "filtration_gluing": value(&level_gluing),
        "measure": value(measure.provenance()),
        "c1": c1,
        "c2": counting.c2,
    });
    Ok(checks_output(&checks, result, Vec::new(), Vec::new()))
}

/// Specification parameters with the longest segment length whose pairs
/// still fit the exhaustive budget, so verdicts are not sampled.
fn spec_params_for(collection: &dyn OrbitCollection, j: usize) -> Result<SpecParams, CliError> {
    let mut params = SpecParams::default();
    let counts = collection.counts_up_to(params.max_len, j)?;
    let mut pool = 0u64;
    let mut len = 0;
    for c in &counts {
        pool = pool.saturating_add(c.as_ref().and_then(|c| c.to_u64()).unwrap_or(u64::MAX));
        if pool.saturating_mul(pool) > params.budget {
            break;
        }
        len += 1;
    }
    params.max_len = len.max(1);
    Ok(params)
}

/// Longest `n ≤ cap` with `|L_n| ≤ words`.
fn longest_len_within(sys: &BetaSystem, cap: usize, words: u64) -> Result<usize, CliError> {
    let mut n = 0;
    while n < cap && sys.count(n + 1)?.to_u64().is_some_and(|c| c <= words) {
        n += 1;
    }
    Ok(n)
}

fn gluing_outcome(g: &GluingTime) -> Outcome {
    match g {
        GluingTime::Found { .. } => Outcome::Pass,
        GluingTime::Failed { .. } => Outcome::Violation,
        GluingTime::Inconclusive { .. } => Outcome::Inconclusive,
    }
}

/// Coverage `|G^M_n| / |L_n|` for `M ≤ level`, `n ≤ n_max`, and whether it is
/// nondecreasing in `M` at every `n`.
fn coverage_table(scheme: &dyn DecompositionScheme, level: usize, n_max: usize) -> Result<(Vec<Value>, bool), CliError> {
    let mut rows = Vec::new();
    let mut monotone = true;
    for n in 1..=n_max {
        let mut prev: Option<BigRational> = None;
        for m in 0..=level {
            let c = filtration_coverage(scheme, m, n)?;
            monotone &= prev.as_ref().is_none_or(|p| *p <= c);
            rows.push(json!({ "n": n, "m": m, "coverage": ratio_value(&c), "approx": rational_f64(&c) }));
            prev = Some(c);
        }
    }
    Ok((rows, monotone))
}

fn rational_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn factor(config: &RunConfig, sys: &BetaSystem) -> Result<RunOutput, CliError> {
    let path = config.code_file.as_ref().ok_or_else(|| CliError::Config("factor needs --code".into()))?;
    let code = parse_block_code(&read_file(path)?)?;
    let factor = FactorShift::new(sys, &code)?;
    let j = config.depth;
    let search = config.n_max.min(FACTOR_SEARCH_LEN);
    let verdict = factor_entropy_positive(sys, &code, j, search, FACTOR_CONCAT)?;
    let (nonexp, pairs) = nonexpansive_growth(sys, &code, j)?;
    let induced = InducedDecomposition::new(&factor);
    let suffix = factor_suffix_entropy(&induced, ScaleIndex(j), search.max(8))?;
    let mme = match verdict {
        FactorEntropyVerdict::Positive { .. } => Some(factor_mme_check(sys, &code, search.max(8), FACTOR_MME_LENGTHS, FACTOR_MME_TOLERANCE)?),
        _ => None,
    };
    let spec = induced_specification(sys, &code, config.level.min(1), j, config.tau_max, &SpecParams::default())?;

    let summary = match (&verdict, &mme) {
        (FactorEntropyVerdict::SinglePoint { .. }, _) => "single point".to_string(),
        (FactorEntropyVerdict::Inconclusive { reason }, _) => format!("inconclusive: {reason}"),
        (_, Some(m)) if m.hypotheses_met => "positively expansive; intrinsic-ergodicity hypotheses met".to_string(),
        (_, Some(m)) if !m.positively_expansive => format!(
            "not positively expansive; pair growth {:.6}",
            nonexp.growth.unwrap_or(0.0)
        ),
        _ => "positive entropy; suffix entropy not below the factor entropy".to_string(),
    };
    let mut outcomes = vec![match verdict {
        FactorEntropyVerdict::Inconclusive { .. } => Outcome::Inconclusive,
        _ => Outcome::Pass,
    }];
    if mme.as_ref().and_then(|m| m.agreement) == Some(false) {
        outcomes.push(Outcome::Violation);
    }
    if spec.within_bound == Some(false) {
        outcomes.push(Outcome::Violation);
    }
    let image_counts: Vec<_> = (1..=search)
        .map(|n| factor.count(n).map(|c| (n, c)))
        .collect::<Result<_, _>>()?;
    let result = json!({
        "source": beta_value(sys),
        "window": code.window(),
        "output_labels": code.labels(),
        "summary": summary,
        "factor_entropy": factor.entropy(),
        "entropy_verdict": value(&verdict),
        "nonexpansive": value(&nonexp),
        "suffix_entropy": suffix.rate,
        "mme": mme.as_ref().map(value),
        "induced_specification": value(&spec),
        "image_counts": image_counts.iter().map(|(n, c)| json!({ "n": n, "count": c.to_string() })).collect::<Vec<_>>(),
    });
    let csv = vec![
        ("pair_automaton.csv".into(), pairs.edge_list_csv()),
        ("image_automaton.csv".into(), factor.presentation().edge_list_csv()),
        ("image_counts.csv".into(), counts_csv(&image_counts)),
    ];
    Ok(RunOutput { outcome: Outcome::combine(outcomes), result, files: Vec::new(), csv })
}

pub fn mme(config: &RunConfig, sys: &BetaSystem) -> Result<RunOutput, CliError> {
    let depth = config.measure_depth;
    let parry = parry_measure(sys, depth)?;
    let k = sys.alphabet_size();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut curves = String::from("n,word,empirical,parry\n");
    let mut last = None;
    for &n in &config.mme_lengths {
        let emp = empirical_mme(sys, n, depth)?;
        let err = max_cylinder_difference(&emp, &parry, depth)?;
        for (w, m) in emp.table().iter().filter(|(w, _)| !w.is_empty()) {
            curves.push_str(&format!("{n},{},{:.16e},{:.16e}\n", w.render(k), m.to_f64(), parry.mass_f64(w)?));
        }
        let one = emp.mass(&Word::from_digits("1"))?;
        rows.push(json!({ "n": n, "max_difference": err, "mass_of_1": one.exact_string().filter(|t| t.len() <= EXACT_STRING_LEN), "mass_of_1_approx": one.to_f64() }));
        errors.push(err);
        last = Some(emp);
    }
    let nonincreasing = errors.windows(2).all(|w| w[1] <= w[0]);
    let loaded = match &config.measure_file {
        Some(path) => {
            let m = measure_from_json(&read_file(path)?)?;
            let d = depth.min(m.depth());
            Some(json!({ "provenance": value(m.provenance()), "max_difference_from_parry": max_cylinder_difference(&m, &parry, d)? }))
        }
        None => None,
    };
    let result = json!({
        "beta": beta_value(sys),
        "depth": depth,
        "parry": {
            "provenance": value(parry.provenance()),
            "entropy_at_depth": measure_entropy(&parry, depth)?,
            "normalization_error": parry.normalization_error(),
        },
        "empirical": rows,
        "nonincreasing": nonincreasing,
        "final_difference": errors.last(),
        "loaded": loaded,
    });
    let mut files = vec![("parry.json".to_string(), measure_to_json(&parry))];
    if let (Some(emp), Some(n)) = (last, config.mme_lengths.last()) {
        files.push((format!("empirical_{n}.json"), measure_to_json(&emp)));
    }
    let outcome = if nonincreasing { Outcome::Pass } else { Outcome::Violation };
    Ok(RunOutput { outcome, result, files, csv: vec![("mass_curves.csv".into(), curves)] })
}

pub fn decomp(config: &RunConfig, sys: &BetaSystem) -> Result<RunOutput, CliError> {
    let beta_scheme = BetaDecomposition::new(sys);
    let scheme = scheme_for(config.scheme, sys, &beta_scheme);
    let scheme = scheme.as_ref();
    let k = sys.alphabet_size();
    let j = ScaleIndex(config.depth);
    let op = config.op.ok_or_else(|| CliError::Config("decomp needs --op".into()))?;
    let base = json!({ "beta": beta_value(sys), "scheme": scheme.name(), "op": value(&op) });
    match op {
        DecompOp::Split => {
            let words = match &config.words_file {
                Some(path) => parse_word_file(&read_file(path)?)?,
                None => sys.enumerate_language(config.n_max.min(8))?,
            };
            let mut rows = Vec::new();
            let mut csv = String::from("word,p,g,s\n");
            for w in &words {
                if !sys.contains(w)? {
                    return Err(obstruct_core::error::Error::NotAdmissible(w.render(k)).into());
                }
                let sp = scheme.split(w)?;
                let (p, g, s) = sp.pieces(w);
                let r = |x: &Word| x.render(k);
                csv.push_str(&format!("{},{},{},{}\n", r(w), sp.p, sp.g, sp.s));
                rows.push(json!({ "word": r(w), "prefix": r(&p), "core": r(&g), "suffix": r(&s), "in_core": scheme.member_g(w)? }));
            }
            let mut result = base;
            result["splits"] = Value::Array(rows);
            Ok(RunOutput { outcome: Outcome::Pass, result, files: Vec::new(), csv: vec![("splits.csv".into(), csv)] })
        }
        DecompOp::Coverage => {
            let (rows, monotone) = coverage_table(scheme, config.level, config.n_max)?;
            let csv = rows.iter().fold(String::from("n,M,coverage\n"), |mut out, r| {
                out.push_str(&format!("{},{},{:.16e}\n", r["n"], r["m"], r["approx"].as_f64().unwrap_or(f64::NAN)));
                out
            });
            let check = Check::from_bool("coverage", monotone, json!({ "rows": rows, "monotone_in_m": monotone }));
            Ok(checks_output(&[check], base, Vec::new(), vec![("coverage.csv".into(), csv)]))
        }
        DecompOp::Spec => {
            let gluing = |c: &dyn OrbitCollection| -> Result<_, CliError> {
                Ok(min_gluing_time(c, j, config.tau_max, &spec_params_for(c, j.0)?)?)
            };
            let (good, good_reports) = gluing(scheme.good().as_ref())?;
            let (level, _) = gluing(scheme.filtration(config.level).as_ref())?;
            let (lang, _) = gluing(&AutomatonCollection::whole_shift(sys))?;
            let level_outcome = match level {
                GluingTime::Found { .. } => Outcome::Pass,
                _ => Outcome::Inconclusive,
            };
            let last = good_reports.last();
            let glued: Vec<Word> = last.map(|r| r.witnesses.iter().map(|w| w.glued.clone()).collect()).unwrap_or_default();
            let failing: Vec<Word> = last.map(|r| r.failures.iter().flatten().cloned().collect()).unwrap_or_default();
            let checks = [
                Check::new("core", gluing_outcome(&good), json!({ "verdict": value(&good), "last": last.map(value) })),
                Check::new("filtration", level_outcome, json!({ "level": config.level, "verdict": value(&level) })),
            ];
            let mut result = base;
            result["language"] = value(&lang);
            let files = vec![
                ("witnesses.txt".into(), write_word_file(&glued, k)),
                ("failures.txt".into(), write_word_file(&failing, k)),
            ];
            Ok(checks_output(&checks, result, files, Vec::new()))
        }
    }
}
