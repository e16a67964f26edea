use std::cmp::Ordering;
use std::ops::RangeInclusive;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{CylinderMeasure, Mass};
use crate::beta::BetaValue;
use crate::decomposition::DecompositionScheme;
use crate::error::{Error, Result};
use crate::word::{Symbol, Word};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GibbsRow {
    pub n: usize,
    pub words: usize,
    /// `min μ([v t]) β^n` over words `v` of length `n` and extensions `t`.
    pub min_ratio: Option<f64>,
    pub min_ratio_exact: Option<String>,
}

/// Lower Gibbs bound `μ([v]) ≥ K β^{-|v|}` tested on a word class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GibbsReport {
    pub class: String,
    /// Whether the bound is a consequence of the lemma for this class (it is
    /// claimed only for the filtration levels `G^M`).
    pub claimed: bool,
    pub depth_offset: usize,
    pub k_found: f64,
    pub k_exact: Option<String>,
    pub argmin: Option<String>,
    pub per_n: Vec<GibbsRow>,
    pub violations: Vec<String>,
    /// `(4 C₁)^{-1} e^{-2 τ h}` when supplied.
    pub proof_constant: Option<f64>,
    pub pass: bool,
}

impl GibbsReport {
    /// Smallest per-`n` ratio over `n ∈ range`.
    pub fn window_min(&self, range: RangeInclusive<usize>) -> Option<f64> {
        self.per_n
            .iter()
            .filter(|r| range.contains(&r.n))
            .filter_map(|r| r.min_ratio)
            .min_by(f64::total_cmp)
    }

    /// Relative change of the window minimum between two windows.
    pub fn drift(&self, a: RangeInclusive<usize>, b: RangeInclusive<usize>) -> Option<f64> {
        let (x, y) = (self.window_min(a)?, self.window_min(b)?);
        let scale = x.abs().max(y.abs());
        Some(if scale == 0.0 { 0.0 } else { (x - y).abs() / scale })
    }

    /// Attaches `K_M = (4 C₁)^{-1} e^{-2 τ_M h}`.
    pub fn with_proof_constant(mut self, c1: f64, tau: usize, h: f64) -> Self {
        self.proof_constant = Some((4.0 * c1).recip() * (-2.0 * tau as f64 * h).exp());
        self
    }
}

/// Gibbs ratios `μ([v t]) β^{|v|}` over the supplied words, with `t` ranging
/// over admissible extensions of length `j` (the Bowen ball at scale `2^-j`).
pub fn gibbs_ratios(
    measure: &CylinderMeasure,
    beta: &BetaValue,
    words_by_n: &[(usize, Vec<Word>)],
    j: usize,
    class: &str,
    claimed: bool,
) -> Result<GibbsReport> {
    let mut per_n = Vec::new();
    let mut violations = Vec::new();
    let mut best: Option<(Mass, Word)> = None;
    for (n, words) in words_by_n {
        let mut row_min: Option<Mass> = None;
        let mut tested = 0;
        for v in words {
            for t in extensions(measure, v, j)? {
                let vt = v.concat(&t);
                let ratio = measure.mass(&vt)?.times_power(beta, *n);
                tested += 1;
                if ratio.is_zero() {
                    violations.push(vt.render(measure.alphabet_size()));
                }
                if row_min.as_ref().is_none_or(|m| ratio.cmp_value(m) == Ordering::Less) {
                    row_min = Some(ratio.clone());
                }
                if best.as_ref().is_none_or(|(m, _)| ratio.cmp_value(m) == Ordering::Less) {
                    best = Some((ratio, vt));
                }
            }
        }
        per_n.push(GibbsRow {
            n: *n,
            words: tested,
            min_ratio: row_min.as_ref().map(Mass::to_f64),
            min_ratio_exact: row_min.as_ref().and_then(Mass::exact_string),
        });
    }
    let k_found = best.as_ref().map_or(0.0, |(m, _)| m.to_f64());
    Ok(GibbsReport {
        class: class.to_string(),
        claimed,
        depth_offset: j,
        k_found,
        k_exact: best.as_ref().and_then(|(m, _)| m.exact_string()),
        argmin: best.as_ref().map(|(_, w)| w.render(measure.alphabet_size())),
        per_n,
        pass: violations.is_empty() && k_found > 0.0,
        violations,
        proof_constant: None,
    })
}

/// Admissible extensions of `v` of length `j`, read off the measure table.
fn extensions(measure: &CylinderMeasure, v: &Word, j: usize) -> Result<Vec<Word>> {
    if v.len() + j > measure.depth() {
        return Err(Error::DepthInsufficient { have: measure.depth(), need: v.len() + j });
    }
    let mut out = vec![Word::empty()];
    for _ in 0..j {
        out = out
            .into_iter()
            .flat_map(|t| (0..measure.alphabet_size() as Symbol).map(move |a| {
                let mut u = t.clone();
                u.push(a);
                u
            }))
            .filter(|t| measure.table().contains_key(&v.concat(t)))
            .collect();
    }
    Ok(out)
}

/// Gibbs check on the filtration level `G^M` for `n ∈ n_range`.
pub fn gibbs_check(
    measure: &CylinderMeasure,
    scheme: &dyn DecompositionScheme,
    m: usize,
    n_range: RangeInclusive<usize>,
    j: usize,
) -> Result<GibbsReport> {
    let beta = scheme
        .shift()
        .beta_value()
        .ok_or_else(|| Error::InvalidInput("Gibbs check needs β".into()))?;
    let collection = scheme.filtration(m);
    let mut words_by_n = Vec::new();
    for n in n_range {
        if let Some(words) = collection.words_at(n)? {
            words_by_n.push((n, words));
        }
    }
    gibbs_ratios(measure, beta, &words_by_n, j, &collection.label(), true)
}

/// Joint masses `μ([u] ∩ σ^{-|u|-q}[v])` over pairs and gaps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    pub class: String,
    pub gaps: (usize, usize),
    pub tau: usize,
    /// Every gap is at least `2τ`.
    pub precondition_met: bool,
    pub pairs_tested: usize,
    /// `min μ([u] ∩ σ^{-|u|-q}[v]) β^{|u|+|v|}`.
    pub k_found: f64,
    pub k_exact: Option<String>,
    pub argmin: Option<(String, String, usize)>,
    pub zero_pairs: Vec<(String, String, usize)>,
    /// A failure is expected because the gap precondition does not hold.
    pub expected_fail: bool,
    /// `(8 C₁)^{-1} e^{-4 τ h}` when supplied.
    pub proof_constant: Option<f64>,
    pub pass: bool,
}

impl MixingReport {
    pub fn with_proof_constant(mut self, c1: f64, h: f64) -> Self {
        self.proof_constant = Some((8.0 * c1).recip() * (-4.0 * self.tau as f64 * h).exp());
        self
    }
}

/// `μ([u] ∩ σ^{-|u|-q}[v])`, summing masses of admissible `u t v`, `|t| = q`.
pub fn joint_mass(measure: &CylinderMeasure, u: &Word, q: usize, v: &Word) -> Result<Mass> {
    let mut c: Vec<Option<Symbol>> = u.symbols().iter().map(|&a| Some(a)).collect();
    c.extend(std::iter::repeat_n(None, q));
    c.extend(v.symbols().iter().map(|&a| Some(a)));
    measure.constrained_mass(&c)
}

/// Mixing check over explicit pairs and a range of gaps.
pub fn mixing_check(
    measure: &CylinderMeasure,
    beta: &BetaValue,
    pairs: &[(Word, Word)],
    gaps: RangeInclusive<usize>,
    tau: usize,
    class: &str,
) -> Result<MixingReport> {
    let k = measure.alphabet_size();
    let mut best: Option<(Mass, (String, String, usize))> = None;
    let mut zero_pairs = Vec::new();
    let mut tested = 0;
    for (u, v) in pairs {
        for q in gaps.clone() {
            let ratio = joint_mass(measure, u, q, v)?.times_power(beta, u.len() + v.len());
            tested += 1;
            let key = (u.render(k), v.render(k), q);
            if ratio.is_zero() {
                zero_pairs.push(key.clone());
            }
            if best.as_ref().is_none_or(|(m, _)| ratio.cmp_value(m) == Ordering::Less) {
                best = Some((ratio, key));
            }
        }
    }
    let precondition_met = *gaps.start() >= 2 * tau;
    let k_found = best.as_ref().map_or(0.0, |(m, _)| m.to_f64());
    let pass = zero_pairs.is_empty() && k_found > 0.0;
    Ok(MixingReport {
        class: class.to_string(),
        gaps: (*gaps.start(), *gaps.end()),
        tau,
        precondition_met,
        pairs_tested: tested,
        k_found,
        k_exact: best.as_ref().and_then(|(m, _)| m.exact_string()),
        argmin: best.map(|(_, key)| key),
        zero_pairs,
        expected_fail: !pass && !precondition_met,
        proof_constant: None,
        pass,
    })
}

/// All pairs of `G^M` words with lengths in `1..=max_len`.
pub fn filtration_pairs(scheme: &dyn DecompositionScheme, m: usize, max_len: usize) -> Result<Vec<(Word, Word)>> {
    let collection = scheme.filtration(m);
    let mut words = Vec::new();
    for n in 1..=max_len {
        words.extend(collection.words_at(n)?.unwrap_or_default());
    }
    Ok(words.iter().flat_map(|u| words.iter().map(move |v| (u.clone(), v.clone()))).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub m: usize,
    pub mass: f64,
    pub mass_exact: Option<String>,
    pub running_inf: f64,
}

/// `μ(U ∩ σ^{-m} V)` over a range of `m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingProbe {
    pub rows: Vec<ProbeRow>,
}

impl MixingProbe {
    pub fn infimum(&self) -> Option<f64> {
        self.rows.last().map(|r| r.running_inf)
    }
}

/// `U` and `V` are unions of pairwise disjoint cylinders. Words of `V` are
/// placed at offset `m`; overlaps must agree with the `U` word.
pub fn mixing_liminf_probe(
    measure: &CylinderMeasure,
    u_words: &[Word],
    v_words: &[Word],
    m_range: RangeInclusive<usize>,
) -> Result<MixingProbe> {
    let mut rows = Vec::new();
    let mut inf = f64::INFINITY;
    for m in m_range {
        let mut total = Mass::zero();
        for u in u_words {
            for v in v_words {
                let len = u.len().max(m + v.len());
                let mut c: Vec<Option<Symbol>> = vec![None; len];
                let mut clash = false;
                for (i, &a) in u.symbols().iter().enumerate() {
                    c[i] = Some(a);
                }
                for (i, &a) in v.symbols().iter().enumerate() {
                    match c[m + i] {
                        Some(b) if b != a => clash = true,
                        _ => c[m + i] = Some(a),
                    }
                }
                if !clash {
                    total = total.add(&measure.constrained_mass(&c)?);
                }
            }
        }
        let mass = total.to_f64();
        inf = inf.min(mass);
        rows.push(ProbeRow { m, mass, mass_exact: total.exact_string(), running_inf: inf });
    }
    Ok(MixingProbe { rows })
}

/// Fewest length-`n` cylinders whose total mass reaches `γ`: masses are taken
/// in decreasing order, which is optimal.
pub fn positive_mass_count(measure: &CylinderMeasure, gamma: &BigRational, n: usize) -> Result<usize> {
    if !(gamma > &BigRational::zero() && gamma < &BigRational::one()) {
        return Err(Error::InvalidInput(format!("γ = {gamma} outside (0, 1)")));
    }
    if n > measure.depth() {
        return Err(Error::DepthInsufficient { have: measure.depth(), need: n });
    }
    let mut masses: Vec<&Mass> = measure.level(n).map(|(_, m)| m).filter(|m| !m.is_zero()).collect();
    masses.sort_by(|a, b| b.cmp_value(a));
    let target = Mass::Rational(gamma.clone());
    let mut total = Mass::zero();
    for (i, m) in masses.iter().enumerate() {
        total = total.add(m);
        if total.cmp_value(&target) != Ordering::Less {
            return Ok(i + 1);
        }
    }
    Ok(masses.len())
}

/// `-(1/n) Σ_{|u|=n} μ([u]) log μ([u])`.
pub fn measure_entropy(measure: &CylinderMeasure, n: usize) -> Result<f64> {
    if n == 0 || n > measure.depth() {
        return Err(Error::DepthInsufficient { have: measure.depth(), need: n.max(1) });
    }
    let h: f64 = measure
        .level(n)
        .map(|(_, m)| m.to_f64())
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.ln())
        .sum();
    Ok(h / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::BetaSystem;
    use crate::decomposition::BetaDecomposition;
    use crate::mme::{empirical_mme, parry_measure};
    use crate::symbolic::ShiftSpace;

    fn w(s: &str) -> Word {
        Word::from_digits(s)
    }

    #[test]
    fn gibbs_full_shift_constant_is_one() {
        let f = BetaSystem::full_shift(2);
        let d = BetaDecomposition::new(&f);
        let m = parry_measure(&f, 12).unwrap();
        let r = gibbs_check(&m, &d, 0, 1..=12, 0).unwrap();
        assert!(r.pass);
        assert_eq!(r.k_exact.as_deref(), Some("1"));
    }

    #[test]
    fn gibbs_golden_is_stable() {
        let g = BetaSystem::golden_mean();
        let d = BetaDecomposition::new(&g);
        let m = parry_measure(&g, 16).unwrap();
        let r = gibbs_check(&m, &d, 0, 1..=16, 0).unwrap();
        assert!(r.pass && r.k_found > 0.0);
        assert!(r.drift(8..=12, 12..=16).unwrap() < 0.1);
        let r = r.with_proof_constant(1.2, 0, g.entropy());
        assert!(r.proof_constant.unwrap() <= r.k_found);
    }

    #[test]
    fn gibbs_on_suffix_words_is_flagged_unclaimed() {
        let g = BetaSystem::golden_mean();
        let m = parry_measure(&g, 12).unwrap();
        let words: Vec<(usize, Vec<Word>)> = (1..=12).map(|n| (n, vec![g.w_prefix(n).unwrap()])).collect();
        let r = gibbs_ratios(&m, g.beta(), &words, 0, "S", false).unwrap();
        assert!(!r.claimed);
        assert!(r.pass);
    }

    #[test]
    fn mixing_full_shift_is_independent() {
        let f = BetaSystem::full_shift(2);
        let d = BetaDecomposition::new(&f);
        let m = parry_measure(&f, 8).unwrap();
        let pairs = filtration_pairs(&d, 0, 2).unwrap();
        let r = mixing_check(&m, f.beta(), &pairs, 0..=3, 0, "G").unwrap();
        assert!(r.pass);
        assert_eq!(r.k_exact.as_deref(), Some("1"));
        let joint = joint_mass(&m, &w("10"), 2, &w("11")).unwrap();
        assert_eq!(joint, Mass::Rational(BigRational::new(1.into(), 16.into())));
    }

    #[test]
    fn mixing_golden_forbidden_adjacency_is_expected_fail() {
        let g = BetaSystem::golden_mean();
        let m = parry_measure(&g, 6).unwrap();
        let r = mixing_check(&m, g.beta(), &[(w("1"), w("1"))], 0..=0, 1, "G^1").unwrap();
        assert!(!r.pass && r.expected_fail);
        let r = mixing_check(&m, g.beta(), &[(w("0"), w("0"))], 1..=1, 0, "G").unwrap();
        assert!(r.pass);
        let direct = m.mass(&w("000")).unwrap().add(&m.mass(&w("010")).unwrap());
        assert_eq!(joint_mass(&m, &w("0"), 1, &w("0")).unwrap(), direct);
    }

    #[test]
    fn probe_examples() {
        let f = BetaSystem::full_shift(2);
        let m = parry_measure(&f, 8).unwrap();
        let p = mixing_liminf_probe(&m, &[w("0")], &[w("1")], 1..=6).unwrap();
        assert!(p.rows.iter().all(|r| r.mass_exact.as_deref() == Some("1/4")));
        let g = BetaSystem::golden_mean();
        let m = parry_measure(&g, 8).unwrap();
        let p = mixing_liminf_probe(&m, &[w("1")], &[w("1")], 1..=2).unwrap();
        assert_eq!(p.rows[0].mass, 0.0);
        assert!(p.rows[1].mass > 0.0);
    }

    #[test]
    fn positive_mass_uniform() {
        let f = BetaSystem::full_shift(2);
        let m = parry_measure(&f, 10).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(positive_mass_count(&m, &half, 10).unwrap(), 512);
        let almost = BigRational::new(1023.into(), 1024.into());
        assert_eq!(positive_mass_count(&m, &almost, 10).unwrap(), 1023);
        assert!(positive_mass_count(&m, &BigRational::one(), 10).is_err());
    }

    #[test]
    fn positive_mass_count_is_minimal() {
        // oracle: smallest subset size reaching γ, by checking all subsets
        let g = BetaSystem::golden_mean();
        let m = empirical_mme(&g, 12, 4).unwrap();
        let masses: Vec<BigRational> = m
            .level(4)
            .map(|(_, x)| match x {
                Mass::Rational(r) => r.clone(),
                _ => unreachable!(),
            })
            .collect();
        for gamma in [BigRational::new(1.into(), 3.into()), BigRational::new(4.into(), 5.into())] {
            let mut best = usize::MAX;
            for mask in 0u32..(1 << masses.len()) {
                let total: BigRational = masses
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, x)| x.clone())
                    .sum();
                if total >= gamma {
                    best = best.min(mask.count_ones() as usize);
                }
            }
            assert_eq!(positive_mass_count(&m, &gamma, 4).unwrap(), best);
        }
    }

    #[test]
    fn parry_entropy_approaches_log_beta() {
        let g = BetaSystem::golden_mean();
        let m = parry_measure(&g, 14).unwrap();
        let h = measure_entropy(&m, 14).unwrap();
        assert!((h - g.entropy()).abs() < 0.02, "{h}");
    }
}
