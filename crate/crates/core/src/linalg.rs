//! Perron–Frobenius data for nonnegative integer matrices: component
//! structure, exact eigenvectors over a quadratic field, and high-precision
//! power iteration with Collatz–Wielandt bounds.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::qfield::{gcd_usize, Quadratic};

/// Dense nonnegative integer matrix, row-major.
pub type Matrix = Vec<Vec<u64>>;

/// Strongly connected components in reverse topological order (sinks first).
pub fn strongly_connected_components(adj: &Matrix) -> Vec<Vec<usize>> {
    let n = adj.len();
    let succ: Vec<Vec<usize>> = adj
        .iter()
        .map(|row| row.iter().enumerate().filter(|(_, &c)| c > 0).map(|(t, _)| t).collect())
        .collect();
    // iterative Tarjan
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if *edge < succ[v].len() {
                let w = succ[v][*edge];
                *edge += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Restriction of `adj` to the listed states, in that order.
pub fn submatrix(adj: &Matrix, states: &[usize]) -> Matrix {
    states.iter().map(|&s| states.iter().map(|&t| adj[s][t]).collect()).collect()
}

/// Period of an irreducible matrix (gcd of cycle lengths); 0 for a single
/// state without a loop.
pub fn period(adj: &Matrix) -> usize {
    let n = adj.len();
    if n == 0 {
        return 0;
    }
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut g = 0;
    while let Some(s) = queue.pop_front() {
        for t in 0..n {
            if adj[s][t] == 0 {
                continue;
            }
            if level[t] == usize::MAX {
                level[t] = level[s] + 1;
                queue.push_back(t);
            } else {
                g = gcd_usize(g, (level[s] as i64 + 1 - level[t] as i64).unsigned_abs() as usize);
            }
        }
    }
    g
}

/// Spectral radius estimate by plain power iteration (for ranking components).
pub fn spectral_radius_f64(adj: &Matrix) -> f64 {
    let n = adj.len();
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0f64; n];
    let mut lambda = 0.0;
    // average successive ratios to tolerate periodic components
    for _ in 0..2000 {
        let mut w = vec![0.0; n];
        for s in 0..n {
            for t in 0..n {
                w[s] += adj[s][t] as f64 * v[t];
            }
        }
        let norm = w.iter().cloned().fold(0.0, f64::max);
        if norm == 0.0 {
            return 0.0;
        }
        for x in &mut w {
            *x /= norm;
        }
        let w2: f64 = (0..n).map(|s| (0..n).map(|t| adj[s][t] as f64 * w[t]).sum::<f64>()).fold(0.0, f64::max);
        lambda = (norm * w2).sqrt();
        v = w;
    }
    lambda
}

/// The states carrying the measure of maximal entropy: the unique strongly
/// connected component of maximal spectral radius. Errors when that
/// component is periodic or not unique.
pub fn dominant_component(p: &Presentation) -> Result<Vec<usize>> {
    let adj = p.adjacency();
    let comps = strongly_connected_components(&adj);
    let mut ranked: Vec<(f64, Vec<usize>)> = comps
        .into_iter()
        .filter(|c| c.len() > 1 || adj[c[0]][c[0]] > 0)
        .map(|c| (spectral_radius_f64(&submatrix(&adj, &c)), c))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let Some((top, comp)) = ranked.first().cloned() else {
        return Err(Error::NonMixing("no cycles".into()));
    };
    if ranked.get(1).is_some_and(|(r, _)| (r - top).abs() <= 1e-9 * top.max(1.0)) {
        return Err(Error::NonMixing("two components share the maximal growth rate".into()));
    }
    let per = period(&submatrix(&adj, &comp));
    if per != 1 {
        return Err(Error::NonMixing(format!("dominant component has period {per}")));
    }
    Ok(comp)
}

/// Exact Perron data over `Q(sqrt(d))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPerron {
    pub lambda: Quadratic,
    pub right: Vec<Quadratic>,
    pub left: Vec<Quadratic>,
}

/// A nonzero vector in the kernel of `m` when the kernel is one-dimensional.
#[allow(clippy::needless_range_loop)]
fn kernel_vector(mut m: Vec<Vec<Quadratic>>) -> Option<Vec<Quadratic>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, pr);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..cols {
                    let sub = &f * &m[r][k];
                    m[i][k] = &m[i][k] - &sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    if free.len() != 1 {
        return None;
    }
    let f = free[0];
    let mut v = vec![Quadratic::zero(); cols];
    v[f] = Quadratic::one();
    for (row, &c) in pivots.iter().enumerate() {
        v[c] = -m[row][f].clone();
    }
    Some(v)
}

fn oriented_positive(v: Vec<Quadratic>) -> Option<Vec<Quadratic>> {
    let sign = v.iter().map(Quadratic::signum).find(|&s| s != 0)?;
    let v: Vec<Quadratic> = if sign < 0 { v.into_iter().map(|x| -x).collect() } else { v };
    v.iter().all(|x| x.signum() > 0).then_some(v)
}

/// Perron eigenvectors for a known eigenvalue `lambda`, verified exactly:
/// both vectors are strictly positive, which certifies `lambda` as the
/// Perron root.
pub fn exact_perron(adj: &Matrix, lambda: &Quadratic) -> Result<ExactPerron> {
    let n = adj.len();
    let shifted = |transpose: bool| -> Vec<Vec<Quadratic>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let a = if transpose { adj[j][i] } else { adj[i][j] };
                        let mut x = Quadratic::from_int(a as i64);
                        if i == j {
                            x = x - lambda.clone();
                        }
                        x
                    })
                    .collect()
            })
            .collect()
    };
    let fail = || Error::NonMixing(format!("{lambda} is not a simple Perron root of the presentation"));
    let right = kernel_vector(shifted(false)).and_then(oriented_positive).ok_or_else(fail)?;
    let left = kernel_vector(shifted(true)).and_then(oriented_positive).ok_or_else(fail)?;
    // verify A r = lambda r and l A = lambda l
    for i in 0..n {
        let ar = (0..n).fold(Quadratic::zero(), |acc, j| acc + Quadratic::from_int(adj[i][j] as i64) * right[j].clone());
        let la = (0..n).fold(Quadratic::zero(), |acc, j| acc + Quadratic::from_int(adj[j][i] as i64) * left[j].clone());
        if ar != lambda * &right[i] || la != lambda * &left[i] {
            return Err(fail());
        }
    }
    Ok(ExactPerron { lambda: lambda.clone(), right, left })
}

/// Perron data from fixed-point power iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxPerron {
    pub lambda: f64,
    /// Collatz–Wielandt enclosure of the Perron root.
    pub lambda_lower: f64,
    pub lambda_upper: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    /// `max_i |(A r)_i - λ r_i| / max_i r_i` at the final iterate.
    pub residual: f64,
    pub iterations: usize,
}

struct FixedIterate {
    vector: Vec<BigInt>,
    lower: f64,
    upper: f64,
    residual: f64,
    iterations: usize,
}

/// `num / den` as a float, for arbitrarily large operands.
fn big_ratio(num: &BigInt, den: &BigInt) -> f64 {
    let s = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if s >= 0 { (num << s as usize) / den } else { num / (den << (-s) as usize) };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-s as i32)
}

const MAX_POWER_ITERATIONS: usize = 100_000;

fn fixed_power_iteration(adj: &Matrix, bits: u32, transpose: bool) -> FixedIterate {
    let n = adj.len();
    let edges: Vec<(usize, usize, u64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let a = adj[i][j];
            (a > 0).then_some(if transpose { (j, i, a) } else { (i, j, a) })
        })
        .collect();
    let one = BigInt::one() << bits;
    let mut v = vec![one.clone(); n];
    let mut last = None;
    for it in 1..=MAX_POWER_ITERATIONS {
        let mut w = vec![BigInt::zero(); n];
        for &(i, j, a) in &edges {
            w[i] += &v[j] * a;
        }
        // Collatz–Wielandt: min and max of (A v)_i / v_i bracket the Perron root
        let ratios: Vec<BigInt> = w
            .iter()
            .zip(&v)
            .filter(|(_, b)| b.is_positive())
            .map(|(a, b)| (a << bits as usize) / b)
            .collect();
        let lo = ratios.iter().min().cloned().unwrap_or_default();
        let hi = ratios.iter().max().cloned().unwrap_or_default();
        let (imax, vmax) = v.iter().enumerate().max_by(|a, b| a.1.cmp(b.1)).expect("nonempty");
        let lambda = (&w[imax] << bits as usize) / vmax;
        let scale = vmax << bits as usize;
        let residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| big_ratio(&((a << bits as usize) - &lambda * b).abs(), &scale))
            .fold(0.0, f64::max);
        let denom = BigInt::one() << bits as usize;
        let converged = v.iter().all(|x| x.is_positive()) && ((&hi - &lo) << 110usize) <= lo;
        last = Some(FixedIterate {
            vector: v.clone(),
            lower: big_ratio(&lo, &denom),
            upper: big_ratio(&hi, &denom),
            residual,
            iterations: it,
        });
        if converged {
            break;
        }
        let wmax = w.iter().max().cloned().unwrap_or_else(BigInt::one);
        v = w.iter().map(|x| (x * &one) / &wmax).collect();
    }
    last.expect("at least one iteration")
}

/// Perron data of a primitive matrix by power iteration on `bits`-bit
/// fixed-point vectors.
pub fn approx_perron(adj: &Matrix, bits: u32) -> ApproxPerron {
    let r = fixed_power_iteration(adj, bits, false);
    let l = fixed_power_iteration(adj, bits, true);
    let to_f64 = |v: &[BigInt]| {
        let max = v.iter().max().cloned().unwrap_or_else(BigInt::one);
        v.iter().map(|x| big_ratio(x, &max)).collect::<Vec<f64>>()
    };
    let lower = r.lower.max(l.lower);
    let upper = r.upper.min(l.upper);
    ApproxPerron {
        lambda: (lower + upper) / 2.0,
        lambda_lower: lower,
        lambda_upper: upper,
        right: to_f64(&r.vector),
        left: to_f64(&l.vector),
        residual: r.residual.max(l.residual),
        iterations: r.iterations.max(l.iterations),
    }
}

/// Integer matrix power by repeated squaring (used by tests and the
/// counting suite).
pub fn matrix_power(adj: &Matrix, mut e: u32) -> Vec<Vec<BigUint>> {
    let n = adj.len();
    let mut base: Vec<Vec<BigUint>> = adj.iter().map(|r| r.iter().map(|&x| BigUint::from(x)).collect()).collect();
    let mut acc: Vec<Vec<BigUint>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigUint::one() } else { BigUint::zero() }).collect())
        .collect();
    let mul = |a: &Vec<Vec<BigUint>>, b: &Vec<Vec<BigUint>>| -> Vec<Vec<BigUint>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
            .collect()
    };
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        base = mul(&base, &base);
        e >>= 1;
    }
    acc
}
