//! Brute-force reference implementations used as oracles by the
//! integration tests. Deliberately naive: plain loops, no shared helpers
//! with the library.

#![allow(dead_code)]

use lexgeo::store::{Condition, ConceptMeta, DistanceMatrix, EmbeddingStore, LanguageMeta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::{BTreeSet, HashMap};

pub fn rel_close(got: f64, want: f64, tol: f64) -> bool {
    if got == want {
        return true;
    }
    (got - want).abs() <= tol * got.abs().max(want.abs()) || (got - want).abs() < 1e-14
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Average 1-based rank by counting smaller and equal values.
pub fn avg_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn t_two_sided(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    2.0 * dist.cdf(-t.abs())
}

/// Spearman's rho and its two-sided t-approximation p.
pub fn spearman(x: &[f64], y: &[f64]) -> (f64, f64) {
    let r = pearson(&avg_ranks(x), &avg_ranks(y));
    if r.abs() >= 1.0 {
        return (r, 0.0);
    }
    let df = x.len() as f64 - 2.0;
    (r, t_two_sided(r * (df / (1.0 - r * r)).sqrt(), df))
}

fn choose_subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        choose_subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// U of `a` from the rank sum of the pooled sample.
fn rank_sum_u(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let r = avg_ranks(&pooled);
    let ra: f64 = r[..a.len()].iter().sum();
    let na = a.len() as f64;
    ra - na * (na + 1.0) / 2.0
}

/// Exact Mann-Whitney: `(U, p_greater, p_less, p_two_sided)`.
pub fn mann_whitney_exact(a: &[f64], b: &[f64]) -> (f64, f64, f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let observed = rank_sum_u(a, b);
    let mut subsets = Vec::new();
    choose_subsets(pooled.len(), a.len(), 0, &mut Vec::new(), &mut subsets);
    let (mut ge, mut le) = (0usize, 0usize);
    for s in &subsets {
        let ga: Vec<f64> = s.iter().map(|&i| pooled[i]).collect();
        let gb: Vec<f64> = (0..pooled.len())
            .filter(|i| !s.contains(i))
            .map(|i| pooled[i])
            .collect();
        let u = rank_sum_u(&ga, &gb);
        if u >= observed - 1e-9 {
            ge += 1;
        }
        if u <= observed + 1e-9 {
            le += 1;
        }
    }
    let total = subsets.len() as f64;
    let (pg, pl) = (ge as f64 / total, le as f64 / total);
    (observed, pg, pl, (2.0 * pg.min(pl)).min(1.0))
}

pub fn cohens_d(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let ssa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let ssb: f64 = b.iter().map(|x| (x - mb).powi(2)).sum();
    let pooled = ((ssa + ssb) / (a.len() + b.len() - 2) as f64).sqrt();
    (ma - mb) / pooled
}

/// `(slope, intercept, r2)` from the normal equations and residuals.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let my = sy / n;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 0.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

/// Paired t: `(t, two-sided p)`.
pub fn paired_t(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let m = mean(&d);
    let sd = (d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = m / (sd / n.sqrt());
    (t, t_two_sided(t, n - 1.0))
}

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Exact Mantel (Spearman) over every relabelling: `(rho, p)`.
pub fn mantel_exhaustive(d1: &DistanceMatrix, d2: &DistanceMatrix) -> (f64, f64) {
    let n = d1.len();
    let upper = |m: &DistanceMatrix, p: &[usize]| -> Vec<f64> {
        let mut v = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                v.push(m.get(p[i], p[j]));
            }
        }
        v
    };
    let identity: Vec<usize> = (0..n).collect();
    let x = upper(d1, &identity);
    let observed = spearman(&x, &upper(d2, &identity)).0;
    let mut perms = Vec::new();
    permutations(&mut identity.clone(), 0, &mut perms);
    let hits = perms
        .iter()
        .filter(|p| spearman(&x, &upper(d2, p)).0 >= observed - 1e-10)
        .count();
    (observed, hits as f64 / perms.len() as f64)
}

fn edit_distance(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    if let Some(&d) = memo.get(&(a.len(), b.len())) {
        return d;
    }
    let cost = usize::from(a[a.len() - 1] != b[b.len() - 1]);
    let d = (edit_distance(&a[..a.len() - 1], b, memo) + 1)
        .min(edit_distance(a, &b[..b.len() - 1], memo) + 1)
        .min(edit_distance(&a[..a.len() - 1], &b[..b.len() - 1], memo) + cost);
    memo.insert((a.len(), b.len()), d);
    d
}

pub fn levenshtein_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance(&a, &b, &mut HashMap::new()) as f64 / longest as f64
}

/// UPGMA by explicit leaf sets: each merge as `(left, right, height)` with
/// the two sides unordered.
pub fn upgma(m: &DistanceMatrix) -> Vec<(BTreeSet<usize>, BTreeSet<usize>, f64)> {
    let n = m.len();
    let mut clusters: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let mut total = 0.0;
                for &a in &clusters[i] {
                    for &b in &clusters[j] {
                        total += m.get(a, b);
                    }
                }
                let avg = total / (clusters[i].len() * clusters[j].len()) as f64;
                if avg < best.2 {
                    best = (i, j, avg);
                }
            }
        }
        let (i, j, h) = best;
        let right = clusters.remove(j);
        let left = clusters.remove(i);
        merges.push((left.clone(), right.clone(), h));
        clusters.push(left.union(&right).copied().collect());
    }
    merges
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
/// eigenvalues in descending order with matching unit eigenvectors.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = rng.random_range(0.01..10.0);
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix::new((0..n).map(|i| format!("l{i}")).collect(), values).unwrap()
}

/// Random valid store; a fraction of non-anchor cells is masked out.
pub fn random_store(
    seed: u64,
    n_concepts: usize,
    n_languages: usize,
    n_layers: usize,
    dim: usize,
    missing: f64,
) -> EmbeddingStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts = (0..n_concepts)
        .map(|i| ConceptMeta::new(format!("w{i}"), format!("k{}", i % 3)))
        .collect();
    let languages = (0..n_languages)
        .map(|i| {
            let code = format!(
                "{}{}{}_Latn",
                (b'a' + (i / 676 % 26) as u8) as char,
                (b'a' + (i / 26 % 26) as u8) as char,
                (b'a' + (i % 26) as u8) as char
            );
            LanguageMeta::new(code, format!("f{}", i % 2))
        })
        .collect();
    let mask: Vec<bool> = (0..n_concepts * n_languages)
        .map(|i| i % n_languages < 2 || rng.random::<f64>() >= missing)
        .collect();
    let mut tensor = Vec::with_capacity(n_layers * mask.len() * dim);
    for _ in 0..n_layers {
        for &m in &mask {
            for j in 0..dim {
                tensor.push(if m {
                    // keep every valid vector away from zero
                    rng.random_range(-1.0f32..1.0) + if j == 0 { 2.0 } else { 0.0 }
                } else {
                    0.0
                });
            }
        }
    }
    EmbeddingStore::new(
        concepts,
        languages,
        (0..n_layers as u32).map(|l| l * 2).collect(),
        if seed % 2 == 0 { Condition::Contextual } else { Condition::Decontextual },
        dim,
        tensor,
        mask,
    )
    .unwrap()
}
