//! Gaussian mixture modeling of pass features via EM, with an elbow-method
//! curve for selecting the component count.
//!
//! Determinism contract: the fit canonicalizes its input by sorting rows
//! lexicographically and collapsing exact duplicates into weighted points
//! before seeding k-means++. Identical (data-as-multiset, k, seed) therefore
//! produce bitwise-identical models regardless of row order, and uniform
//! duplication of the data changes nothing. Parallel reductions accumulate
//! fixed-size chunks in index order, so worker count does not affect output
//! bits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN_TAU: f64 = 1.8378770664093453; // ln(2 pi)
const CHUNK: usize = 1024;

/// EM stopping and stabilization parameters.
#[derive(Debug, Clone, Copy)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Stop when the mean per-point log-likelihood gain falls below this.
    pub tol: f64,
    /// Ridge added to covariance diagonals each M-step; keeps every
    /// covariance SPD with eigenvalues >= reg_floor.
    pub reg_floor: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iter: 500,
            tol: 1e-7,
            reg_floor: 1e-6,
        }
    }
}

/// A dim x dim matrix as nested rows.
pub type Matrix = Vec<Vec<f64>>;

/// A fitted k-component Gaussian mixture with full covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub k: usize,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Symmetric positive-definite dim x dim matrices.
    pub covariances: Vec<Matrix>,
    /// Final training mean per-point log-likelihood.
    pub log_likelihood: f64,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    /// Mean per-point log-likelihood after each E-step.
    pub ll_trace: Vec<f64>,
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[allow(clippy::needless_range_loop)]
fn cholesky(a: &[Vec<f64>]) -> Option<Matrix> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for t in 0..j {
                sum -= l[i][t] * l[j][t];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Per-component quantities needed to evaluate log N(x; mu, Sigma).
struct ComponentEval {
    mean: Vec<f64>,
    chol: Vec<Vec<f64>>,
    log_det: f64,
    log_weight: f64,
}

impl ComponentEval {
    fn build(weights: &[f64], means: &[Vec<f64>], covs: &[Matrix]) -> Result<Vec<ComponentEval>> {
        weights
            .iter()
            .zip(means)
            .zip(covs)
            .map(|((w, mean), cov)| {
                let chol = cholesky(cov).ok_or_else(|| {
                    Error::InvalidConfig("covariance matrix is not positive definite".into())
                })?;
                let log_det = 2.0 * chol.iter().enumerate().map(|(i, row)| row[i].ln()).sum::<f64>();
                Ok(ComponentEval {
                    mean: mean.clone(),
                    chol,
                    log_det,
                    log_weight: if *w > 0.0 { w.ln() } else { f64::NEG_INFINITY },
                })
            })
            .collect()
    }

    /// log N(x; mean, Sigma) via forward substitution on the Cholesky factor.
    #[allow(clippy::needless_range_loop)]
    fn log_density(&self, x: &[f64]) -> f64 {
        let n = self.mean.len();
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut sum = x[i] - self.mean[i];
            for j in 0..i {
                sum -= self.chol[i][j] * z[j];
            }
            z[i] = sum / self.chol[i][i];
        }
        let maha: f64 = z.iter().map(|v| v * v).sum();
        -0.5 * (n as f64 * LN_TAU + self.log_det + maha)
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Canonically sorted unique rows with multiplicities.
fn dedup_canonical(data: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        data[a]
            .iter()
            .zip(&data[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| !o.is_eq())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for &idx in &order {
        if let Some(last) = points.last() {
            if last == &data[idx] {
                *counts.last_mut().unwrap() += 1.0;
                continue;
            }
        }
        points.push(data[idx].clone());
        counts.push(1.0);
    }
    (points, counts)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Pick an index proportionally to `weights` (all non-negative, positive sum).
fn weighted_pick(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let r = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            last_positive = i;
            acc += w;
            if r < acc {
                return i;
            }
        }
    }
    last_positive
}

/// k-means++ seeding over weighted unique points.
fn kmeans_pp(points: &[Vec<f64>], counts: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = weighted_pick(counts, rng);
    centers.push(points[first].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let scores: Vec<f64> = d2.iter().zip(counts).map(|(d, c)| d * c).collect();
        let idx = weighted_pick(&scores, rng);
        centers.push(points[idx].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centers.last().unwrap()));
        }
    }
    centers
}

/// In-order reduction over fixed-size chunks: deterministic for any worker
/// count.
fn chunked_sum<F>(len: usize, acc_len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, usize, &mut [f64]) + Sync,
{
    let partials: Vec<Vec<f64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk_idx| {
            let lo = chunk_idx * CHUNK;
            let hi = (lo + CHUNK).min(len);
            let mut acc = vec![0.0; acc_len];
            f(lo, hi, &mut acc);
            acc
        })
        .collect();
    let mut total = vec![0.0; acc_len];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

/// Fit a k-component mixture by EM from seeded k-means++ initialization.
pub fn fit_em(data: &[Vec<f64>], k: usize, seed: u64, opts: &EmOptions) -> Result<GmmModel> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let dim = data.first().map(|r| r.len()).unwrap_or(0);
    if dim == 0 {
        return Err(Error::InsufficientData("empty dataset".into()));
    }
    for row in data {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData);
        }
    }
    if data.len() < k * (dim + 1) {
        return Err(Error::InsufficientData(format!(
            "need at least k*(dim+1) = {} points for k = {k}, got {}",
            k * (dim + 1),
            data.len()
        )));
    }

    let (points, counts) = dedup_canonical(data);
    let u = points.len();
    if u < k {
        return Err(Error::InsufficientData(format!(
            "only {u} distinct points for k = {k} components"
        )));
    }
    let n_total: f64 = counts.iter().sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = kmeans_pp(&points, &counts, k, &mut rng);
    let mut weights = vec![1.0 / k as f64; k];

    // Initial covariances: diagonal global variance plus the ridge.
    let mut covariances = {
        let mut mean = vec![0.0; dim];
        for (p, c) in points.iter().zip(&counts) {
            for (m, v) in mean.iter_mut().zip(p) {
                *m += c * v;
            }
        }
        for m in &mut mean {
            *m /= n_total;
        }
        let mut var = vec![0.0; dim];
        for (p, c) in points.iter().zip(&counts) {
            for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
                *s += c * (v - m) * (v - m);
            }
        }
        let mut cov = vec![vec![vec![0.0; dim]; dim]; k];
        for comp in &mut cov {
            for j in 0..dim {
                comp[j][j] = var[j] / n_total + opts.reg_floor;
            }
        }
        cov
    };

    let mut resp = vec![0.0; u * k];
    let mut trace: Vec<f64> = Vec::new();
    let mut ll_prev = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    loop {
        // E-step: responsibilities and the objective.
        let evals = ComponentEval::build(&weights, &means, &covariances)?;
        let ll_partials: Vec<(Vec<f64>, f64)> = (0..u.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk_idx| {
                let lo = chunk_idx * CHUNK;
                let hi = (lo + CHUNK).min(u);
                let mut local_resp = vec![0.0; (hi - lo) * k];
                let mut local_ll = 0.0;
                let mut lp = vec![0.0; k];
                for i in lo..hi {
                    for (c, e) in evals.iter().enumerate() {
                        lp[c] = e.log_weight + e.log_density(&points[i]);
                    }
                    let lse = log_sum_exp(&lp);
                    local_ll += counts[i] * lse;
                    for c in 0..k {
                        local_resp[(i - lo) * k + c] = (lp[c] - lse).exp();
                    }
                }
                (local_resp, local_ll)
            })
            .collect();
        let mut ll_acc = 0.0;
        for (chunk_idx, (local_resp, local_ll)) in ll_partials.into_iter().enumerate() {
            let lo = chunk_idx * CHUNK;
            resp[lo * k..lo * k + local_resp.len()].copy_from_slice(&local_resp);
            ll_acc += local_ll;
        }
        let ll = ll_acc / n_total;

        // The EM objective never decreases; a violation beyond rounding is a bug.
        assert!(
            ll >= ll_prev - 1e-8,
            "EM log-likelihood decreased: {ll_prev} -> {ll}"
        );
        trace.push(ll);

        if ll_prev.is_finite() && ll - ll_prev < opts.tol {
            converged = true;
            ll_prev = ll;
            break;
        }
        ll_prev = ll;
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        // M-step: weighted sufficient statistics, chunk-deterministic.
        let resp_ref = &resp;
        let points_ref = &points;
        let counts_ref = &counts;
        let nk_and_sums = chunked_sum(u, k + k * dim, |lo, hi, acc| {
            let (nk, sums) = acc.split_at_mut(k);
            for i in lo..hi {
                for c in 0..k {
                    let g = counts_ref[i] * resp_ref[i * k + c];
                    nk[c] += g;
                    for (j, v) in points_ref[i].iter().enumerate() {
                        sums[c * dim + j] += g * v;
                    }
                }
            }
        });
        let (nk, mean_sums) = nk_and_sums.split_at(k);
        let nk: Vec<f64> = nk.iter().map(|v| v.max(1e-32)).collect();
        for c in 0..k {
            weights[c] = nk[c] / n_total;
            for j in 0..dim {
                means[c][j] = mean_sums[c * dim + j] / nk[c];
            }
        }
        let means_ref = &means;
        let outer = chunked_sum(u, k * dim * dim, |lo, hi, acc| {
            let mut diff = vec![0.0; dim];
            for i in lo..hi {
                for c in 0..k {
                    let g = counts_ref[i] * resp_ref[i * k + c];
                    for j in 0..dim {
                        diff[j] = points_ref[i][j] - means_ref[c][j];
                    }
                    for a in 0..dim {
                        let base = c * dim * dim + a * dim;
                        let da = g * diff[a];
                        for b in 0..dim {
                            acc[base + b] += da * diff[b];
                        }
                    }
                }
            }
        });
        for c in 0..k {
            for a in 0..dim {
                for b in 0..dim {
                    covariances[c][a][b] = outer[c * dim * dim + a * dim + b] / nk[c];
                }
                covariances[c][a][a] += opts.reg_floor;
            }
        }
    }

    Ok(GmmModel {
        k,
        dim,
        weights,
        means,
        covariances,
        log_likelihood: ll_prev,
        seed,
        converged,
        iterations,
        ll_trace: trace,
    })
}

/// Total log-likelihood of `data` under the model (log-sum-exp stabilized).
pub fn log_likelihood(model: &GmmModel, data: &[Vec<f64>]) -> Result<f64> {
    let evals = ComponentEval::build(&model.weights, &model.means, &model.covariances)?;
    let mut total = 0.0;
    let mut lp = vec![0.0; model.k];
    for row in data {
        if row.len() != model.dim {
            return Err(Error::DimensionMismatch {
                expected: model.dim,
                got: row.len(),
            });
        }
        for (c, e) in evals.iter().enumerate() {
            lp[c] = e.log_weight + e.log_density(row);
        }
        total += log_sum_exp(&lp);
    }
    Ok(total)
}

/// Posterior component responsibilities for one point.
pub fn responsibilities(model: &GmmModel, point: &[f64]) -> Result<Vec<f64>> {
    if point.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: point.len(),
        });
    }
    let evals = ComponentEval::build(&model.weights, &model.means, &model.covariances)?;
    let lp: Vec<f64> = evals
        .iter()
        .map(|e| e.log_weight + e.log_density(point))
        .collect();
    let lse = log_sum_exp(&lp);
    Ok(lp.iter().map(|v| (v - lse).exp()).collect())
}

/// One point of the elbow curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ElbowPoint {
    pub k: usize,
    /// Mean negative log-likelihood per point, best of the restarts.
    pub mean_nll: f64,
    /// Free parameters of a k-component full-covariance mixture.
    pub param_count: usize,
}

pub fn gmm_param_count(k: usize, dim: usize) -> usize {
    k * dim + k * dim * (dim + 1) / 2 + (k - 1)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for restart `r` of a k-component fit; independent of the order in
/// which (k, r) pairs are visited, so an elbow sweep and a later refit of
/// the picked k use identical seeds.
fn restart_seed(seed: u64, k: usize, r: usize) -> u64 {
    splitmix64(seed ^ splitmix64(k as u64) ^ splitmix64((r as u64) << 32))
}

/// Best of `restarts` seeded fits by training log-likelihood.
pub fn fit_best_of(
    data: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
    opts: &EmOptions,
) -> Result<GmmModel> {
    if restarts == 0 {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }
    let mut best: Option<GmmModel> = None;
    for r in 0..restarts {
        let model = fit_em(data, k, restart_seed(seed, k, r), opts)?;
        best = Some(match best {
            Some(b) if b.log_likelihood >= model.log_likelihood => b,
            _ => model,
        });
    }
    Ok(best.unwrap())
}

/// Best-of-restarts fit metric for each candidate component count.
pub fn elbow_curve(
    data: &[Vec<f64>],
    ks: &[usize],
    seed: u64,
    restarts: usize,
    opts: &EmOptions,
) -> Result<Vec<ElbowPoint>> {
    if ks.is_empty() || ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "k range must be non-empty and strictly ascending".into(),
        ));
    }
    let dim = data.first().map(|r| r.len()).unwrap_or(0);
    let mut curve = Vec::with_capacity(ks.len());
    for &k in ks {
        let model = fit_best_of(data, k, seed, restarts, opts)?;
        curve.push(ElbowPoint {
            k,
            mean_nll: -model.log_likelihood,
            param_count: gmm_param_count(k, dim),
        });
    }
    Ok(curve)
}

/// Gains below this (nats per point) are treated as no structure found.
pub const DEFAULT_ELBOW_MIN_GAIN: f64 = 0.05;

/// Automatic elbow selection: the last k whose incremental gain clears
/// `min_gain` — the point where the curve bends below the significance
/// slope and stays flat. Falls back to the smallest k when no gain is
/// significant (no structure found).
pub fn elbow_pick(curve: &[ElbowPoint], min_gain: f64) -> usize {
    let mut pick = curve.first().map(|p| p.k).unwrap_or(1);
    for pair in curve.windows(2) {
        if pair[0].mean_nll - pair[1].mean_nll >= min_gain {
            pick = pair[1].k;
        }
    }
    pick
}

// --- feature standardization ----------------------------------------------

/// Per-feature z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub feature_means: Vec<f64>,
    pub feature_sds: Vec<f64>,
}

impl Standardization {
    /// Map a scaled-space mean vector back to original units.
    pub fn restore(&self, scaled: &[f64]) -> Vec<f64> {
        scaled
            .iter()
            .zip(&self.feature_means)
            .zip(&self.feature_sds)
            .map(|((v, m), s)| v * s + m)
            .collect()
    }
}

/// Z-score each feature (sample standard deviation). Errors on a constant
/// feature.
pub fn standardize(data: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Standardization)> {
    let dim = data.first().map(|r| r.len()).unwrap_or(0);
    if dim == 0 || data.len() < 2 {
        return Err(Error::InsufficientData(
            "standardization needs at least 2 rows".into(),
        ));
    }
    let n = data.len() as f64;
    let mut means = vec![0.0; dim];
    for row in data {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut sds = vec![0.0; dim];
    for row in data {
        for ((s, v), m) in sds.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for (j, s) in sds.iter_mut().enumerate() {
        *s = (*s / (n - 1.0)).sqrt();
        if *s == 0.0 {
            return Err(Error::DegenerateDimension { dim: j });
        }
    }
    let scaled = data
        .iter()
        .map(|row| {
            row.iter()
                .zip(&means)
                .zip(&sds)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect();
    Ok((
        scaled,
        Standardization {
            feature_means: means,
            feature_sds: sds,
        },
    ))
}

// --- serialization ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GmmModelDoc {
    k: usize,
    dim: usize,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Vec<Matrix>,
    standardization: Option<Standardization>,
    seed: u64,
    log_likelihood: f64,
}

pub fn gmm_to_json(model: &GmmModel, standardization: Option<&Standardization>) -> Result<String> {
    let doc = GmmModelDoc {
        k: model.k,
        dim: model.dim,
        weights: model.weights.clone(),
        means: model.means.clone(),
        covariances: model.covariances.clone(),
        standardization: standardization.cloned(),
        seed: model.seed,
        log_likelihood: model.log_likelihood,
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn gmm_from_json(text: &str) -> Result<(GmmModel, Option<Standardization>)> {
    let doc: GmmModelDoc = serde_json::from_str(text)?;
    let model = GmmModel {
        k: doc.k,
        dim: doc.dim,
        weights: doc.weights,
        means: doc.means,
        covariances: doc.covariances,
        log_likelihood: doc.log_likelihood,
        seed: doc.seed,
        converged: true,
        iterations: 0,
        ll_trace: Vec::new(),
    };
    Ok((model, doc.standardization))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian_blob(
        rng: &mut ChaCha8Rng,
        center: &[f64],
        sd: f64,
        n: usize,
    ) -> Vec<Vec<f64>> {
        let normal = Normal::new(0.0, sd).unwrap();
        (0..n)
            .map(|_| center.iter().map(|c| c + normal.sample(rng)).collect())
            .collect()
    }

    fn models_bitwise_equal(a: &GmmModel, b: &GmmModel) -> bool {
        let f = |x: &f64, y: &f64| x.to_bits() == y.to_bits();
        a.weights.iter().zip(&b.weights).all(|(x, y)| f(x, y))
            && a.means
                .iter()
                .flatten()
                .zip(b.means.iter().flatten())
                .all(|(x, y)| f(x, y))
            && a.covariances
                .iter()
                .flatten()
                .flatten()
                .zip(b.covariances.iter().flatten().flatten())
                .all(|(x, y)| f(x, y))
            && f(&a.log_likelihood, &b.log_likelihood)
    }

    #[test]
    fn single_component_recovers_mean_and_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(0.0..5.0)])
            .collect();
        let opts = EmOptions::default();
        let model = fit_em(&data, 1, 7, &opts).unwrap();
        assert_eq!(model.weights, vec![1.0]);
        let n = data.len() as f64;
        let mean: Vec<f64> = (0..2)
            .map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        for (got, want) in model.means[0].iter().zip(&mean) {
            assert_relative_eq!(got, want, epsilon = 1e-9);
        }
        // Biased covariance plus the diagonal ridge.
        for a in 0..2 {
            for b in 0..2 {
                let cov: f64 = data
                    .iter()
                    .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                    .sum::<f64>()
                    / n;
                let want = cov + if a == b { opts.reg_floor } else { 0.0 };
                assert_relative_eq!(model.covariances[0][a][b], want, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn uniform_duplication_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut data = gaussian_blob(&mut rng, &[0.0, 0.0], 1.0, 60);
        data.extend(gaussian_blob(&mut rng, &[6.0, 6.0], 1.0, 60));
        let doubled: Vec<Vec<f64>> = data.iter().chain(data.iter()).cloned().collect();
        let a = fit_em(&data, 2, 33, &EmOptions::default()).unwrap();
        let b = fit_em(&doubled, 2, 33, &EmOptions::default()).unwrap();
        assert!(models_bitwise_equal(&a, &b));
    }

    #[test]
    fn shuffled_input_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut data = gaussian_blob(&mut rng, &[0.0, 0.0, 0.0], 1.0, 80);
        data.extend(gaussian_blob(&mut rng, &[8.0, -4.0, 2.0], 1.2, 70));
        let a = fit_em(&data, 2, 5, &EmOptions::default()).unwrap();
        data.reverse();
        let b = fit_em(&data, 2, 5, &EmOptions::default()).unwrap();
        assert!(models_bitwise_equal(&a, &b));
    }

    #[test]
    fn seeded_fits_are_bitwise_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data = gaussian_blob(&mut rng, &[1.0, 2.0], 2.0, 150);
        let a = fit_em(&data, 3, 11, &EmOptions::default()).unwrap();
        let b = fit_em(&data, 3, 11, &EmOptions::default()).unwrap();
        assert!(models_bitwise_equal(&a, &b));
    }

    #[test]
    fn training_trace_is_monotone_and_weights_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut data = gaussian_blob(&mut rng, &[0.0, 0.0], 1.0, 100);
        data.extend(gaussian_blob(&mut rng, &[5.0, 5.0], 1.5, 120));
        for seed in 0..10 {
            let model = fit_em(&data, 3, seed, &EmOptions::default()).unwrap();
            for pair in model.ll_trace.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-8);
            }
            let sum: f64 = model.weights.iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn well_separated_clusters_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let centers = [
            vec![0.0, 0.0, 0.0, 0.0],
            vec![10.0, 0.0, 0.0, 0.0],
            vec![0.0, 10.0, 10.0, 0.0],
        ];
        let sizes = [500, 300, 200];
        let mut data = Vec::new();
        for (c, n) in centers.iter().zip(sizes) {
            data.extend(gaussian_blob(&mut rng, c, 1.0, n));
        }
        let model = fit_em(&data, 3, 1, &EmOptions::default()).unwrap();
        // Match each true center to its nearest recovered mean.
        let total: f64 = sizes.iter().sum::<usize>() as f64;
        for (c, n) in centers.iter().zip(sizes) {
            let (best, dist) = model
                .means
                .iter()
                .enumerate()
                .map(|(i, m)| (i, sq_dist(m, c).sqrt()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(dist < 0.5, "mean off by {dist}");
            assert_abs_diff_eq!(model.weights[best], n as f64 / total, epsilon = 0.05);
        }
    }

    #[test]
    fn log_likelihood_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = gaussian_blob(&mut rng, &[0.0, 1.0], 1.5, 120);
        let model = fit_em(&data, 2, 3, &EmOptions::default()).unwrap();
        // Naive: densities in linear space, no stabilization. 2x2
        // covariance inverted in closed form.
        let naive: f64 = data
            .iter()
            .map(|x| {
                let mix: f64 = (0..model.k)
                    .map(|c| {
                        let m = &model.means[c];
                        let s = &model.covariances[c];
                        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
                        let dx = x[0] - m[0];
                        let dy = x[1] - m[1];
                        let maha =
                            (s[1][1] * dx * dx - 2.0 * s[0][1] * dx * dy + s[0][0] * dy * dy) / det;
                        model.weights[c] * (-0.5 * maha).exp()
                            / (std::f64::consts::TAU * det.sqrt())
                    })
                    .sum();
                mix.ln()
            })
            .sum();
        let stable = log_likelihood(&model, &data).unwrap();
        assert_relative_eq!(stable, naive, max_relative = 1e-9);
    }

    #[test]
    fn log_likelihood_closed_form_and_additivity() {
        let model = GmmModel {
            k: 1,
            dim: 3,
            weights: vec![1.0],
            means: vec![vec![1.0, 2.0, 3.0]],
            covariances: vec![vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ]],
            log_likelihood: 0.0,
            seed: 0,
            converged: true,
            iterations: 0,
            ll_trace: vec![],
        };
        let datum = vec![1.0, 2.0, 3.0];
        let ll1 = log_likelihood(&model, std::slice::from_ref(&datum)).unwrap();
        assert_relative_eq!(ll1, -1.5 * LN_TAU, epsilon = 1e-12);
        let ll2 = log_likelihood(&model, &[datum.clone(), datum.clone()]).unwrap();
        assert_relative_eq!(ll2, 2.0 * ll1, epsilon = 1e-12);
    }

    #[test]
    fn responsibilities_match_direct_ratios_and_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut data = gaussian_blob(&mut rng, &[0.0, 0.0], 1.0, 90);
        data.extend(gaussian_blob(&mut rng, &[30.0, 30.0], 1.0, 90));
        let model = fit_em(&data, 2, 2, &EmOptions::default()).unwrap();
        // Point at one recovered mean: responsibility of that component ~ 1.
        let at_mean = model.means[0].clone();
        let g = responsibilities(&model, &at_mean).unwrap();
        assert_abs_diff_eq!(g.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(g[0] > 0.999 || g[1] > 0.999);

        // Two identical components: responsibilities equal the weights.
        let twin = GmmModel {
            k: 2,
            dim: 2,
            weights: vec![0.3, 0.7],
            means: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            covariances: vec![
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            ],
            log_likelihood: 0.0,
            seed: 0,
            converged: true,
            iterations: 0,
            ll_trace: vec![],
        };
        let g = responsibilities(&twin, &[0.7, -0.2]).unwrap();
        assert_abs_diff_eq!(g[0], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn insufficient_or_bad_data_errors() {
        let data = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        assert!(matches!(
            fit_em(&data, 2, 0, &EmOptions::default()),
            Err(Error::InsufficientData(_))
        ));
        let bad = vec![vec![0.0, f64::NAN]; 20];
        assert!(matches!(
            fit_em(&bad, 1, 0, &EmOptions::default()),
            Err(Error::NonFiniteData)
        ));
    }

    #[test]
    fn elbow_flat_curve_picks_smallest_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let data = gaussian_blob(&mut rng, &[0.0, 0.0], 1.0, 400);
        let curve = elbow_curve(&data, &[1, 2, 3, 4], 5, 3, &EmOptions::default()).unwrap();
        assert_eq!(elbow_pick(&curve, DEFAULT_ELBOW_MIN_GAIN), 1);
    }

    #[test]
    fn elbow_curve_is_non_increasing_with_restarts() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut data = gaussian_blob(&mut rng, &[0.0, 0.0], 1.0, 200);
        data.extend(gaussian_blob(&mut rng, &[9.0, 9.0], 1.0, 200));
        let curve = elbow_curve(&data, &[1, 2, 3, 4, 5], 17, 8, &EmOptions::default()).unwrap();
        for pair in curve.windows(2) {
            assert!(
                pair[1].mean_nll <= pair[0].mean_nll + 1e-3,
                "curve increased from k={} to k={}",
                pair[0].k,
                pair[1].k
            );
        }
    }

    #[test]
    fn elbow_three_clusters_picks_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut data = gaussian_blob(&mut rng, &[0.0, 0.0], 1.0, 300);
        data.extend(gaussian_blob(&mut rng, &[12.0, 0.0], 1.0, 250));
        data.extend(gaussian_blob(&mut rng, &[0.0, 12.0], 1.0, 200));
        let curve = elbow_curve(&data, &[1, 2, 3, 4, 5, 6], 3, 5, &EmOptions::default()).unwrap();
        assert_eq!(elbow_pick(&curve, DEFAULT_ELBOW_MIN_GAIN), 3);
    }

    #[test]
    fn standardize_round_trips_means() {
        let data = vec![
            vec![10.0, 100.0],
            vec![20.0, 300.0],
            vec![30.0, 200.0],
            vec![40.0, 400.0],
        ];
        let (scaled, std) = standardize(&data).unwrap();
        for j in 0..2 {
            let m: f64 = scaled.iter().map(|r| r[j]).sum::<f64>() / 4.0;
            assert_abs_diff_eq!(m, 0.0, epsilon = 1e-12);
        }
        let back = std.restore(&[0.0, 0.0]);
        assert_abs_diff_eq!(back[0], 25.0, epsilon = 1e-12);
        assert_abs_diff_eq!(back[1], 250.0, epsilon = 1e-12);
        let constant = vec![vec![1.0, 5.0], vec![1.0, 6.0]];
        assert!(matches!(
            standardize(&constant),
            Err(Error::DegenerateDimension { dim: 0 })
        ));
    }

    #[test]
    fn gmm_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let data = gaussian_blob(&mut rng, &[0.0, 5.0], 1.0, 80);
        let (scaled, std) = standardize(&data).unwrap();
        let model = fit_em(&scaled, 2, 4, &EmOptions::default()).unwrap();
        let text = gmm_to_json(&model, Some(&std)).unwrap();
        let (back, back_std) = gmm_from_json(&text).unwrap();
        assert_eq!(model.weights, back.weights);
        assert_eq!(model.means, back.means);
        assert_eq!(model.covariances, back.covariances);
        assert_eq!(Some(std), back_std);
        assert_eq!(model.seed, back.seed);
    }
}

