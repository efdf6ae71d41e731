//! Pass feature extraction, rank correlation against distance-to-goal, and
//! location-smoothed feature maps.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::{EvalMode, FieldGrid, GridSpec};
use crate::ingest::PassEvent;
use crate::kde::CommitmentModel;
use crate::spatial::{dominance_share, team_influence_at, Pitch, Snapshot};

/// A field-equity surface: the expected scoring value of possession at each
/// location, sampled on a grid and read back by bilinear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct EquitySurface {
    pub grid: FieldGrid,
}

impl EquitySurface {
    pub fn value_at(&self, p: Vec2) -> f64 {
        self.grid.bilinear(p)
    }

    /// Synthetic placeholder: linear in distance to the attacking goal
    /// center, scaled to [0, 1] (1 at the goal, 0 at the far end). For
    /// testing only; not a fitted equity model.
    pub fn placeholder(pitch: &Pitch, cell_size: f64) -> Result<EquitySurface> {
        let spec = pitch.grid_spec(cell_size)?;
        let goal = pitch.goal_center();
        let max_dist = pitch.length;
        let grid = FieldGrid::from_fn(spec, EvalMode::Serial, |_| true, |p| {
            (1.0 - p.distance(goal) / max_dist).clamp(0.0, 1.0)
        });
        Ok(EquitySurface { grid })
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = EquityDoc {
            origin: [self.grid.spec.origin.x, self.grid.spec.origin.y],
            cell_size: self.grid.spec.cell_size,
            nx: self.grid.spec.nx,
            ny: self.grid.spec.ny,
            values: self.grid.values.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<EquitySurface> {
        let doc: EquityDoc = serde_json::from_str(text)?;
        let spec = GridSpec::new(
            Vec2::new(doc.origin[0], doc.origin[1]),
            doc.cell_size,
            doc.nx,
            doc.ny,
        )?;
        if doc.values.len() != spec.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.len(),
                got: doc.values.len(),
            });
        }
        if doc.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData);
        }
        let mask = vec![true; doc.values.len()];
        Ok(EquitySurface {
            grid: FieldGrid {
                spec,
                values: doc.values,
                mask,
            },
        })
    }
}

#[derive(Serialize, Deserialize)]
struct EquityDoc {
    origin: [f64; 2],
    cell_size: f64,
    nx: usize,
    ny: usize,
    /// Row-major, index = j * nx + i.
    values: Vec<f64>,
}

/// Spatial characteristics of one pass at its reception point.
#[derive(Debug, Clone, PartialEq)]
pub struct PassFeatures {
    pub pass_id: usize,
    pub distance: f64,
    /// Attacking team's share of influence at the reception point, [0, 1].
    pub dominance: f64,
    /// Attacking team influence at the reception point, [0, 18].
    pub influence: f64,
    /// Field-equity delta, receiver minus passer.
    pub equity: f64,
    /// Distance from the reception point to the attacking goal center.
    pub dist_to_goal: f64,
    pub receive_pos: Vec2,
}

/// Configuration shared by pass-feature computations.
#[derive(Debug, Clone, Copy)]
pub struct PassConfig {
    pub pitch: Pitch,
    pub ball_speed: f64,
    pub epsilon_floor: f64,
}

impl Default for PassConfig {
    fn default() -> Self {
        PassConfig {
            pitch: Pitch::DEFAULT,
            ball_speed: crate::spatial::DEFAULT_BALL_SPEED,
            epsilon_floor: crate::kde::EPSILON_FLOOR,
        }
    }
}

/// Evaluate one pass against a snapshot taken at its kick time. Dominance
/// and influence are computed at the reception point with the ball at the
/// kick origin; equity is the receiver-minus-passer surface delta.
pub fn compute_pass_features(
    pass_id: usize,
    pass: &PassEvent,
    snapshot: &Snapshot,
    model: &CommitmentModel,
    equity: &EquitySurface,
    config: &PassConfig,
) -> Result<PassFeatures> {
    if !config.pitch.contains(pass.receive_pos) {
        return Err(Error::OffPitchReception {
            x: pass.receive_pos.x,
            y: pass.receive_pos.y,
        });
    }
    let attacking = &snapshot.possession_team;
    let defending = snapshot
        .opponent_of(attacking)
        .ok_or_else(|| Error::InvalidSnapshot("snapshot needs two teams".into()))?;
    let inf_att = team_influence_at(
        snapshot,
        attacking,
        model,
        pass.receive_pos,
        pass.origin_pos,
        config.ball_speed,
    );
    let inf_def = team_influence_at(
        snapshot,
        &defending,
        model,
        pass.receive_pos,
        pass.origin_pos,
        config.ball_speed,
    );
    let equity_delta = equity.value_at(pass.receive_pos) - equity.value_at(pass.origin_pos);
    Ok(PassFeatures {
        pass_id,
        distance: pass.distance,
        dominance: dominance_share(inf_att, inf_def, config.epsilon_floor),
        influence: inf_att,
        equity: equity_delta,
        dist_to_goal: pass.receive_pos.distance(config.pitch.goal_center()),
        receive_pos: pass.receive_pos,
    })
}

pub fn write_pass_features_csv<W: Write>(mut out: W, features: &[PassFeatures]) -> Result<()> {
    writeln!(out, "pass_id,distance,dominance,influence,equity,dist_to_goal")?;
    for f in features {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            f.pass_id, f.distance, f.dominance, f.influence, f.equity, f.dist_to_goal
        )?;
    }
    Ok(())
}

/// Average ranks (ties get the mean of their rank range), 1-based.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation: Pearson correlation of average-ranked data.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(
            "correlation needs at least 2 observations".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteData);
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Two-sided p-value for a Spearman coefficient under the t-approximation:
/// t = rho * sqrt((n-2) / (1 - rho^2)) against Student-t with n-2 degrees of
/// freedom.
pub fn spearman_significance(rho: f64, n: usize) -> Result<f64> {
    if n < 10 {
        return Err(Error::InsufficientData(format!(
            "significance approximation needs n >= 10, got {n}"
        )));
    }
    if !rho.is_finite() || rho.abs() > 1.0 {
        return Err(Error::InvalidConfig(format!("rho must lie in [-1, 1], got {rho}")));
    }
    if rho.abs() == 1.0 {
        return Ok(0.0);
    }
    let dof = (n - 2) as f64;
    let t = rho * (dof / (1.0 - rho * rho)).sqrt();
    Ok(student_t_two_sided(t, dof))
}

/// Two-sided tail probability of the Student-t distribution,
/// P(|T| >= |t|) = I_{nu/(nu+t^2)}(nu/2, 1/2).
pub fn student_t_two_sided(t: f64, dof: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t))
}

/// ln Gamma(x) by the Lanczos approximation (g = 5, 6 coefficients).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000000000190015;
    let mut y = x;
    for c in COEFFS {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation (modified Lentz).
fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // Use the symmetry relation on the side where the fraction converges fast.
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Nadaraya-Watson smoothing of a pass feature over reception locations:
/// each cell's value is the Gaussian-weighted mean of the selected feature,
/// with bandwidth `kernel_radius`. Cells whose total weight falls below
/// 1e-6 are masked out, as are cells outside the pitch.
pub fn smooth_by_location<F>(
    passes: &[PassFeatures],
    selector: F,
    pitch: &Pitch,
    spec: GridSpec,
    kernel_radius: f64,
    mode: EvalMode,
) -> Result<FieldGrid>
where
    F: Fn(&PassFeatures) -> f64 + Sync,
{
    if passes.is_empty() {
        return Err(Error::InsufficientData("no passes to smooth".into()));
    }
    if !(kernel_radius > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "kernel radius must be positive, got {kernel_radius}"
        )));
    }
    let inv_two_r2 = 1.0 / (2.0 * kernel_radius * kernel_radius);
    let points: Vec<(Vec2, f64)> = passes.iter().map(|p| (p.receive_pos, selector(p))).collect();
    let mut grid = FieldGrid::from_fn(
        spec,
        mode,
        |p| pitch.contains(p),
        |cell| {
            let mut wsum = 0.0;
            let mut vsum = 0.0;
            for (pos, value) in &points {
                let d2 = {
                    let dx = cell.x - pos.x;
                    let dy = cell.y - pos.y;
                    dx * dx + dy * dy
                };
                let w = (-d2 * inv_two_r2).exp();
                wsum += w;
                vsum += w * value;
            }
            if wsum < 1e-6 {
                f64::NAN
            } else {
                vsum / wsum
            }
        },
    );
    for (v, m) in grid.values.iter_mut().zip(grid.mask.iter_mut()) {
        if v.is_nan() {
            *v = 0.0;
            *m = false;
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PlayerState;
    use crate::ingest::CommitmentSample;
    use crate::kde::BandwidthRule;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spearman_perfect_monotone() {
        let xs = [1.0, 2.0, 5.0, 9.0];
        let up = [10.0, 20.0, 21.0, 400.0];
        let down = [4.0, 3.0, 2.0, 1.0];
        assert_abs_diff_eq!(spearman(&xs, &up).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spearman(&xs, &down).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn spearman_worked_example_without_ties() {
        // Sum of squared rank differences is 4: rho = 1 - 6*4/(4*15) = 0.6.
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 1.0, 4.0, 3.0];
        assert_abs_diff_eq!(spearman(&xs, &ys).unwrap(), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn spearman_constant_input_is_undefined() {
        let xs = [1.0, 1.0, 1.0];
        let ys = [1.0, 2.0, 3.0];
        assert!(matches!(spearman(&xs, &ys), Err(Error::UndefinedCorrelation)));
    }

    /// O(n^2) counting oracle for average ranks, then a direct Pearson.
    fn spearman_oracle(xs: &[f64], ys: &[f64]) -> f64 {
        let rank = |vals: &[f64]| -> Vec<f64> {
            vals.iter()
                .map(|&v| {
                    let less = vals.iter().filter(|&&o| o < v).count() as f64;
                    let equal = vals.iter().filter(|&&o| o == v).count() as f64;
                    less + (equal + 1.0) / 2.0
                })
                .collect()
        };
        let rx = rank(xs);
        let ry = rank(ys);
        let n = rx.len() as f64;
        let mx = rx.iter().sum::<f64>() / n;
        let my = ry.iter().sum::<f64>() / n;
        let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
        let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn spearman_matches_counting_oracle_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let n = rng.gen_range(5..40);
            // Integer-valued draws force ties.
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64).collect();
            match spearman(&xs, &ys) {
                Ok(rho) => assert_abs_diff_eq!(rho, spearman_oracle(&xs, &ys), epsilon = 1e-12),
                Err(Error::UndefinedCorrelation) => {
                    let const_x = xs.iter().all(|v| *v == xs[0]);
                    let const_y = ys.iter().all(|v| *v == ys[0]);
                    assert!(const_x || const_y);
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn significance_edge_cases() {
        assert_eq!(spearman_significance(0.0, 100).unwrap(), 1.0);
        assert_eq!(spearman_significance(1.0, 100).unwrap(), 0.0);
        assert_eq!(spearman_significance(-1.0, 100).unwrap(), 0.0);
        assert!(spearman_significance(0.5, 5).is_err());
    }

    #[test]
    fn significance_matches_published_inequality() {
        // rho = 0.05 over 2934 passes: t ~ 2.71, p ~ 0.0067 < 0.01.
        let p = spearman_significance(0.05, 2934).unwrap();
        assert!(p < 0.01, "p = {p}");
        assert!((0.006..0.008).contains(&p), "p = {p}");
    }

    /// Composite-Simpson integration of the t-density tail, as an
    /// independent check on the continued-fraction CDF.
    fn t_two_sided_quadrature(t: f64, dof: f64) -> f64 {
        let log_norm = ln_gamma((dof + 1.0) / 2.0)
            - ln_gamma(dof / 2.0)
            - 0.5 * (dof * std::f64::consts::PI).ln();
        let pdf = |x: f64| (log_norm - (dof + 1.0) / 2.0 * (1.0 + x * x / dof).ln()).exp();
        let (lo, hi) = (t.abs(), t.abs() + 400.0);
        let steps = 400_000;
        let h = (hi - lo) / steps as f64;
        let mut acc = pdf(lo) + pdf(hi);
        for k in 1..steps {
            let x = lo + k as f64 * h;
            acc += pdf(x) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        2.0 * acc * h / 3.0
    }

    #[test]
    fn t_cdf_matches_quadrature_oracle() {
        for &(t, dof) in &[(2.7107, 2932.0), (1.5, 8.0), (0.3, 28.0), (4.2, 50.0)] {
            let got = student_t_two_sided(t, dof);
            let want = t_two_sided_quadrature(t, dof);
            assert_abs_diff_eq!(got, want, epsilon = 1e-6);
        }
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_monotone_transforms(
            seed in 0u64..1000,
            n in 5usize..30,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            prop_assume!(spearman(&xs, &ys).is_ok());
            let rho = spearman(&xs, &ys).unwrap();
            let xs_t: Vec<f64> = xs.iter().map(|v| (v * 0.3).exp()).collect();
            let ys_t: Vec<f64> = ys.iter().map(|v| v.powi(3) * 2.0 + 1.0).collect();
            let rho_t = spearman(&xs_t, &ys_t).unwrap();
            prop_assert!((rho - rho_t).abs() < 1e-12);
            // Symmetry.
            let rho_swap = spearman(&ys, &xs).unwrap();
            prop_assert!((rho - rho_swap).abs() < 1e-12);
        }
    }

    fn feature_at(x: f64, y: f64, value: f64) -> PassFeatures {
        PassFeatures {
            pass_id: 0,
            distance: 20.0,
            dominance: value,
            influence: 1.0,
            equity: 0.0,
            dist_to_goal: 40.0,
            receive_pos: Vec2::new(x, y),
        }
    }

    #[test]
    fn smoothing_of_constant_feature_is_constant() {
        let pitch = Pitch::DEFAULT;
        let spec = pitch.grid_spec(10.0).unwrap();
        let passes = vec![feature_at(0.0, 0.0, 0.7), feature_at(30.0, 10.0, 0.7)];
        let g = smooth_by_location(&passes, |p| p.dominance, &pitch, spec, 15.0, EvalMode::Serial)
            .unwrap();
        for (v, m) in g.values.iter().zip(&g.mask) {
            if *m {
                assert_abs_diff_eq!(*v, 0.7, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn single_pass_smoothing_equals_feature_everywhere_unmasked() {
        let pitch = Pitch::DEFAULT;
        let spec = pitch.grid_spec(10.0).unwrap();
        let passes = vec![feature_at(5.0, 5.0, 0.3)];
        let g = smooth_by_location(&passes, |p| p.dominance, &pitch, spec, 15.0, EvalMode::Serial)
            .unwrap();
        for (v, m) in g.values.iter().zip(&g.mask) {
            if *m {
                assert_abs_diff_eq!(*v, 0.3, epsilon = 1e-9);
            }
        }
        // Far corners drop below the weight floor and are masked.
        assert!(g.mask.iter().any(|m| !m));
    }

    #[test]
    fn symmetric_passes_average_at_midpoint() {
        let pitch = Pitch::DEFAULT;
        // Odd cell counts center a cell on the origin.
        let spec = GridSpec::covering(-25.0, 25.0, -5.0, 5.0, 10.0).unwrap();
        let passes = vec![feature_at(-20.0, 0.0, 0.0), feature_at(20.0, 0.0, 1.0)];
        let g = smooth_by_location(&passes, |p| p.dominance, &pitch, spec, 15.0, EvalMode::Serial)
            .unwrap();
        let mid = g.value(2, 0); // cell centered at (0, 0)
        assert_abs_diff_eq!(mid, 0.5, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn smoothing_stays_within_feature_range(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pitch = Pitch::DEFAULT;
            let spec = pitch.grid_spec(16.0).unwrap();
            let passes: Vec<PassFeatures> = (0..8)
                .map(|_| feature_at(
                    rng.gen_range(-60.0..60.0),
                    rng.gen_range(-50.0..50.0),
                    rng.gen_range(0.0..1.0),
                ))
                .collect();
            let lo = passes.iter().map(|p| p.dominance).fold(f64::INFINITY, f64::min);
            let hi = passes.iter().map(|p| p.dominance).fold(f64::NEG_INFINITY, f64::max);
            let g = smooth_by_location(&passes, |p| p.dominance, &pitch, spec, 15.0, EvalMode::Serial).unwrap();
            for (v, m) in g.values.iter().zip(&g.mask) {
                if *m {
                    prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
                }
            }
        }
    }

    fn pass(origin: Vec2, receive: Vec2) -> PassEvent {
        PassEvent {
            match_id: "m".into(),
            t_p: 10.0,
            t_c: 12.0,
            passer_id: "a".into(),
            receiver_id: "b".into(),
            team_id: "home".into(),
            origin_pos: origin,
            receive_pos: receive,
            distance: origin.distance(receive),
            contested: false,
        }
    }

    fn simple_model(seed: u64) -> CommitmentModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<CommitmentSample> = (0..240)
            .map(|i| CommitmentSample {
                x: rng.gen_range(-10.0..20.0),
                y: rng.gen_range(-12.0..12.0),
                v: rng.gen_range(0.0..8.0),
                t: rng.gen_range(1.0..4.0),
                committed: i % 3 == 0,
            })
            .collect();
        CommitmentModel::fit(&samples, BandwidthRule::Scott, 1.0).unwrap()
    }

    fn snapshot(players: Vec<PlayerState>) -> Snapshot {
        Snapshot {
            t: 10.0,
            ball_pos: Vec2::ZERO,
            possession_team: "home".into(),
            players,
        }
    }

    fn player(id: &str, team: &str, pos: Vec2) -> PlayerState {
        PlayerState {
            player_id: id.into(),
            team_id: team.into(),
            t: 10.0,
            pos,
            heading: Some(Vec2::new(1.0, 0.0)),
            speed: 2.0,
        }
    }

    #[test]
    fn constant_equity_surface_gives_zero_delta() {
        let pitch = Pitch::DEFAULT;
        let spec = pitch.grid_spec(10.0).unwrap();
        let equity = EquitySurface {
            grid: FieldGrid::filled(spec, 0.42),
        };
        let model = simple_model(1);
        let snap = snapshot(vec![
            player("a", "home", Vec2::ZERO),
            player("b", "home", Vec2::new(20.0, 0.0)),
            player("o", "away", Vec2::new(0.0, 20.0)),
        ]);
        let f = compute_pass_features(
            0,
            &pass(Vec2::ZERO, Vec2::new(20.0, 0.0)),
            &snap,
            &model,
            &equity,
            &PassConfig::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(f.equity, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_equity_surface_interpolates_exactly() {
        let pitch = Pitch::DEFAULT;
        let spec = pitch.grid_spec(5.0).unwrap();
        let grid = FieldGrid::from_fn(spec, EvalMode::Serial, |_| true, |p| p.x / 100.0);
        let equity = EquitySurface { grid };
        let model = simple_model(2);
        let snap = snapshot(vec![
            player("a", "home", Vec2::ZERO),
            player("b", "home", Vec2::new(30.0, 0.0)),
            player("o", "away", Vec2::new(0.0, 30.0)),
        ]);
        let f = compute_pass_features(
            0,
            &pass(Vec2::ZERO, Vec2::new(30.0, 0.0)),
            &snap,
            &model,
            &equity,
            &PassConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(f.equity, 0.30, epsilon = 1e-9);
        assert_relative_eq!(f.dist_to_goal, 50.0, epsilon = 1e-9);
    }

    #[test]
    fn open_player_has_full_dominance() {
        let pitch = Pitch::DEFAULT;
        let equity = EquitySurface::placeholder(&pitch, 10.0).unwrap();
        let model = simple_model(3);
        // Receiver close to the reception point; defenders far beyond the
        // model's data support, so their influence floors to zero.
        let snap = snapshot(vec![
            player("a", "home", Vec2::new(-20.0, 0.0)),
            player("b", "home", Vec2::new(18.0, 1.0)),
            player("o", "away", Vec2::new(-70.0, -55.0)),
        ]);
        let f = compute_pass_features(
            0,
            &pass(Vec2::new(-20.0, 0.0), Vec2::new(18.0, 0.0)),
            &snap,
            &model,
            &equity,
            &PassConfig::default(),
        )
        .unwrap();
        assert_eq!(f.dominance, 1.0);
        assert!(f.influence > 0.0);
    }

    #[test]
    fn off_pitch_reception_is_an_error() {
        let pitch = Pitch::DEFAULT;
        let equity = EquitySurface::placeholder(&pitch, 10.0).unwrap();
        let model = simple_model(4);
        let snap = snapshot(vec![
            player("a", "home", Vec2::ZERO),
            player("o", "away", Vec2::new(0.0, 20.0)),
        ]);
        let r = compute_pass_features(
            0,
            &pass(Vec2::ZERO, Vec2::new(79.0, 60.0)),
            &snap,
            &model,
            &equity,
            &PassConfig::default(),
        );
        assert!(matches!(r, Err(Error::OffPitchReception { .. })));
    }

    #[test]
    fn equity_of_a_pass_and_its_reverse_sum_to_zero() {
        let pitch = Pitch::DEFAULT;
        let equity = EquitySurface::placeholder(&pitch, 4.0).unwrap();
        let a = Vec2::new(-30.0, 10.0);
        let b = Vec2::new(25.0, -15.0);
        let fwd = equity.value_at(b) - equity.value_at(a);
        let rev = equity.value_at(a) - equity.value_at(b);
        assert_eq!(fwd + rev, 0.0);
    }

    #[test]
    fn equity_json_round_trip() {
        let pitch = Pitch::DEFAULT;
        let surface = EquitySurface::placeholder(&pitch, 20.0).unwrap();
        let text = surface.to_json().unwrap();
        let back = EquitySurface::from_json(&text).unwrap();
        assert_eq!(surface.grid.values, back.grid.values);
        assert_eq!(surface.grid.spec, back.grid.spec);
    }
}
