//! d-dimensional Gaussian kernel density estimation and the commitment
//! probability model built from a committed/ignored density pair.
//!
//! Evaluation is exact: every accelerated path (partial evaluation over
//! grids) is gated by an oracle-equivalence test against the plain kernel
//! sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{EvalMode, FieldGrid, GridSpec};
use crate::ingest::CommitmentSample;

/// Default denominator floor below which no commitment forecast is made.
pub const EPSILON_FLOOR: f64 = 1e-12;

const SQRT_TAU: f64 = 2.5066282746310002; // sqrt(2 pi)

/// Per-dimension kernel width selection.
#[derive(Debug, Clone, PartialEq)]
pub enum BandwidthRule {
    /// h_j = sigma_j * n^(-1/(dim+4)) * scale, per dimension.
    Scott,
    /// Caller-supplied widths, one per dimension.
    Manual(Vec<f64>),
}

impl BandwidthRule {
    fn name(&self) -> &'static str {
        match self {
            BandwidthRule::Scott => "scott",
            BandwidthRule::Manual(_) => "manual",
        }
    }
}

/// A fitted product-kernel Gaussian KDE with diagonal bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    dim: usize,
    n: usize,
    /// Flattened row-major samples, n * dim entries.
    data: Vec<f64>,
    bandwidths: Vec<f64>,
    bandwidth_rule: String,
    bandwidth_scale: f64,
    // Derived at construction.
    inv_two_h2: Vec<f64>,
    norm: f64,
}

impl KdeModel {
    /// Fit a KDE on `data` (flattened row-major, `data.len() % dim == 0`).
    pub fn fit(dim: usize, data: Vec<f64>, rule: BandwidthRule, scale: f64) -> Result<KdeModel> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim.max(1),
                got: data.len(),
            });
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidBandwidth(format!(
                "bandwidth scale must be positive, got {scale}"
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteData);
        }
        let n = data.len() / dim;
        let bandwidths = match &rule {
            BandwidthRule::Scott => {
                if n < 2 {
                    return Err(Error::InsufficientData(format!(
                        "Scott's rule needs at least 2 samples, got {n}"
                    )));
                }
                let factor = (n as f64).powf(-1.0 / (dim as f64 + 4.0));
                (0..dim)
                    .map(|j| {
                        let mean = data.iter().skip(j).step_by(dim).sum::<f64>() / n as f64;
                        let ss: f64 = data
                            .iter()
                            .skip(j)
                            .step_by(dim)
                            .map(|v| (v - mean) * (v - mean))
                            .sum();
                        let sd = (ss / (n as f64 - 1.0)).sqrt();
                        if sd == 0.0 {
                            Err(Error::DegenerateDimension { dim: j })
                        } else {
                            Ok(sd * factor * scale)
                        }
                    })
                    .collect::<Result<Vec<f64>>>()?
            }
            BandwidthRule::Manual(h) => {
                if n == 0 {
                    return Err(Error::InsufficientData("KDE needs at least 1 sample".into()));
                }
                if h.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: h.len(),
                    });
                }
                if h.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::InvalidBandwidth(
                        "manual bandwidths must all be positive".into(),
                    ));
                }
                h.clone()
            }
        };
        Ok(KdeModel::from_parts(
            dim,
            data,
            bandwidths,
            rule.name().to_string(),
            scale,
        ))
    }

    fn from_parts(
        dim: usize,
        data: Vec<f64>,
        bandwidths: Vec<f64>,
        bandwidth_rule: String,
        bandwidth_scale: f64,
    ) -> KdeModel {
        let n = data.len() / dim;
        let inv_two_h2 = bandwidths.iter().map(|h| 1.0 / (2.0 * h * h)).collect();
        let norm = bandwidths.iter().map(|h| 1.0 / (h * SQRT_TAU)).product();
        KdeModel {
            dim,
            n,
            data,
            bandwidths,
            bandwidth_rule,
            bandwidth_scale,
            inv_two_h2,
            norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sample_count(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Mixture density at `point`: (1/n) sum_i prod_j phi_{h_j}(p_j - s_ij).
    pub fn density(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.dim, "query dimension mismatch");
        let mut acc = 0.0;
        for row in self.data.chunks_exact(self.dim) {
            let mut e = 0.0;
            for j in 0..self.dim {
                let d = point[j] - row[j];
                e += d * d * self.inv_two_h2[j];
            }
            acc += (-e).exp();
        }
        acc * self.norm / self.n as f64
    }

    /// Pre-evaluate the kernel factors of the dimensions in `fixed`,
    /// leaving the remaining dimensions free (in ascending index order).
    /// Cuts repeated work when sweeping a grid with some coordinates held
    /// constant; results match [`KdeModel::density`] to rounding.
    pub fn partial(&self, fixed: &[(usize, f64)]) -> KdePartial<'_> {
        let mut is_fixed = vec![false; self.dim];
        for &(j, _) in fixed {
            assert!(j < self.dim && !is_fixed[j], "bad fixed dimension {j}");
            is_fixed[j] = true;
        }
        let free: Vec<usize> = (0..self.dim).filter(|j| !is_fixed[*j]).collect();
        let factors = self
            .data
            .chunks_exact(self.dim)
            .map(|row| {
                let mut e = 0.0;
                for &(j, v) in fixed {
                    let d = v - row[j];
                    e += d * d * self.inv_two_h2[j];
                }
                (-e).exp()
            })
            .collect();
        KdePartial {
            model: self,
            free,
            factors,
        }
    }
}

/// A [`KdeModel`] with some dimensions pinned; see [`KdeModel::partial`].
pub struct KdePartial<'a> {
    model: &'a KdeModel,
    free: Vec<usize>,
    factors: Vec<f64>,
}

impl KdePartial<'_> {
    /// Density with the free dimensions set to `free_values` (ordered by
    /// ascending dimension index).
    pub fn density(&self, free_values: &[f64]) -> f64 {
        assert_eq!(free_values.len(), self.free.len(), "free value count mismatch");
        let mut acc = 0.0;
        for (row, factor) in self
            .model
            .data
            .chunks_exact(self.model.dim)
            .zip(&self.factors)
        {
            let mut e = 0.0;
            for (v, &j) in free_values.iter().zip(&self.free) {
                let d = v - row[j];
                e += d * d * self.model.inv_two_h2[j];
            }
            acc += factor * (-e).exp();
        }
        acc * self.model.norm / self.model.n as f64
    }
}

/// Combine a committed/ignored density pair into a commitment probability.
/// Returns 0 when the weighted denominator falls below `floor` (no observed
/// behavior of either kind near the query).
pub fn combine_densities(w: f64, f1: f64, f0: f64, floor: f64) -> f64 {
    let num = w * f1;
    let den = num + (1.0 - w) * f0;
    if den < floor {
        0.0
    } else {
        num / den
    }
}

/// The fitted pair (f_C=1, f_C=0) plus the event-frequency weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitmentModel {
    pub f1: KdeModel,
    pub f0: KdeModel,
    pub w: f64,
    pub epsilon_floor: f64,
}

impl CommitmentModel {
    /// Partition `samples` along the commitment label and fit one 4D KDE on
    /// each side; `w` is the committed fraction.
    pub fn fit(
        samples: &[CommitmentSample],
        rule: BandwidthRule,
        scale: f64,
    ) -> Result<CommitmentModel> {
        let mut data1 = Vec::new();
        let mut data0 = Vec::new();
        for s in samples {
            let side = if s.committed { &mut data1 } else { &mut data0 };
            side.extend_from_slice(&[s.x, s.y, s.v, s.t]);
        }
        if data1.is_empty() || data0.is_empty() {
            return Err(Error::OneSidedData);
        }
        let f1 = KdeModel::fit(4, data1, rule.clone(), scale)?;
        let f0 = KdeModel::fit(4, data0, rule, scale)?;
        let w = f1.n as f64 / (f1.n + f0.n) as f64;
        Ok(CommitmentModel {
            f1,
            f0,
            w,
            epsilon_floor: EPSILON_FLOOR,
        })
    }

    pub fn with_epsilon_floor(mut self, floor: f64) -> Self {
        self.epsilon_floor = floor;
        self
    }

    /// Commitment probability at a relative state (x, y, v, t).
    pub fn probability(&self, point: &[f64; 4]) -> f64 {
        combine_densities(
            self.w,
            self.f1.density(point),
            self.f0.density(point),
            self.epsilon_floor,
        )
    }

    /// Pin the (v, t) dimensions for repeated (x, y) queries.
    pub fn partial_vt(&self, v: f64, t: f64) -> CommitmentPartial<'_> {
        CommitmentPartial {
            p1: self.f1.partial(&[(2, v), (3, t)]),
            p0: self.f0.partial(&[(2, v), (3, t)]),
            w: self.w,
            floor: self.epsilon_floor,
        }
    }

    /// Pin only the speed dimension (used for influence grids where the
    /// time-to-point varies per cell).
    pub fn partial_v(&self, v: f64) -> CommitmentPartial<'_> {
        CommitmentPartial {
            p1: self.f1.partial(&[(2, v)]),
            p0: self.f0.partial(&[(2, v)]),
            w: self.w,
            floor: self.epsilon_floor,
        }
    }

    /// Probability slice over (x, y) at fixed (v, t); one cell per grid
    /// point of `window`.
    pub fn slice_grid(&self, v: f64, t: f64, window: &SliceWindow, mode: EvalMode) -> Result<FieldGrid> {
        let spec = window.spec()?;
        let partial = self.partial_vt(v, t);
        Ok(FieldGrid::from_fn(spec, mode, |_| true, |p| {
            partial.probability(&[p.x, p.y])
        }))
    }
}

/// Commitment probability evaluator with pinned dimensions.
pub struct CommitmentPartial<'a> {
    p1: KdePartial<'a>,
    p0: KdePartial<'a>,
    w: f64,
    floor: f64,
}

impl CommitmentPartial<'_> {
    pub fn probability(&self, free_values: &[f64]) -> f64 {
        combine_densities(
            self.w,
            self.p1.density(free_values),
            self.p0.density(free_values),
            self.floor,
        )
    }
}

/// Extents and resolution of a movement-frame (x, y) window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub cell_size: f64,
}

impl SliceWindow {
    /// Symmetric window, `half` meters each way.
    pub fn symmetric(half: f64, cell_size: f64) -> SliceWindow {
        SliceWindow {
            x_min: -half,
            x_max: half,
            y_min: -half,
            y_max: half,
            cell_size,
        }
    }

    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::covering(self.x_min, self.x_max, self.y_min, self.y_max, self.cell_size)
    }
}

/// Fit the displacement-baseline density: a 3D KDE over (x, y, v). The
/// samples all share one time horizon (their t column is constant by
/// construction), so time is carried as metadata rather than as a
/// degenerate kernel dimension.
pub fn fit_displacement_model(
    samples: &[CommitmentSample],
    rule: BandwidthRule,
    scale: f64,
) -> Result<KdeModel> {
    let mut data = Vec::with_capacity(samples.len() * 3);
    for s in samples {
        data.extend_from_slice(&[s.x, s.y, s.v]);
    }
    KdeModel::fit(3, data, rule, scale)
}

/// Density slice of a displacement model over (x, y) at fixed speed `v`
/// (the time horizon is fixed at fit time).
pub fn density_slice_grid(
    model: &KdeModel,
    v: f64,
    window: &SliceWindow,
    mode: EvalMode,
) -> Result<FieldGrid> {
    if model.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: model.dim(),
        });
    }
    let spec = window.spec()?;
    let partial = model.partial(&[(2, v)]);
    Ok(FieldGrid::from_fn(spec, mode, |_| true, |p| {
        partial.density(&[p.x, p.y])
    }))
}

// --- serialization -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PairBandwidths {
    c1: Vec<f64>,
    c0: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CommitmentMetadata {
    count_c1: usize,
    count_c0: usize,
    bandwidth_rule: String,
    bandwidth_scale: f64,
}

/// On-disk form of a [`CommitmentModel`].
#[derive(Serialize, Deserialize)]
pub struct CommitmentModelDoc {
    dim: usize,
    bandwidths: PairBandwidths,
    w: f64,
    samples_c1: Vec<Vec<f64>>,
    samples_c0: Vec<Vec<f64>>,
    epsilon_floor: f64,
    metadata: CommitmentMetadata,
}

impl CommitmentModel {
    pub fn to_json(&self) -> Result<String> {
        let doc = CommitmentModelDoc {
            dim: self.f1.dim,
            bandwidths: PairBandwidths {
                c1: self.f1.bandwidths.clone(),
                c0: self.f0.bandwidths.clone(),
            },
            w: self.w,
            samples_c1: self.f1.samples().map(|r| r.to_vec()).collect(),
            samples_c0: self.f0.samples().map(|r| r.to_vec()).collect(),
            epsilon_floor: self.epsilon_floor,
            metadata: CommitmentMetadata {
                count_c1: self.f1.n,
                count_c0: self.f0.n,
                bandwidth_rule: self.f1.bandwidth_rule.clone(),
                bandwidth_scale: self.f1.bandwidth_scale,
            },
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<CommitmentModel> {
        let doc: CommitmentModelDoc = serde_json::from_str(text)?;
        let flatten = |rows: &[Vec<f64>]| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(rows.len() * doc.dim);
            for r in rows {
                if r.len() != doc.dim {
                    return Err(Error::DimensionMismatch {
                        expected: doc.dim,
                        got: r.len(),
                    });
                }
                out.extend_from_slice(r);
            }
            Ok(out)
        };
        let f1 = KdeModel::from_parts(
            doc.dim,
            flatten(&doc.samples_c1)?,
            doc.bandwidths.c1.clone(),
            doc.metadata.bandwidth_rule.clone(),
            doc.metadata.bandwidth_scale,
        );
        let f0 = KdeModel::from_parts(
            doc.dim,
            flatten(&doc.samples_c0)?,
            doc.bandwidths.c0,
            doc.metadata.bandwidth_rule,
            doc.metadata.bandwidth_scale,
        );
        if f1.n == 0 || f0.n == 0 {
            return Err(Error::OneSidedData);
        }
        if f1.bandwidths.iter().chain(&f0.bandwidths).any(|h| !(*h > 0.0)) {
            return Err(Error::InvalidBandwidth("serialized bandwidths must be positive".into()));
        }
        Ok(CommitmentModel {
            f1,
            f0,
            w: doc.w,
            epsilon_floor: doc.epsilon_floor,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DisplacementMetadata {
    count: usize,
    bandwidth_rule: String,
    bandwidth_scale: f64,
    horizon: f64,
}

/// On-disk form of a displacement-baseline KDE.
#[derive(Serialize, Deserialize)]
pub struct DisplacementModelDoc {
    dim: usize,
    bandwidths: Vec<f64>,
    samples: Vec<Vec<f64>>,
    metadata: DisplacementMetadata,
}

pub fn displacement_to_json(model: &KdeModel, horizon: f64) -> Result<String> {
    let doc = DisplacementModelDoc {
        dim: model.dim,
        bandwidths: model.bandwidths.clone(),
        samples: model.samples().map(|r| r.to_vec()).collect(),
        metadata: DisplacementMetadata {
            count: model.n,
            bandwidth_rule: model.bandwidth_rule.clone(),
            bandwidth_scale: model.bandwidth_scale,
            horizon,
        },
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn displacement_from_json(text: &str) -> Result<KdeModel> {
    let doc: DisplacementModelDoc = serde_json::from_str(text)?;
    let mut data = Vec::with_capacity(doc.samples.len() * doc.dim);
    for r in &doc.samples {
        if r.len() != doc.dim {
            return Err(Error::DimensionMismatch {
                expected: doc.dim,
                got: r.len(),
            });
        }
        data.extend_from_slice(r);
    }
    if doc.bandwidths.len() != doc.dim || doc.bandwidths.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidBandwidth("serialized bandwidths must be positive".into()));
    }
    Ok(KdeModel::from_parts(
        doc.dim,
        data,
        doc.bandwidths,
        doc.metadata.bandwidth_rule,
        doc.metadata.bandwidth_scale,
    ))
}
