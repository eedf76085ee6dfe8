//! Initial data, pattern classification and pattern comparisons.
//!
//! A terminal field is thresholded at zero with a dead band: vertices with
//! `u > dead_band` are the positive phase, `u < −dead_band` the negative
//! phase, and the rest are interface. Connected components of each phase
//! are found by flood fill over mesh edges.
//!
//! Labels, with the minority phase being the one covering less area:
//!
//! | minority area fraction | other conditions                        | label            |
//! |------------------------|-----------------------------------------|------------------|
//! | < 2 %                  |                                         | `uniform`        |
//! | ≥ 35 %                 |                                         | `stripes`        |
//! | 2 % – 35 %             | elongation above threshold              | `stripes`        |
//! | 2 % – 35 %             | ≥ 3 components, minority negative       | `spots`          |
//! | 2 % – 35 %             | ≥ 3 components, minority positive       | `inverted_spots` |
//! | otherwise              |                                         | `indeterminate`  |
//!
//! `spots` are islands of the negative phase in a positive background, the
//! state reached for `b < 0` where the positive well is the deeper one;
//! `inverted_spots` are the mirror image, reached for `b > 0`.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::mesh::{norm, sub, TriangleMesh};
use crate::solver::{Discretization, PhaseField};

pub const DEFAULT_DEAD_BAND: f64 = 0.1;
pub const DEFAULT_AMPLITUDE: f64 = 0.5;
pub const DEFAULT_DILATION_HOPS: usize = 3;
/// Minority fraction below which a field counts as a single phase.
pub const UNIFORM_FRACTION: f64 = 0.02;
/// Minority fraction at or above which the phases count as balanced.
pub const BALANCED_FRACTION: f64 = 0.35;
pub const MIN_SPOT_COMPONENTS: usize = 3;
/// Area-weighted mean of `boundary² / area` above which minority components
/// count as bands. A disc scores `4π ≈ 12.6`.
pub const ELONGATION_THRESHOLD: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("amplitude must be positive, got {0}")]
    InvalidAmplitude(f64),
    #[error("radius must be at least 1 hop")]
    InvalidRadius,
    #[error("center vertex {center} out of range (mesh has {count} vertices)")]
    InvalidCenter { center: usize, count: usize },
    #[error("field has {actual} values but the mesh has {expected} vertices")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("support region is empty or out of range")]
    InvalidRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternClass {
    Spots,
    InvertedSpots,
    Stripes,
    Uniform,
    Indeterminate,
}

impl PatternClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Spots => "spots",
            Self::InvertedSpots => "inverted_spots",
            Self::Stripes => "stripes",
            Self::Uniform => "uniform",
            Self::Indeterminate => "indeterminate",
        }
    }

    /// The label of the negated field.
    pub fn mirrored(self) -> Self {
        match self {
            Self::Spots => Self::InvertedSpots,
            Self::InvertedSpots => Self::Spots,
            other => other,
        }
    }
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Positive,
    Negative,
}

/// Component statistics for one phase.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PhaseStats {
    /// Share of the non-interface area.
    pub fraction: f64,
    pub component_count: usize,
    /// Per component, largest first.
    pub component_areas: Vec<f64>,
    /// Per component, in the order of `component_areas`.
    pub boundary_lengths: Vec<f64>,
    /// Area-weighted mean of `boundary² / area` over components.
    pub elongation: f64,
}

impl PhaseStats {
    pub fn mean_component_area(&self) -> f64 {
        if self.component_count == 0 {
            0.0
        } else {
            self.component_areas.iter().sum::<f64>() / self.component_count as f64
        }
    }

    pub fn max_component_area(&self) -> f64 {
        self.component_areas.first().copied().unwrap_or(0.0)
    }

    pub fn mean_boundary_length(&self) -> f64 {
        if self.component_count == 0 {
            0.0
        } else {
            self.boundary_lengths.iter().sum::<f64>() / self.component_count as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternReport {
    pub class: PatternClass,
    pub dead_band: f64,
    pub positive: PhaseStats,
    pub negative: PhaseStats,
    /// Share of the total area inside the dead band.
    pub interface_fraction: f64,
    pub minority: Option<Phase>,
    pub minority_fraction: f64,
    pub minority_components: usize,
    pub elongation: f64,
}

impl PatternReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for PatternReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let minority = match self.minority {
            Some(Phase::Positive) => "positive",
            Some(Phase::Negative) => "negative",
            None => "none",
        };
        writeln!(f, "class = {}", self.class)?;
        writeln!(f, "dead_band = {}", self.dead_band)?;
        writeln!(f, "positive_fraction = {:.6}", self.positive.fraction)?;
        writeln!(f, "negative_fraction = {:.6}", self.negative.fraction)?;
        writeln!(f, "interface_fraction = {:.6}", self.interface_fraction)?;
        writeln!(f, "minority_phase = {minority}")?;
        writeln!(f, "minority_fraction = {:.6}", self.minority_fraction)?;
        writeln!(f, "minority_components = {}", self.minority_components)?;
        writeln!(f, "elongation = {:.6}", self.elongation)?;
        for (name, s) in [("positive", &self.positive), ("negative", &self.negative)] {
            writeln!(f, "{name}_components = {}", s.component_count)?;
            writeln!(f, "{name}_mean_component_area = {:.6}", s.mean_component_area())?;
            writeln!(f, "{name}_max_component_area = {:.6}", s.max_component_area())?;
            writeln!(f, "{name}_mean_boundary_length = {:.6}", s.mean_boundary_length())?;
            writeln!(f, "{name}_elongation = {:.6}", s.elongation)?;
        }
        Ok(())
    }
}

/// Vertex set carrying compactly supported initial data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportRegion {
    pub center: usize,
    pub radius_hops: usize,
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
}

/// Independent uniform samples in `[−amplitude, amplitude]`.
pub fn random_init(vertex_count: usize, seed: u64, amplitude: f64) -> Result<PhaseField, PatternError> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(PatternError::InvalidAmplitude(amplitude));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(PhaseField::new(
        (0..vertex_count)
            .map(|_| rng.random_range(-amplitude..=amplitude))
            .collect(),
    ))
}

/// Random values on the `radius_hops` ball around `center` and exactly
/// `background` elsewhere. Samples are drawn in vertex order, so a ball
/// covering the mesh reproduces [`random_init`] for the same seed.
pub fn localized_init(
    mesh: &TriangleMesh,
    seed: u64,
    center: usize,
    radius_hops: usize,
    amplitude: f64,
    background: f64,
) -> Result<(PhaseField, SupportRegion), PatternError> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(PatternError::InvalidAmplitude(amplitude));
    }
    if radius_hops < 1 {
        return Err(PatternError::InvalidRadius);
    }
    if center >= mesh.vertex_count() {
        return Err(PatternError::InvalidCenter {
            center,
            count: mesh.vertex_count(),
        });
    }
    let vertices = mesh.hop_ball(center, radius_hops);
    let mut values = vec![background; mesh.vertex_count()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &v in &vertices {
        values[v] = rng.random_range(-amplitude..=amplitude);
    }
    Ok((
        PhaseField::new(values),
        SupportRegion {
            center,
            radius_hops,
            vertices,
        },
    ))
}

/// Labels each vertex with its component id within `member`, or `None`.
pub fn connected_components(mesh: &TriangleMesh, member: &[bool]) -> (Vec<Option<usize>>, usize) {
    let mut label = vec![None; mesh.vertex_count()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..mesh.vertex_count() {
        if !member[start] || label[start].is_some() {
            continue;
        }
        label[start] = Some(count);
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in mesh.neighbors(v) {
                if member[w] && label[w].is_none() {
                    label[w] = Some(count);
                    queue.push_back(w);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

fn midpoint(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
}

/// Statistics for the vertices where `member` holds.
///
/// The boundary of a component is traced through edge midpoints: every face
/// with some but not all corners in the component contributes the segment
/// between the midpoints of its two edges that leave the component.
fn phase_stats(disc: &Discretization, member: &[bool], phase_area_total: f64) -> PhaseStats {
    let mesh = &disc.mesh;
    let mass = disc.operator.mass();
    let (label, count) = connected_components(mesh, member);
    let mut areas = vec![0.0; count];
    for (v, l) in label.iter().enumerate() {
        if let Some(c) = l {
            areas[*c] += mass[v];
        }
    }
    let mut lengths = vec![0.0; count];
    let p = mesh.vertices();
    for tri in mesh.faces() {
        for c in tri
            .iter()
            .filter_map(|&v| label[v])
            .collect::<std::collections::BTreeSet<_>>()
        {
            let inside: Vec<bool> = tri.iter().map(|&v| label[v] == Some(c)).collect();
            let n_in = inside.iter().filter(|&&x| x).count();
            if n_in == 3 {
                continue;
            }
            // the corner that differs from the other two
            let odd = (0..3)
                .find(|&k| inside[k] != inside[(k + 1) % 3] && inside[k] != inside[(k + 2) % 3])
                .expect("mixed face has an odd corner");
            let a = p[tri[odd]];
            let m1 = midpoint(&a, &p[tri[(odd + 1) % 3]]);
            let m2 = midpoint(&a, &p[tri[(odd + 2) % 3]]);
            lengths[c] += norm(sub(&m1, &m2));
        }
    }
    let mut comps: Vec<(f64, f64)> = areas.into_iter().zip(lengths).collect();
    comps.sort_by(|x, y| y.0.total_cmp(&x.0));
    let total = comps.iter().fold(0.0, |s, c| s + c.0);
    let elongation = if total > 0.0 {
        comps.iter().map(|(a, l)| a * (l * l / a)).sum::<f64>() / total
    } else {
        0.0
    };
    PhaseStats {
        fraction: if phase_area_total > 0.0 {
            total / phase_area_total
        } else {
            0.0
        },
        component_count: count,
        component_areas: comps.iter().map(|c| c.0).collect(),
        boundary_lengths: comps.iter().map(|c| c.1).collect(),
        elongation,
    }
}

/// Thresholds, segments and labels a field.
pub fn classify(disc: &Discretization, u: &[f64], dead_band: f64) -> Result<PatternReport, PatternError> {
    let n = disc.vertex_count();
    if u.len() != n {
        return Err(PatternError::DimensionMismatch {
            expected: n,
            actual: u.len(),
        });
    }
    let mass = disc.operator.mass();
    let pos: Vec<bool> = u.iter().map(|&x| x > dead_band).collect();
    let neg: Vec<bool> = u.iter().map(|&x| x < -dead_band).collect();
    let area_of = |m: &[bool]| -> f64 { (0..n).filter(|&i| m[i]).map(|i| mass[i]).sum() };
    let phase_area = area_of(&pos) + area_of(&neg);
    let total = disc.area();
    let positive = phase_stats(disc, &pos, phase_area);
    let negative = phase_stats(disc, &neg, phase_area);

    let minority = if phase_area <= 0.0 {
        None
    } else if positive.fraction < negative.fraction {
        Some(Phase::Positive)
    } else if negative.fraction < positive.fraction {
        Some(Phase::Negative)
    } else {
        // exact tie: report the phase with more components
        Some(if positive.component_count >= negative.component_count {
            Phase::Positive
        } else {
            Phase::Negative
        })
    };
    let minority_stats = match minority {
        Some(Phase::Positive) => Some(&positive),
        Some(Phase::Negative) => Some(&negative),
        None => None,
    };
    let (minority_fraction, minority_components, elongation) = minority_stats
        .map(|s| (s.fraction, s.component_count, s.elongation))
        .unwrap_or((0.0, 0, 0.0));

    let class = match minority {
        None => PatternClass::Indeterminate,
        Some(_) if minority_fraction < UNIFORM_FRACTION => PatternClass::Uniform,
        Some(_) if minority_fraction >= BALANCED_FRACTION => PatternClass::Stripes,
        Some(_) if elongation > ELONGATION_THRESHOLD => PatternClass::Stripes,
        Some(phase) if minority_components >= MIN_SPOT_COMPONENTS => match phase {
            Phase::Negative => PatternClass::Spots,
            Phase::Positive => PatternClass::InvertedSpots,
        },
        Some(_) => PatternClass::Indeterminate,
    };

    Ok(PatternReport {
        class,
        dead_band,
        interface_fraction: if total > 0.0 {
            (total - phase_area).max(0.0) / total
        } else {
            0.0
        },
        positive,
        negative,
        minority,
        minority_fraction,
        minority_components,
        elongation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalityScore {
    /// Area-weighted variance on the dilated support.
    pub inside_variance: f64,
    /// `None` when the dilated support covers the whole mesh.
    pub outside_variance: Option<f64>,
}

impl LocalityScore {
    /// `outside < ratio · inside`; false when there is no outside.
    pub fn is_local(&self, ratio: f64) -> bool {
        self.outside_variance
            .is_some_and(|out| out < ratio * self.inside_variance)
    }
}

fn weighted_variance(values: impl Iterator<Item = (f64, f64)> + Clone) -> Option<f64> {
    let (w, s) = values.clone().fold((0.0, 0.0), |(w, s), (a, x)| (w + a, s + a * x));
    if w <= 0.0 {
        return None;
    }
    let mean = s / w;
    Some(values.map(|(a, x)| a * (x - mean) * (x - mean)).sum::<f64>() / w)
}

/// Variances of `u` inside the support grown by `dilation_hops` and on the
/// rest of the mesh.
pub fn locality_score(
    disc: &Discretization,
    u: &[f64],
    region: &SupportRegion,
    dilation_hops: usize,
) -> Result<LocalityScore, PatternError> {
    let n = disc.vertex_count();
    if u.len() != n {
        return Err(PatternError::DimensionMismatch {
            expected: n,
            actual: u.len(),
        });
    }
    if region.vertices.is_empty() || region.vertices.iter().any(|&v| v >= n) {
        return Err(PatternError::InvalidRegion);
    }
    let grown = disc.mesh.dilate(&region.vertices, dilation_hops);
    let mut inside = vec![false; n];
    for v in grown {
        inside[v] = true;
    }
    let mass = disc.operator.mass();
    let inside = &inside;
    let pick = |want: bool| (0..n).filter(move |&i| inside[i] == want).map(move |i| (mass[i], u[i]));
    Ok(LocalityScore {
        inside_variance: weighted_variance(pick(true)).unwrap_or(0.0),
        outside_variance: weighted_variance(pick(false)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonTolerances {
    /// Absolute difference allowed in each phase fraction.
    pub fraction: f64,
    /// Relative difference allowed in the minority component count.
    pub count: f64,
}

impl Default for ComparisonTolerances {
    fn default() -> Self {
        Self {
            fraction: 0.05,
            count: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternComparison {
    pub matches: bool,
    pub fraction_difference: f64,
    pub count_difference: f64,
    pub same_class: bool,
}

fn relative_count_difference(a: usize, b: usize) -> f64 {
    let hi = a.max(b);
    if hi == 0 {
        0.0
    } else {
        a.abs_diff(b) as f64 / hi as f64
    }
}

/// Compares two reports by phase fractions and by minority component
/// count. The minority phase is taken from `a`.
pub fn compare_pattern_stats(a: &PatternReport, b: &PatternReport, tol: &ComparisonTolerances) -> PatternComparison {
    let fraction_difference = (a.positive.fraction - b.positive.fraction)
        .abs()
        .max((a.negative.fraction - b.negative.fraction).abs());
    let count_difference = match a.minority {
        Some(Phase::Positive) => relative_count_difference(a.positive.component_count, b.positive.component_count),
        Some(Phase::Negative) => relative_count_difference(a.negative.component_count, b.negative.component_count),
        None => relative_count_difference(a.minority_components, b.minority_components),
    };
    PatternComparison {
        matches: fraction_difference < tol.fraction && count_difference < tol.count,
        fraction_difference,
        count_difference,
        same_class: a.class == b.class,
    }
}
