//! Blur detection and dataset filtering by Laplacian variance.
//!
//! Each image is scored by the population variance of its 4-connected
//! Laplacian response over interior pixels. The removal threshold is
//! mean - k * std over the dataset's scores (population statistics,
//! default k = 1); frames scoring strictly below the threshold are
//! dropped. Summation order is fixed so the reported threshold is
//! bit-reproducible.

use crate::error::{CoreError, Result};
use crate::geometry::DatasetManifest;
use crate::img::{GrayImage, ImageRgb};

/// Rec. 601 luma weights used for the RGB-to-gray conversion.
pub const GRAY_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Laplacian variance of one frame, in manifest order.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SharpnessScore {
    pub frame_index: usize,
    pub variance: f64,
}

/// Outcome of one filtering pass over a dataset.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct FilterReport {
    pub mean: f64,
    pub std_dev: f64,
    pub k: f64,
    pub threshold: f64,
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    /// (bin_low, bin_high, count) over [min, max] of the scores.
    pub histogram: Vec<(f64, f64, usize)>,
}

pub const HISTOGRAM_BINS: usize = 20;

/// Converts RGB to luma with the fixed weights above.
pub fn to_gray(rgb: &ImageRgb) -> Result<GrayImage> {
    if rgb.width == 0 || rgb.height == 0 {
        return Err(CoreError::Domain("empty image".into()));
    }
    let values = rgb
        .data
        .iter()
        .map(|p| GRAY_WEIGHTS[0] * p[0] + GRAY_WEIGHTS[1] * p[1] + GRAY_WEIGHTS[2] * p[2])
        .collect();
    Ok(GrayImage {
        width: rgb.width,
        height: rgb.height,
        values,
    })
}

/// Population variance of the 4-connected Laplacian over interior pixels.
/// Border pixels are excluded so no padding policy leaks into the score.
pub fn laplacian_variance(img: &GrayImage) -> Result<f64> {
    if img.width < 3 || img.height < 3 {
        return Err(CoreError::Domain(format!(
            "image {}x{} smaller than the 3x3 Laplacian stencil",
            img.width, img.height
        )));
    }
    let (w, h) = (img.width, img.height);
    let mut responses = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let lap = img.get(x, y - 1) + img.get(x - 1, y) + img.get(x + 1, y)
                + img.get(x, y + 1)
                - 4.0 * img.get(x, y);
            responses.push(lap);
        }
    }
    Ok(population_variance(&responses))
}

fn population_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_variance(values: &[f64]) -> f64 {
    let mean = population_mean(values);
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64
}

/// Scores every frame of the manifest, in manifest order. `image_loader`
/// maps a frame's image_ref to its pixels; loader failures surface as I/O
/// errors naming the frame.
pub fn score_dataset<F>(manifest: &DatasetManifest, mut image_loader: F) -> Result<Vec<SharpnessScore>>
where
    F: FnMut(&str) -> Result<ImageRgb>,
{
    manifest
        .frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let rgb = image_loader(&frame.image_ref).map_err(|e| match e {
                CoreError::Io { path, source } => CoreError::Io {
                    path,
                    source: std::io::Error::new(
                        source.kind(),
                        format!("frame {i} ({}): {source}", frame.image_ref),
                    ),
                },
                other => other,
            })?;
            let variance = laplacian_variance(&to_gray(&rgb)?)?;
            Ok(SharpnessScore {
                frame_index: i,
                variance,
            })
        })
        .collect()
}

/// mean - k * population_std over the scores' variances.
pub fn compute_threshold(scores: &[SharpnessScore], k: f64) -> Result<f64> {
    if scores.len() < 2 {
        return Err(CoreError::InsufficientData(format!(
            "need at least 2 sharpness scores to form a threshold, got {}",
            scores.len()
        )));
    }
    let variances: Vec<f64> = scores.iter().map(|s| s.variance).collect();
    let mean = population_mean(&variances);
    let std_dev = population_variance(&variances).sqrt();
    Ok(mean - k * std_dev)
}

/// Removes frames scoring strictly below mean - k * std, returning the
/// filtered manifest (sharpness populated on kept frames) and the report.
pub fn filter_dataset(
    manifest: &DatasetManifest,
    scores: &[SharpnessScore],
    k: f64,
) -> Result<(DatasetManifest, FilterReport)> {
    if scores.len() != manifest.frames.len() {
        return Err(CoreError::Domain(format!(
            "{} scores for {} frames",
            scores.len(),
            manifest.frames.len()
        )));
    }
    let threshold = compute_threshold(scores, k)?;
    let variances: Vec<f64> = scores.iter().map(|s| s.variance).collect();
    let mean = population_mean(&variances);
    let std_dev = population_variance(&variances).sqrt();

    let mut kept = Vec::new();
    let mut removed = Vec::new();
    let mut frames = Vec::new();
    for (i, frame) in manifest.frames.iter().enumerate() {
        if variances[i] < threshold {
            removed.push(i);
        } else {
            kept.push(i);
            let mut f = frame.clone();
            f.sharpness = Some(variances[i]);
            frames.push(f);
        }
    }
    if frames.is_empty() {
        return Err(CoreError::EmptyFilterResult);
    }

    let report = FilterReport {
        mean,
        std_dev,
        k,
        threshold,
        kept,
        removed,
        histogram: histogram(&variances, HISTOGRAM_BINS),
    };
    let filtered = DatasetManifest {
        intrinsics: manifest.intrinsics,
        frames,
    };
    Ok((filtered, report))
}

/// Equal-width bins over [min, max]; the last bin is closed so every score
/// lands somewhere.
fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = if span == 0.0 {
            0
        } else {
            (((v - lo) / span * bins as f64) as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    (0..bins)
        .map(|i| {
            let w = if span == 0.0 { 0.0 } else { span / bins as f64 };
            (lo + i as f64 * w, lo + (i + 1) as f64 * w, counts[i])
        })
        .collect()
}
