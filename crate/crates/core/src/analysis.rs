//! Deposition-pattern metrics: peaks and widths, velocity broadening and
//! periodicity.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;
use statrs::function::erf::erf;

use crate::dynamics::DepositionHistogram;
use crate::error::{Error, Result};

/// Default peak threshold as a fraction of (max − background).
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.5;
/// Autocorrelation level separating periodic from aperiodic.
pub const PERIODIC_SCORE: f64 = 0.8;
/// Kernel half-extent in standard deviations.
const KERNEL_SIGMAS: f64 = 8.0;

/// Real-valued samples on uniform bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedSeries {
    pub bin_width: f64,
    /// Left edge of the first bin (m).
    pub origin: f64,
    pub values: Vec<f64>,
}

impl BinnedSeries {
    pub fn centers(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|i| self.origin + (i as f64 + 0.5) * self.bin_width)
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        BinnedSeries {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

impl From<&DepositionHistogram> for BinnedSeries {
    fn from(h: &DepositionHistogram) -> Self {
        BinnedSeries {
            bin_width: h.bin_width,
            origin: h.origin,
            values: h.counts.iter().map(|&c| c as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakRecord {
    /// Center of the tallest bin (m).
    pub position: f64,
    pub height: f64,
    /// Full width at half height above background (m).
    pub fwhm: f64,
    pub background: f64,
    /// height / background; infinite on an empty floor.
    pub contrast: f64,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Peaks standing above `background + threshold_fraction·(max − background)`.
///
/// The background is the median bin. Each run of above-threshold bins yields
/// one peak at its tallest bin; the width is interpolated between bin centers
/// where the series crosses half the height above background, and never drops
/// below one bin.
pub fn peak_metrics(series: &BinnedSeries, threshold_fraction: f64) -> Result<Vec<PeakRecord>> {
    if series.values.is_empty() {
        return Err(Error::Empty("histogram has no bins"));
    }
    if !(0.0..=1.0).contains(&threshold_fraction) {
        return Err(Error::invalid("threshold_fraction", "must lie in [0, 1]"));
    }
    let v = &series.values;
    let background = median(v);
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= background {
        return Ok(Vec::new());
    }
    let threshold = background + threshold_fraction * (max - background);
    let centers = series.centers();

    let mut peaks = Vec::new();
    let mut i = 0;
    while i < v.len() {
        if v[i] <= threshold {
            i += 1;
            continue;
        }
        let start = i;
        while i < v.len() && v[i] > threshold {
            i += 1;
        }
        let top = (start..i).fold(start, |best, k| if v[k] > v[best] { k } else { best });
        let height = v[top];
        let half = background + 0.5 * (height - background);

        let mut l = top;
        while l > 0 && v[l - 1] >= half {
            l -= 1;
        }
        let left = if l == 0 {
            centers[0]
        } else {
            let (x0, y0, x1, y1) = (centers[l - 1], v[l - 1], centers[l], v[l]);
            x0 + (half - y0) / (y1 - y0) * (x1 - x0)
        };
        let mut r = top;
        while r + 1 < v.len() && v[r + 1] >= half {
            r += 1;
        }
        let right = if r + 1 == v.len() {
            centers[r]
        } else {
            let (x0, y0, x1, y1) = (centers[r], v[r], centers[r + 1], v[r + 1]);
            x0 + (y0 - half) / (y0 - y1) * (x1 - x0)
        };
        let fwhm = (right - left).max(series.bin_width);
        peaks.push(PeakRecord {
            position: centers[top],
            height,
            fwhm,
            background,
            contrast: if background > 0.0 { height / background } else { f64::INFINITY },
        });
    }
    Ok(peaks)
}

/// Narrowest and tallest peaks, if any.
pub fn narrowest(peaks: &[PeakRecord]) -> Option<&PeakRecord> {
    peaks.iter().min_by(|a, b| a.fwhm.total_cmp(&b.fwhm))
}

pub fn tallest(peaks: &[PeakRecord]) -> Option<&PeakRecord> {
    peaks.iter().max_by(|a, b| a.height.total_cmp(&b.height))
}

/// Convolve with a Gaussian of standard deviation `t_int·sigma_v`, the spread
/// of free drift x → x + v·t. Bin weights integrate the Gaussian exactly over
/// each bin; the output grows by the kernel half-width on both sides so mass is
/// conserved.
pub fn broaden_histogram(series: &BinnedSeries, sigma_v: f64, t_int: f64) -> Result<BinnedSeries> {
    if !(sigma_v >= 0.0 && sigma_v.is_finite()) {
        return Err(Error::invalid("sigma_v", "must be finite and >= 0"));
    }
    if !(t_int >= 0.0 && t_int.is_finite()) {
        return Err(Error::invalid("t_int", "must be finite and >= 0"));
    }
    let sigma = sigma_v * t_int;
    if sigma == 0.0 {
        return Ok(series.clone());
    }
    let bw = series.bin_width;
    let half = (KERNEL_SIGMAS * sigma / bw).ceil() as usize;
    let scale = std::f64::consts::SQRT_2 * sigma;
    let cdf = |x: f64| 0.5 * (1.0 + erf(x / scale));
    let mut kernel: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let k = i as f64 - half as f64;
            cdf((k + 0.5) * bw) - cdf((k - 0.5) * bw)
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= norm);

    let n = series.values.len();
    let mut out = vec![0.0; n + 2 * half];
    for (i, &v) in series.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for (k, w) in kernel.iter().enumerate() {
            out[i + k] += v * w;
        }
    }
    Ok(BinnedSeries {
        bin_width: bw,
        origin: series.origin - half as f64 * bw,
        values: out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicityReport {
    /// Repeat distance of the signal (m); `None` when aperiodic at score 0.8.
    pub dominant_period: Option<f64>,
    /// Repeat distance of the envelope (m).
    pub beat_length: Option<f64>,
    /// Highest normalized autocorrelation past the central lobe, in [0, 1].
    pub periodicity_score: f64,
}

/// Unbiased, normalized autocorrelation r(k) for k < n/2.
fn autocorrelation(signal: &[f64]) -> Option<Vec<f64>> {
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = signal.iter().map(|v| v - mean).collect();
    let var = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let peak = centered.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if var <= 0.0 || var.sqrt() <= 1e-12 * peak.max(mean.abs()) {
        return None;
    }
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = centered
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    buf.iter_mut().for_each(|z| *z = Complex::new(z.norm_sqr(), 0.0));
    planner.plan_fft_inverse(size).process(&mut buf);
    let lags = n / 2;
    Some(
        (0..lags)
            .map(|k| (buf[k].re / size as f64) / (n - k) as f64 / var)
            .collect(),
    )
}

struct Lag {
    lag: f64,
}

/// Local maxima past the central lobe, the best score and the smallest lag
/// whose score is within 0.05 of it (and at least `floor`).
fn dominant_lag(r: &[f64], floor: f64) -> (Option<Lag>, f64, Option<usize>) {
    // End of the central lobe: first zero crossing.
    let Some(first_dip) = (1..r.len()).find(|&k| r[k] <= 0.0) else {
        return (None, 0.0, None);
    };
    let maxima: Vec<usize> = (first_dip.max(1)..r.len().saturating_sub(1))
        .filter(|&k| r[k] > r[k - 1] && r[k] >= r[k + 1])
        .collect();
    let score = maxima.iter().map(|&k| r[k]).fold(0.0f64, f64::max).clamp(0.0, 1.0);
    let first_max = maxima.first().copied();
    let pick = maxima
        .iter()
        .copied()
        .find(|&k| r[k] >= floor.max(score - 0.05))
        .map(|k| {
            let (a, b, c) = (r[k - 1], r[k], r[k + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            Lag {
                lag: k as f64 + shift.clamp(-0.5, 0.5),
            }
        });
    (pick, score, first_max)
}

/// Periodicity of a uniformly sampled signal.
///
/// `candidate_scale` (m), when given, must fit at least four times in the
/// window. The envelope is a moving average over the fast period; its own
/// autocorrelation gives the beat length.
pub fn periodicity_report(
    signal: &[f64],
    spacing: f64,
    candidate_scale: Option<f64>,
) -> Result<PeriodicityReport> {
    if !(spacing > 0.0) {
        return Err(Error::invalid("spacing", "must be positive"));
    }
    if signal.len() < 8 {
        return Err(Error::Empty("signal needs at least 8 samples"));
    }
    let span = spacing * (signal.len() - 1) as f64;
    if let Some(scale) = candidate_scale {
        if span < 4.0 * scale {
            return Err(Error::WindowTooShort {
                span,
                required: 4.0 * scale,
            });
        }
    }
    let none = PeriodicityReport {
        dominant_period: None,
        beat_length: None,
        periodicity_score: 0.0,
    };
    let Some(r) = autocorrelation(signal) else {
        return Ok(none);
    };
    let (pick, score, first_max) = dominant_lag(&r, PERIODIC_SCORE);
    let dominant_period = pick.as_ref().map(|p| p.lag * spacing);

    let fast = pick.map(|p| p.lag.round() as usize).or(first_max);
    let beat_length = fast.and_then(|w| {
        let w = w.max(1);
        if signal.len() < 4 * w {
            return None;
        }
        let envelope: Vec<f64> = signal.windows(w).map(|s| s.iter().sum::<f64>() / w as f64).collect();
        let re = autocorrelation(&envelope)?;
        let (p, _, _) = dominant_lag(&re, PERIODIC_SCORE);
        p.map(|p| p.lag * spacing)
    });
    Ok(PeriodicityReport {
        dominant_period,
        beat_length,
        periodicity_score: score,
    })
}
