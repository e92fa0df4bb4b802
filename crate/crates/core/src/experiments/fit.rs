//! Exponential envelope fitting of signal traces.

use thiserror::Error;

use super::SignalTrace;

/// Fewest samples accepted by [`fit_envelope`].
pub const MIN_POINTS: usize = 8;
/// A fitted T2 beyond this multiple of the sampled span counts as no decay.
pub const NO_DECAY_SPAN_FACTOR: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {MIN_POINTS} samples, got {0}")]
    TooFewPoints(usize),
    #[error("samples span {span} ms, shorter than the fitted T2 of {t2} ms")]
    SpanTooShort { t2: f64, span: f64 },
    #[error("no positive amplitudes to fit")]
    Degenerate,
}

/// Result of an envelope fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    Decay {
        t2_ms: f64,
        amplitude: f64,
        /// RMS of `|s| - A·exp(-t/T2)` over the fitted points.
        residual: f64,
        points_used: usize,
    },
    /// The estimate exceeded 100× the span (or the signal grew).
    NoDecay { amplitude: f64 },
}

impl Envelope {
    pub fn t2_ms(&self) -> Option<f64> {
        match self {
            Envelope::Decay { t2_ms, .. } => Some(*t2_ms),
            Envelope::NoDecay { .. } => None,
        }
    }

    /// T2 with the no-decay case mapped to infinity.
    pub fn t2_or_inf(&self) -> f64 {
        self.t2_ms().unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys).take(n) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Indices of local maxima. A plateau counts once, at its first sample.
/// Index 0 counts when it exceeds its right neighbour; the last sample never does.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut peaks = Vec::new();
    if n < 2 {
        return peaks;
    }
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let left_ok = i == 0 || values[i - 1] < values[i];
        let right_ok = j + 1 < n && values[j + 1] < values[i];
        if left_ok && right_ok {
            peaks.push(i);
        }
        i = j + 1;
    }
    peaks
}

/// Fits `A·exp(-t/T2)` to the magnitude column of a trace.
pub fn fit_envelope(trace: &SignalTrace) -> Result<Envelope, FitError> {
    let ts: Vec<f64> = trace.points.iter().map(|p| p.t_ms).collect();
    let mags: Vec<f64> = trace.points.iter().map(|p| p.magnitude).collect();
    fit_envelope_samples(&ts, &mags)
}

/// Same as [`fit_envelope`] on raw `(t, |s|)` samples.
///
/// Oscillating signals (two or more interior local maxima of `|s|`) are
/// fitted through their maxima; otherwise every sample is used. The fit is
/// linear least squares on `ln|s|`.
pub fn fit_envelope_samples(ts: &[f64], mags: &[f64]) -> Result<Envelope, FitError> {
    let n = ts.len().min(mags.len());
    if n < MIN_POINTS {
        return Err(FitError::TooFewPoints(n));
    }
    let abs: Vec<f64> = mags[..n].iter().map(|m| m.abs()).collect();
    let peaks = local_maxima(&abs);
    let interior = peaks.iter().filter(|&&i| i > 0).count();
    let chosen: Vec<usize> = if interior >= 2 {
        peaks
    } else {
        (0..n).collect()
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = chosen
        .iter()
        .filter(|&&i| abs[i] > 0.0 && abs[i].is_finite())
        .map(|&i| (ts[i], abs[i].ln()))
        .unzip();
    let mean_amp = abs.iter().sum::<f64>() / n as f64;
    if xs.is_empty() {
        return Err(FitError::Degenerate);
    }
    let span = ts[n - 1] - ts[0];
    let Some(line) = linear_fit(&xs, &ys) else {
        return Ok(Envelope::NoDecay {
            amplitude: mean_amp,
        });
    };
    if line.slope >= 0.0 {
        return Ok(Envelope::NoDecay {
            amplitude: mean_amp,
        });
    }
    let t2 = -1.0 / line.slope;
    if t2 > NO_DECAY_SPAN_FACTOR * span {
        return Ok(Envelope::NoDecay {
            amplitude: mean_amp,
        });
    }
    if t2 > span {
        return Err(FitError::SpanTooShort { t2, span });
    }
    let amplitude = line.intercept.exp();
    let sq: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(t, ly)| {
            let d = ly.exp() - amplitude * (-t / t2).exp();
            d * d
        })
        .sum();
    Ok(Envelope::Decay {
        t2_ms: t2,
        amplitude,
        residual: (sq / xs.len() as f64).sqrt(),
        points_used: xs.len(),
    })
}
