//! Collapse plateaus, revival onsets and oscillation bursts in sampled series.
//!
//! The series is first detrended by a centred running median so that a slowly
//! drifting collapse level does not read as activity. A point is quiet when the
//! detrended signal's trailing range stays below `floor_fraction` of the series
//! range; the first sufficiently long quiet run is the collapse plateau. Onsets
//! are crossings of `plateau + k·MAD` with hysteresis on the way back down.

use serde::{Deserialize, Serialize};
use tcxy::{Error, Result};

/// Fewer points than this cannot resolve a plateau.
pub const MIN_SERIES_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RevivalConfig {
    /// Onset threshold in units of the plateau MAD.
    pub k: f64,
    /// An active stretch ends once the deviation stays below this fraction of
    /// the onset threshold for `min_quiet` points.
    pub hysteresis: f64,
    /// Trailing window (points) over which quietness is judged.
    pub window: usize,
    /// Centred running-median width (points) used as the local baseline.
    pub baseline_window: usize,
    /// Quiet means trailing range ≤ this fraction of the full series range.
    pub floor_fraction: f64,
    /// Consecutive quiet points needed to call a plateau.
    pub min_quiet: usize,
}

impl Default for RevivalConfig {
    fn default() -> Self {
        Self {
            k: 10.0,
            hysteresis: 0.5,
            window: 32,
            baseline_window: 257,
            floor_fraction: 1.0e-3,
            min_quiet: 32,
        }
    }
}

impl RevivalConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("revival config: {what}")));
        if !(self.k.is_finite() && self.k > 0.0) {
            return bad("k must be positive");
        }
        if !(self.hysteresis > 0.0 && self.hysteresis <= 1.0) {
            return bad("hysteresis must lie in (0, 1]");
        }
        if self.window < 2 || self.min_quiet < 1 || self.baseline_window < 1 {
            return bad("windows must be at least 2 points");
        }
        if !(self.floor_fraction.is_finite() && self.floor_fraction >= 0.0) {
            return bad("floor_fraction must be non-negative");
        }
        Ok(())
    }
}

/// Summary of one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevivalMarkers {
    /// Median of the series over the first quiet run.
    pub plateau: Option<f64>,
    /// Median absolute deviation of the detrended series over that run.
    pub mad: Option<f64>,
    /// Time span of the first quiet run.
    pub collapse: Option<(f64, f64)>,
    /// Times where the series first leaves the plateau band, in order.
    pub onsets: Vec<f64>,
    /// Largest value before the plateau (the whole series if there is none).
    pub initial_peak: f64,
    /// Mean over points flagged active after the plateau.
    pub active_mean: Option<f64>,
    /// Half the peak-to-peak spread over those points.
    pub active_amplitude: Option<f64>,
}

impl RevivalMarkers {
    pub fn first_onset(&self) -> Option<f64> {
        self.onsets.first().copied()
    }
}

/// Reject mismatched, short or non-uniform series.
pub fn check_series(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: times.len(),
            min: MIN_SERIES_LEN,
        });
    }
    if values.iter().chain(times).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "series contains non-finite values".into(),
        ));
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidParameter("times must increase".into()));
    }
    let uneven = times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - step).abs() > 1.0e-6 * step);
    if uneven {
        return Err(Error::InvalidParameter(
            "series must be uniformly sampled".into(),
        ));
    }
    Ok(())
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Centred running median; the window is clipped at the ends (edge values repeat).
pub fn running_median(values: &[f64], width: usize) -> Vec<f64> {
    let n = values.len();
    let half = width.min(2 * n.saturating_sub(1) + 1) / 2;
    let mut buf = Vec::with_capacity(2 * half + 1);
    (0..n)
        .map(|i| {
            buf.clear();
            for off in 0..=2 * half {
                let j = (i + off).saturating_sub(half).min(n - 1);
                buf.push(values[j]);
            }
            median(&mut buf)
        })
        .collect()
}

/// Centred running maximum of |values − baseline|.
pub fn envelope(values: &[f64], baseline: &[f64], width: usize) -> Vec<f64> {
    let dev: Vec<f64> = values
        .iter()
        .zip(baseline)
        .map(|(v, b)| (v - b).abs())
        .collect();
    let n = dev.len();
    let half = width / 2;
    (0..n)
        .map(|i| {
            dev[i.saturating_sub(half)..(i + half + 1).min(n)]
                .iter()
                .copied()
                .fold(0.0, f64::max)
        })
        .collect()
}

pub fn detect_revival(
    times: &[f64],
    values: &[f64],
    cfg: &RevivalConfig,
) -> Result<RevivalMarkers> {
    check_series(times, values)?;
    cfg.validate()?;
    let n = values.len();
    let (lo_v, hi_v) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let floor = cfg.floor_fraction * (hi_v - lo_v);
    let baseline = running_median(values, cfg.baseline_window);
    let detrended: Vec<f64> = values.iter().zip(&baseline).map(|(v, b)| v - b).collect();

    let window = cfg.window.min(n);
    let quiet: Vec<bool> = (0..n)
        .map(|i| {
            if i + 1 < window {
                return false;
            }
            let seg = &detrended[i + 1 - window..=i];
            let (a, b) = seg
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                });
            b - a <= floor
        })
        .collect();

    let mut run = 0;
    let mut start = None;
    for (i, &q) in quiet.iter().enumerate() {
        run = if q { run + 1 } else { 0 };
        if run >= cfg.min_quiet {
            start = Some(i + 1 - run);
            break;
        }
    }
    let Some(start) = start else {
        return Ok(RevivalMarkers {
            plateau: None,
            mad: None,
            collapse: None,
            onsets: Vec::new(),
            initial_peak: hi_v,
            active_mean: None,
            active_amplitude: None,
        });
    };
    let end = start + quiet[start..].iter().take_while(|&&q| q).count();

    let plateau = median(&mut values[start..end].to_vec());
    let level = median(&mut detrended[start..end].to_vec());
    let mut spread: Vec<f64> = detrended[start..end]
        .iter()
        .map(|v| (v - level).abs())
        .collect();
    let mad = median(&mut spread);
    let upper = (cfg.k * mad).max(floor);
    let lower = cfg.hysteresis * upper;

    let mut onsets = Vec::new();
    let mut active_values = Vec::new();
    let mut active = false;
    let mut calm = 0;
    for i in start..n {
        let dev = (detrended[i] - level).abs();
        if !active {
            if dev > upper {
                onsets.push(times[i]);
                active = true;
                calm = 0;
            }
        } else {
            calm = if dev < lower { calm + 1 } else { 0 };
            if calm >= cfg.min_quiet {
                active = false;
            }
        }
        if active {
            active_values.push(values[i]);
        }
    }
    let initial_peak = values[..start]
        .iter()
        .copied()
        .fold(values[start], f64::max);
    let (active_mean, active_amplitude) = if active_values.is_empty() {
        (None, None)
    } else {
        let mean = active_values.iter().sum::<f64>() / active_values.len() as f64;
        let (a, b) = active_values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        (Some(mean), Some(0.5 * (b - a)))
    };
    Ok(RevivalMarkers {
        plateau: Some(plateau),
        mad: Some(mad),
        collapse: Some((times[start], times[end - 1])),
        onsets,
        initial_peak,
        active_mean,
        active_amplitude,
    })
}

/// Envelope of a series about its running-median baseline, with the envelope
/// width given in time units.
pub fn series_envelope(
    times: &[f64],
    values: &[f64],
    cfg: &RevivalConfig,
    width: f64,
) -> Result<Vec<f64>> {
    check_series(times, values)?;
    let step = times[1] - times[0];
    let points = ((width / step).round() as usize).max(1) | 1;
    let baseline = running_median(values, cfg.baseline_window);
    Ok(envelope(values, &baseline, points))
}

/// Time window of the first revival: from `onset` to the deepest envelope
/// minimum after the envelope's peak (the collapse that separates it from the
/// next revival, or the series end).
pub fn first_revival_window(times: &[f64], env: &[f64], onset: f64) -> Option<(f64, f64)> {
    let from = times.iter().position(|&t| t >= onset)?;
    let peak = (from..env.len()).max_by(|&a, &b| env[a].total_cmp(&env[b]))?;
    let trough = (peak..env.len()).min_by(|&a, &b| env[a].total_cmp(&env[b]))?;
    Some((times[from], times[trough]))
}

/// Number of separate stretches inside `window` where the envelope exceeds
/// `fraction` of its peak within that window.
pub fn count_bursts(times: &[f64], env: &[f64], window: (f64, f64), fraction: f64) -> usize {
    let inside: Vec<f64> = times
        .iter()
        .zip(env)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(_, e)| *e)
        .collect();
    let peak = inside.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return 0;
    }
    let mut count = 0;
    let mut above = false;
    for e in inside {
        let now = e > fraction * peak;
        if now && !above {
            count += 1;
        }
        above = now;
    }
    count
}

/// Mean of the samples with time in `[from, to]`.
pub fn window_mean(times: &[f64], values: &[f64], from: f64, to: f64) -> Result<f64> {
    let picked: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= from && **t <= to)
        .map(|(_, v)| *v)
        .collect();
    if picked.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no samples in [{from}, {to}]"
        )));
    }
    Ok(picked.iter().sum::<f64>() / picked.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn constant_series_is_all_plateau() {
        let t = grid(10.0, 200);
        let x = vec![0.37; 200];
        let m = detect_revival(&t, &x, &RevivalConfig::default()).unwrap();
        assert_eq!(m.plateau, Some(0.37));
        assert!(m.onsets.is_empty());
    }

    #[test]
    fn synthetic_burst_onset() {
        let t = grid(20.0, 2001);
        let step = t[1];
        let x: Vec<f64> = t
            .iter()
            .map(|&s| {
                if (9.0..=12.0).contains(&s) {
                    (std::f64::consts::PI * (s - 9.0) * 4.0).sin().powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        let m = detect_revival(&t, &x, &RevivalConfig::default()).unwrap();
        assert_eq!(m.plateau, Some(0.0));
        let onset = m.first_onset().unwrap();
        assert!((onset - 9.0).abs() <= step + 1e-12, "onset {onset}");
        assert_eq!(m.onsets.len(), 1);
    }

    #[test]
    fn short_series_rejected() {
        let t = grid(1.0, 63);
        let err = detect_revival(&t, &vec![0.0; 63], &RevivalConfig::default()).unwrap_err();
        assert_eq!(err, Error::SeriesTooShort { len: 63, min: 64 });
    }

    #[test]
    fn uneven_sampling_rejected() {
        let mut t = grid(1.0, 100);
        t[50] += 1e-3;
        assert!(matches!(
            detect_revival(&t, &vec![0.0; 100], &RevivalConfig::default()),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn drifting_plateau_is_not_a_revival() {
        let t = grid(1000.0, 4096);
        let x: Vec<f64> = t
            .iter()
            .map(|&s| {
                let drift = 0.9 + 0.02 * (s / 400.0).sin();
                let burst = if s > 700.0 {
                    0.05 * (s * 3.1).sin()
                } else {
                    0.0
                };
                let start = if s < 50.0 {
                    0.1 * (s * 2.3).cos() * (1.0 - s / 50.0)
                } else {
                    0.0
                };
                drift + burst + start
            })
            .collect();
        let m = detect_revival(&t, &x, &RevivalConfig::default()).unwrap();
        let onset = m.first_onset().unwrap();
        assert!((onset - 700.0).abs() < 5.0, "onset {onset}");
    }

    #[test]
    fn running_median_edges() {
        assert_eq!(
            running_median(&[1.0, 5.0, 2.0, 8.0], 3),
            vec![1.0, 2.0, 5.0, 8.0]
        );
        assert_eq!(running_median(&[3.0], 257), vec![3.0]);
    }

    #[test]
    fn bursts_counted_with_split() {
        let t = grid(10.0, 1001);
        let one: Vec<f64> = t.iter().map(|&s| (-(s - 5.0).powi(2)).exp()).collect();
        let two: Vec<f64> = t
            .iter()
            .map(|&s| (-(s - 4.0).powi(2) * 4.0).exp() + (-(s - 6.0).powi(2) * 4.0).exp())
            .collect();
        assert_eq!(count_bursts(&t, &one, (0.0, 10.0), 0.5), 1);
        assert_eq!(count_bursts(&t, &two, (0.0, 10.0), 0.5), 2);
        assert_eq!(count_bursts(&t, &two, (0.0, 5.0), 0.5), 1);
    }

    #[test]
    fn window_mean_of_ramp() {
        let t = grid(1.0, 101);
        assert!((window_mean(&t, &t, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(window_mean(&t, &t, 2.0, 3.0).is_err());
    }
}
