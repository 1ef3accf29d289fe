//! Spectrometer text files and windowed counting.
//!
//! A spectrum file holds one channel per line, either `index count` or
//! `index energy_keV count`, whitespace-separated. `#` starts a comment;
//! blank lines are skipped; LF and CRLF line endings are both accepted. All
//! data lines in a file must use the same layout.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measured::MeasuredValue;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub index: u64,
    pub energy_kev: Option<f64>,
    pub counts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub channels: Vec<Channel>,
    pub live_time_s: f64,
    pub label: String,
}

impl Spectrum {
    pub fn total_counts(&self) -> u64 {
        self.channels.iter().map(|c| c.counts).sum()
    }

    pub fn has_energies(&self) -> bool {
        !self.channels.is_empty() && self.channels.iter().all(|c| c.energy_kev.is_some())
    }

    /// Channels falling inside `window`, in index order.
    pub fn select(&self, window: &CountWindow) -> Result<Vec<&Channel>> {
        window.validate()?;
        if let CountWindow::Energy { .. } = window {
            if !self.has_energies() {
                return Err(LabError::MissingEnergyCalibration);
            }
        }
        Ok(self.channels.iter().filter(|c| window.contains(c)).collect())
    }

    pub fn summary(&self) -> SpectrumSummary {
        let energies: Vec<f64> = self.channels.iter().filter_map(|c| c.energy_kev).collect();
        let total = self.total_counts();
        SpectrumSummary {
            label: self.label.clone(),
            channel_count: self.channels.len(),
            first_channel: self.channels.first().map(|c| c.index),
            last_channel: self.channels.last().map(|c| c.index),
            energy_range_kev: (energies.len() == self.channels.len() && !energies.is_empty())
                .then(|| (energies[0], energies[energies.len() - 1])),
            total_counts: MeasuredValue::from_counts(total),
            live_time_s: self.live_time_s,
            count_rate_per_s: MeasuredValue::new(
                total as f64 / self.live_time_s,
                (total as f64).sqrt() / self.live_time_s,
            ),
            peak_channel: self
                .channels
                .iter()
                .max_by(|a, b| a.counts.cmp(&b.counts).then(b.index.cmp(&a.index)))
                .map(|c| c.index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub label: String,
    pub channel_count: usize,
    pub first_channel: Option<u64>,
    pub last_channel: Option<u64>,
    pub energy_range_kev: Option<(f64, f64)>,
    pub total_counts: MeasuredValue,
    pub live_time_s: f64,
    pub count_rate_per_s: MeasuredValue,
    /// Channel with the most counts (lowest index on ties).
    pub peak_channel: Option<u64>,
}

/// Inclusive counting window over channel indices or calibrated energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "snake_case")]
pub enum CountWindow {
    Channel { lo: u64, hi: u64 },
    Energy { lo: f64, hi: f64 },
}

impl CountWindow {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            CountWindow::Channel { lo, hi } => lo <= hi,
            CountWindow::Energy { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::InvalidWindow)
        }
    }

    fn contains(&self, c: &Channel) -> bool {
        match *self {
            CountWindow::Channel { lo, hi } => (lo..=hi).contains(&c.index),
            CountWindow::Energy { lo, hi } => c.energy_kev.is_some_and(|e| lo <= e && e <= hi),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    IndexCount,
    IndexEnergyCount,
}

pub fn parse_spectrum(text: &str, live_time_s: f64, label: &str) -> Result<Spectrum> {
    if !(live_time_s.is_finite() && live_time_s > 0.0) {
        return Err(LabError::InvalidLiveTime);
    }
    let mut channels: Vec<Channel> = Vec::new();
    let mut layout = None;
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let line = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let this_layout = match fields.len() {
            2 => Layout::IndexCount,
            3 => Layout::IndexEnergyCount,
            n => {
                return Err(LabError::FormatError {
                    line: line_no,
                    reason: format!("expected 2 or 3 fields, found {n}"),
                })
            }
        };
        match layout {
            None => layout = Some(this_layout),
            Some(l) if l != this_layout => {
                return Err(LabError::FormatError {
                    line: line_no,
                    reason: "mixed `index count` and `index energy count` lines".into(),
                })
            }
            _ => {}
        }

        let index: u64 = fields[0].parse().map_err(|_| LabError::FormatError {
            line: line_no,
            reason: format!("bad channel index {:?}", fields[0]),
        })?;
        let energy_kev = match this_layout {
            Layout::IndexCount => None,
            Layout::IndexEnergyCount => {
                let e: f64 = fields[1].parse().map_err(|_| LabError::FormatError {
                    line: line_no,
                    reason: format!("bad energy {:?}", fields[1]),
                })?;
                if !e.is_finite() {
                    return Err(LabError::FormatError { line: line_no, reason: "energy must be finite".into() });
                }
                Some(e)
            }
        };
        let count_field = fields[fields.len() - 1];
        let counts = match count_field.parse::<i128>() {
            Ok(n) if n < 0 => return Err(LabError::NegativeCount { line: line_no }),
            Ok(n) => u64::try_from(n)
                .map_err(|_| LabError::FormatError { line: line_no, reason: "count too large".into() })?,
            Err(_) => {
                return Err(LabError::FormatError { line: line_no, reason: format!("bad count {count_field:?}") })
            }
        };
        if channels.last().is_some_and(|prev| prev.index >= index) {
            return Err(LabError::NonMonotonicChannels { line: line_no });
        }
        channels.push(Channel { index, energy_kev, counts });
    }
    Ok(Spectrum { channels, live_time_s, label: label.to_owned() })
}

/// Net counts in `window` with Poisson error.
///
/// Without background, `N ± √N`. With background B scaled by
/// `r = t_s / t_b`, `N − rB ± √(N + r²B)`.
pub fn window_counts(
    spectrum: &Spectrum,
    window: &CountWindow,
    background: Option<&Spectrum>,
) -> Result<MeasuredValue> {
    let selected = spectrum.select(window)?;
    if selected.is_empty() {
        return Err(LabError::EmptyWindow);
    }
    let gross: u64 = selected.iter().map(|c| c.counts).sum();
    let Some(bg) = background else {
        return Ok(MeasuredValue::from_counts(gross));
    };

    let bg_selected = bg.select(window)?;
    let overlaps = bg_selected.iter().any(|b| selected.iter().any(|c| c.index == b.index));
    if !overlaps {
        return Err(LabError::IncompatibleBackground);
    }
    let b: u64 = bg_selected.iter().map(|c| c.counts).sum();
    let scale = spectrum.live_time_s / bg.live_time_s;
    let (n, b) = (gross as f64, b as f64);
    Ok(MeasuredValue::new(n - b * scale, (n + b * scale * scale).sqrt()))
}
