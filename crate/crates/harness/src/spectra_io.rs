//! Text format for channel baseband spectra.
//!
//! ```text
//! # comments and blank lines are ignored
//! delta_f = 25e6
//! f_max = 20e9
//! mode = complex          # or real
//!
//! [channel M=38]
//! 0 0.125 -0.5            # k re im, one line per baseband bin
//! 1 0 0
//! ...
//! ```
//!
//! Complex mode expects `k = 0..M-1`; real mode expects
//! `k = -M/2..=M/2` and the values must be conjugate symmetric. Every bin
//! appears exactly once; order is free.

use std::fmt::Write as _;

use smrs_core::{ChannelConfig, ChannelSamples64, Complex64, GridLayout, GridSpec};

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectraFile {
    pub delta_f: f64,
    pub f_max: f64,
    pub layout: GridLayout,
    pub channels: Vec<ChannelSamples64>,
}

impl SpectraFile {
    pub fn grid(&self) -> Result<GridSpec, HarnessError> {
        let span = match self.layout {
            GridLayout::Complex => self.f_max,
            GridLayout::Real => 2.0 * self.f_max,
        };
        Ok(GridSpec::from_span(self.layout, span, self.delta_f)?)
    }
}

struct Section {
    line: usize,
    m: usize,
    bins: Vec<(i64, Complex64)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_spectra(text: &str) -> Result<SpectraFile, HarnessError> {
    let mut delta_f = None;
    let mut f_max = None;
    let mut layout = None;
    let mut sections: Vec<Section> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line_no, "unterminated section header"))?;
            let m = inner
                .trim()
                .strip_prefix("channel")
                .and_then(|r| r.trim().strip_prefix("M="))
                .ok_or_else(|| parse_err(line_no, "expected [channel M=<bins>]"))?
                .trim()
                .parse::<usize>()
                .map_err(|e| parse_err(line_no, e.to_string()))?;
            sections.push(Section {
                line: line_no,
                m,
                bins: Vec::new(),
            });
            continue;
        }
        if let Some(section) = sections.last_mut() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(line_no, "expected `k re im`"));
            }
            let k = fields[0]
                .parse::<i64>()
                .map_err(|e| parse_err(line_no, e.to_string()))?;
            let re = fields[1]
                .parse::<f64>()
                .map_err(|e| parse_err(line_no, e.to_string()))?;
            let im = fields[2]
                .parse::<f64>()
                .map_err(|e| parse_err(line_no, e.to_string()))?;
            section.bins.push((k, Complex64::new(re, im)));
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, "expected `key = value` before the first channel"))?;
        let value = value.trim();
        match key.trim() {
            "delta_f" => {
                delta_f = Some(
                    value
                        .parse::<f64>()
                        .map_err(|e| parse_err(line_no, e.to_string()))?,
                )
            }
            "f_max" => {
                f_max = Some(
                    value
                        .parse::<f64>()
                        .map_err(|e| parse_err(line_no, e.to_string()))?,
                )
            }
            "mode" => {
                layout = Some(match value {
                    "complex" => GridLayout::Complex,
                    "real" => GridLayout::Real,
                    other => return Err(parse_err(line_no, format!("unknown mode `{other}`"))),
                })
            }
            other => return Err(parse_err(line_no, format!("unknown key `{other}`"))),
        }
    }

    let delta_f = delta_f.ok_or_else(|| parse_err(0, "missing delta_f"))?;
    let f_max = f_max.ok_or_else(|| parse_err(0, "missing f_max"))?;
    let layout = layout.unwrap_or(GridLayout::Complex);
    if sections.is_empty() {
        return Err(parse_err(0, "no channel sections"));
    }

    let mut channels = Vec::with_capacity(sections.len());
    for s in sections {
        let config =
            ChannelConfig::new(s.m, delta_f).map_err(|e| parse_err(s.line, e.to_string()))?;
        config
            .check_layout(layout)
            .map_err(|e| parse_err(s.line, e.to_string()))?;
        let first = config.baseband_first(layout);
        let len = config.baseband_len(layout);
        let mut values: Vec<Option<Complex64>> = vec![None; len];
        for (k, v) in s.bins {
            let pos = usize::try_from(k - first)
                .ok()
                .filter(|&p| p < len)
                .ok_or_else(|| {
                    parse_err(s.line, format!("bin {k} outside the baseband of M={}", s.m))
                })?;
            if values[pos].replace(v).is_some() {
                return Err(parse_err(
                    s.line,
                    format!("bin {k} given twice for M={}", s.m),
                ));
            }
        }
        let baseband = values
            .into_iter()
            .enumerate()
            .map(|(p, v)| {
                v.ok_or_else(|| {
                    parse_err(
                        s.line,
                        format!("bin {} missing for M={}", first + p as i64, s.m),
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        channels.push(
            ChannelSamples64::new(config, layout, baseband)
                .map_err(|e| parse_err(s.line, e.to_string()))?,
        );
    }
    Ok(SpectraFile {
        delta_f,
        f_max,
        layout,
        channels,
    })
}

pub fn format_spectra(file: &SpectraFile) -> String {
    let mut out = String::new();
    let mode = match file.layout {
        GridLayout::Complex => "complex",
        GridLayout::Real => "real",
    };
    let _ = writeln!(out, "delta_f = {:e}", file.delta_f);
    let _ = writeln!(out, "f_max = {:e}", file.f_max);
    let _ = writeln!(out, "mode = {mode}");
    for ch in &file.channels {
        let _ = writeln!(out, "\n[channel M={}]", ch.config().bins_per_period());
        for (k, v) in ch.indices().zip(ch.baseband()) {
            let _ = writeln!(out, "{k} {:e} {:e}", v.re, v.im);
        }
    }
    out
}
