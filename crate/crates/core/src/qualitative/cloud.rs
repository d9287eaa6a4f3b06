//! Deterministic SVG word-cloud layout.
//!
//! Words are placed in table order along an Archimedean spiral starting at
//! the origin; each takes the first spiral point where its box does not
//! overlap any placed box. Box width comes from a fixed per-character width
//! table, so no font metrics are needed.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FrequencyTable;
use crate::corpus::io::write;
use crate::error::{Error, Result};

/// Box height as a multiple of the font size.
pub const LINE_HEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudConfig {
    pub max_font_size: f64,
    pub min_font_size: f64,
    /// Radial growth of the spiral per radian.
    pub spiral_step: f64,
    /// Angle increment between candidate positions, in radians.
    pub angle_step: f64,
    /// Free space added around each box while placing.
    pub padding: f64,
}

impl Default for CloudConfig {
    fn default() -> Self {
        CloudConfig {
            max_font_size: 48.0,
            min_font_size: 12.0,
            spiral_step: 1.0,
            angle_step: 0.1,
            padding: 1.0,
        }
    }
}

/// Approximate advance width of `c` in ems.
pub fn char_width(c: char) -> f64 {
    match c {
        'i' | 'j' | 'l' | '.' | ',' | ';' | ':' | '!' | '\'' | '|' => 0.28,
        'f' | 't' | 'r' | 'I' | '(' | ')' | '[' | ']' | '-' | '"' => 0.36,
        'm' | 'w' => 0.85,
        'M' | 'W' => 0.95,
        'A'..='Z' => 0.70,
        '0'..='9' => 0.56,
        c if c.is_ascii() => 0.56,
        c if c >= '\u{2E80}' => 1.0,
        _ => 0.62,
    }
}

/// A word with its font size and the center of its box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedWord {
    pub word: String,
    pub count: usize,
    pub font_size: f64,
    pub x: f64,
    pub y: f64,
}

impl PlacedWord {
    pub fn width(&self) -> f64 {
        self.font_size * self.word.chars().map(char_width).sum::<f64>()
    }

    pub fn height(&self) -> f64 {
        self.font_size * LINE_HEIGHT
    }

    /// (left, top, right, bottom)
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let (hw, hh) = (self.width() / 2.0, self.height() / 2.0);
        (self.x - hw, self.y - hh, self.x + hw, self.y + hh)
    }

    fn overlaps(&self, other: &PlacedWord, pad: f64) -> bool {
        let (l1, t1, r1, b1) = self.bounds();
        let (l2, t2, r2, b2) = other.bounds();
        l1 < r2 + pad && l2 < r1 + pad && t1 < b2 + pad && t2 < b1 + pad
    }
}

fn round2(x: f64) -> f64 {
    let r = (x * 100.0).round() / 100.0;
    if r == 0.0 { 0.0 } else { r }
}

/// Font size of `count`: affine between the smallest and largest count,
/// the largest at `max_font_size`.
fn font_size(cfg: &CloudConfig, count: usize, lo: usize, hi: usize) -> f64 {
    if hi == lo {
        return cfg.max_font_size;
    }
    let t = (count - lo) as f64 / (hi - lo) as f64;
    round2(cfg.min_font_size + t * (cfg.max_font_size - cfg.min_font_size))
}

/// Spiral steps tried per word before giving up.
const MAX_STEPS: usize = 2_000_000;

pub fn layout(table: &FrequencyTable, cfg: &CloudConfig) -> Result<Vec<PlacedWord>> {
    if table.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{}: no words to draw",
            table.metric
        )));
    }
    if !(cfg.min_font_size > 0.0
        && cfg.max_font_size >= cfg.min_font_size
        && cfg.spiral_step > 0.0
        && cfg.angle_step > 0.0
        && cfg.padding >= 0.0)
    {
        return Err(Error::InvalidArgument(format!("invalid cloud settings {cfg:?}")));
    }
    let hi = table.entries.iter().map(|(_, c)| *c).max().unwrap_or(0);
    let lo = table.entries.iter().map(|(_, c)| *c).min().unwrap_or(0);
    let mut placed: Vec<PlacedWord> = Vec::with_capacity(table.len());
    for (word, count) in &table.entries {
        let mut w = PlacedWord {
            word: word.clone(),
            count: *count,
            font_size: font_size(cfg, *count, lo, hi),
            x: 0.0,
            y: 0.0,
        };
        let mut ok = false;
        for step in 0..MAX_STEPS {
            let theta = step as f64 * cfg.angle_step;
            let r = cfg.spiral_step * theta;
            w.x = round2(r * theta.cos());
            w.y = round2(r * theta.sin());
            if placed.iter().all(|p| !w.overlaps(p, cfg.padding)) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::InvalidArgument(format!("could not place word {word:?}")));
        }
        placed.push(w);
    }
    Ok(placed)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn render_svg(words: &[PlacedWord]) -> String {
    let (mut l, mut t, mut r, mut b) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for w in words {
        let (l2, t2, r2, b2) = w.bounds();
        l = l.min(l2);
        t = t.min(t2);
        r = r.max(r2);
        b = b.max(b2);
    }
    let margin = 4.0;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.2} {:.2} {:.2} {:.2}">"#,
        l - margin,
        t - margin,
        r - l + 2.0 * margin,
        b - t + 2.0 * margin
    )
    .unwrap();
    for w in words {
        writeln!(
            out,
            r#"  <text x="{:.2}" y="{:.2}" font-size="{:.2}" font-family="sans-serif" text-anchor="middle" dominant-baseline="central" data-count="{}">{}</text>"#,
            w.x,
            w.y,
            w.font_size,
            w.count,
            escape(&w.word)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Lays out `table` and writes the SVG to `path`.
pub fn render_cloud(table: &FrequencyTable, path: &Path, cfg: &CloudConfig) -> Result<Vec<PlacedWord>> {
    let words = layout(table, cfg)?;
    write(path, &render_svg(&words))?;
    Ok(words)
}
