//! Plain-text instance files.
//!
//! One line per variable or box:
//!
//! ```text
//! atoms= 0.25:0.5, 0.75:0.5 ; segments= 0:0.5:1 ; cost= 0.1
//! ```
//!
//! Either list may be empty. `cost=` is required for Pandora instances and
//! rejected for prophet instances. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use stopbandit_core::distributions::{BoundedDistribution, Segment};
use stopbandit_core::environments::{PandoraInstance, ProphetInstance};

use crate::HarnessError;

/// One parsed line.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxLine {
    pub dist: BoundedDistribution,
    pub cost: Option<f64>,
}

/// Either game, as decided by the presence of costs.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyInstance {
    Prophet(ProphetInstance),
    Pandora(PandoraInstance),
}

fn bad(line: usize, msg: impl Into<String>) -> HarnessError {
    HarnessError::Parse { line, msg: msg.into() }
}

fn number(line: usize, s: &str) -> Result<f64, HarnessError> {
    s.trim().parse::<f64>().map_err(|_| bad(line, format!("not a number: {:?}", s.trim())))
}

fn fields(line: usize, s: &str, width: usize) -> Result<Vec<Vec<f64>>, HarnessError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|item| {
            let parts = item.split(':').map(|p| number(line, p)).collect::<Result<Vec<_>, _>>()?;
            if parts.len() != width {
                return Err(bad(line, format!("expected {width} colon-separated numbers in {item:?}")));
            }
            Ok(parts)
        })
        .collect()
}

/// Parses a single line (1-based `line` for messages).
pub fn parse_line(line: usize, text: &str) -> Result<BoxLine, HarnessError> {
    let mut atoms = None;
    let mut segments = None;
    let mut cost = None;
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part.split_once('=').ok_or_else(|| bad(line, format!("missing '=' in {part:?}")))?;
        match key.trim() {
            "atoms" if atoms.is_none() => {
                atoms = Some(fields(line, value, 2)?.into_iter().map(|v| (v[0], v[1])).collect::<Vec<_>>())
            }
            "segments" if segments.is_none() => {
                segments =
                    Some(fields(line, value, 3)?.into_iter().map(|v| Segment::new(v[0], v[1], v[2])).collect::<Vec<_>>())
            }
            "cost" if cost.is_none() => cost = Some(number(line, value)?),
            k => return Err(bad(line, format!("unknown or repeated key {k:?}"))),
        }
    }
    if atoms.is_none() && segments.is_none() {
        return Err(bad(line, "a line needs atoms= or segments="));
    }
    let dist = BoundedDistribution::new(atoms.unwrap_or_default(), segments.unwrap_or_default())
        .map_err(|e| bad(line, e.to_string()))?;
    Ok(BoxLine { dist, cost })
}

pub fn parse_lines(text: &str) -> Result<Vec<BoxLine>, HarnessError> {
    text.lines()
        .enumerate()
        .filter_map(|(k, l)| {
            let l = l.split('#').next().unwrap_or("").trim();
            (!l.is_empty()).then(|| parse_line(k + 1, l))
        })
        .collect()
}

/// Costs on every line give a Pandora instance, none give a prophet one.
pub fn parse_instance(text: &str) -> Result<AnyInstance, HarnessError> {
    let lines = parse_lines(text)?;
    let priced = lines.iter().filter(|l| l.cost.is_some()).count();
    if priced == 0 {
        let dists = lines.into_iter().map(|l| l.dist).collect();
        Ok(AnyInstance::Prophet(ProphetInstance::new(dists)?))
    } else if priced == lines.len() {
        let (dists, costs) = lines.into_iter().map(|l| (l.dist, l.cost.unwrap_or(0.0))).unzip();
        Ok(AnyInstance::Pandora(PandoraInstance::new(dists, costs)?))
    } else {
        Err(HarnessError::Config("either every line has a cost or none does".into()))
    }
}

pub fn parse_prophet(text: &str) -> Result<ProphetInstance, HarnessError> {
    match parse_instance(text)? {
        AnyInstance::Prophet(p) => Ok(p),
        AnyInstance::Pandora(_) => Err(HarnessError::Config("prophet instances take no cost= field".into())),
    }
}

pub fn parse_pandora(text: &str) -> Result<PandoraInstance, HarnessError> {
    match parse_instance(text)? {
        AnyInstance::Pandora(p) => Ok(p),
        AnyInstance::Prophet(_) => Err(HarnessError::Config("Pandora instances need cost= on every line".into())),
    }
}

pub fn read_instance(path: &Path) -> Result<AnyInstance, HarnessError> {
    parse_instance(&std::fs::read_to_string(path)?)
}

fn format_dist(out: &mut String, d: &BoundedDistribution) {
    let atoms: Vec<String> = d.atoms().iter().map(|(x, m)| format!("{x}:{m}")).collect();
    let segs: Vec<String> = d.segments().iter().map(|s| format!("{}:{}:{}", s.lo, s.hi, s.density)).collect();
    let _ = write!(out, "atoms= {} ; segments= {}", atoms.join(", "), segs.join(", "));
}

/// Inverse of [`parse_prophet`]; floats print in shortest round-trip form.
pub fn format_prophet(inst: &ProphetInstance) -> String {
    let mut out = String::new();
    for d in &inst.dists {
        format_dist(&mut out, d);
        out.push('\n');
    }
    out
}

pub fn format_pandora(inst: &PandoraInstance) -> String {
    let mut out = String::new();
    for (d, c) in inst.dists.iter().zip(&inst.costs) {
        format_dist(&mut out, d);
        let _ = writeln!(out, " ; cost= {c}");
    }
    out
}
