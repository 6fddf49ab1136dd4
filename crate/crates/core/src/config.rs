//! Plain-text `key = value` configuration and the grid/bounds argument
//! syntax shared with the command line.
//!
//! ```text
//! # figure script
//! energy = -6
//! grid = 81x41
//! bounds = -1:1:-0.5:0.5   # trailing comments are allowed
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::diffgeo::{Bounds, GridSpec};
use crate::error::{Error, Result};

/// Largest accepted grid side.
pub const MAX_GRID_SIDE: usize = 4096;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, (usize, String)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| parse_err(line, format!("expected key = value, got {body:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(parse_err(line, format!("invalid key {k:?}")));
            }
            if v.is_empty() {
                return Err(parse_err(line, format!("empty value for {k}")));
            }
            if entries.insert(k.to_string(), (line, v.to_string())).is_some() {
                return Err(parse_err(line, format!("duplicate key {k}")));
            }
        }
        Ok(Config { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Typed lookup; parse failures report the line of the entry.
    pub fn get_parsed<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| parse_err(*line, format!("{key}: {e}"))),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        let v = self.get_parsed::<f64>(key)?;
        match (v, self.entries.get(key)) {
            (Some(x), Some((line, _))) if !x.is_finite() => Err(parse_err(*line, format!("{key} is not finite"))),
            _ => Ok(v),
        }
    }

    pub fn get_grid(&self, key: &str) -> Result<Option<GridSpec>> {
        self.with_line(key, parse_grid)
    }

    pub fn get_bounds(&self, key: &str) -> Result<Option<Bounds>> {
        self.with_line(key, parse_bounds)
    }

    fn with_line<T>(&self, key: &str, f: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => f(v).map(Some).map_err(|e| match e {
                Error::Parse { message, .. } => parse_err(*line, message),
                other => other,
            }),
        }
    }
}

/// `NXxNY`, both sides in `2..=MAX_GRID_SIDE`.
pub fn parse_grid(s: &str) -> Result<GridSpec> {
    let (a, b) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| parse_err(1, format!("grid {s:?} is not NXxNY")))?;
    let side = |t: &str| -> Result<usize> {
        let n = t
            .trim()
            .parse::<usize>()
            .map_err(|e| parse_err(1, format!("grid side {t:?}: {e}")))?;
        if !(2..=MAX_GRID_SIDE).contains(&n) {
            return Err(parse_err(1, format!("grid side {n} outside 2..={MAX_GRID_SIDE}")));
        }
        Ok(n)
    };
    Ok(GridSpec::new(side(a)?, side(b)?))
}

/// `x0:x1:y0:y1` with `x0 < x1`, `y0 < y1`, all finite.
pub fn parse_bounds(s: &str) -> Result<Bounds> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    if parts.len() != 4 {
        return Err(parse_err(1, format!("bounds {s:?} is not x0:x1:y0:y1")));
    }
    let mut v = [0.0; 4];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse::<f64>()
            .map_err(|e| parse_err(1, format!("bound {p:?}: {e}")))?;
    }
    let b = Bounds {
        x0: v[0],
        x1: v[1],
        y0: v[2],
        y1: v[3],
    };
    if !b.is_valid() {
        return Err(parse_err(1, format!("bounds {s:?} are empty or not finite")));
    }
    Ok(b)
}
