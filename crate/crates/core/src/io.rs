//! Run-directory file formats.
//!
//! CSV numbers are written as `{:.16e}` (17 significant digits), which
//! round-trips every `f64` exactly. Event logs are NDJSON: a header object
//! followed by one `{kind, id, position, time}` object per line. Every file
//! is written to a temporary sibling and renamed into place.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::estimators::BinnedDistribution;
use crate::grid::{Bins, Grid, Region};
use crate::kinetics::{DensitySeries, KineticParams};
use crate::pointprocess::{BirthDeathEvent, EventLog};

pub const DENSITY_FILE: &str = "density.csv";
pub const EVENTS_FILE: &str = "events.ndjson";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const PROFILE_FILE: &str = "profile.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_num(field: &str, line: usize, path: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{path}:{line}: cannot parse number {field:?}")))
}

fn parse_rows(text: &str, header: &str, width: usize, path: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        other => {
            return Err(Error::Parse(format!(
                "{path}:1: expected header {header:?}, found {:?}",
                other.map(|(_, h)| h).unwrap_or("")
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(Error::Parse(format!(
                "{path}:{}: expected {width} fields, found {}",
                i + 1,
                fields.len()
            )));
        }
        rows.push(fields.iter().map(|f| parse_num(f, i + 1, path)).collect::<Result<_>>()?);
    }
    Ok(rows)
}

pub fn density_csv(series: &DensitySeries) -> String {
    let mut out = String::from("t,r,value\n");
    for (i, &t) in series.times().iter().enumerate() {
        for (j, &r) in series.grid().points().iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", num(t), num(r), num(series.value(i, j))));
        }
    }
    out
}

pub fn parse_density_csv(text: &str, params: KineticParams) -> Result<DensitySeries> {
    let rows = parse_rows(text, "t,r,value", 3, DENSITY_FILE)?;
    let mut times: Vec<f64> = Vec::new();
    let mut points: Vec<f64> = Vec::new();
    for row in &rows {
        if times.last() != Some(&row[0]) {
            times.push(row[0]);
        }
        if times.len() == 1 {
            points.push(row[1]);
        }
    }
    if rows.len() != times.len() * points.len() {
        return Err(Error::Parse(format!("{DENSITY_FILE}: rows do not form a full time × grid table")));
    }
    for (k, row) in rows.iter().enumerate() {
        if row[1] != points[k % points.len()] {
            return Err(Error::Parse(format!("{DENSITY_FILE}:{}: grid coordinate out of sequence", k + 2)));
        }
    }
    let values = rows.iter().map(|r| r[2]).collect();
    DensitySeries::new(params, Grid::new(points)?, times, values)
}

pub fn histogram_csv(hist: &BinnedDistribution) -> String {
    let mut out = String::from("lo,hi,count\n");
    for (i, &c) in hist.weights().iter().enumerate() {
        let (lo, hi) = hist.bins().bounds(i);
        out.push_str(&format!("{},{},{}\n", num(lo), num(hi), num(c)));
    }
    out
}

pub fn parse_histogram_csv(text: &str) -> Result<BinnedDistribution> {
    let rows = parse_rows(text, "lo,hi,count", 3, HISTOGRAM_FILE)?;
    if rows.is_empty() {
        return Err(Error::Parse(format!("{HISTOGRAM_FILE}: no bins")));
    }
    let mut edges: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    for w in rows.windows(2) {
        if w[0][1] != w[1][0] {
            return Err(Error::Parse(format!("{HISTOGRAM_FILE}: bins are not contiguous")));
        }
    }
    edges.push(rows[rows.len() - 1][1]);
    BinnedDistribution::new(Bins::from_edges(edges)?, rows.iter().map(|r| r[2]).collect())
}

/// Reference profile sampled at `r`: the time-averaged intensity normalized
/// to unit integral over the region, so it overlays a histogram divided by
/// `count · bin width`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub positions: Vec<f64>,
    pub density: Vec<f64>,
}

pub fn profile_csv(profile: &Profile) -> String {
    let mut out = String::from("r,density\n");
    for (r, v) in profile.positions.iter().zip(&profile.density) {
        out.push_str(&format!("{},{}\n", num(*r), num(*v)));
    }
    out
}

pub fn parse_profile_csv(text: &str) -> Result<Profile> {
    let rows = parse_rows(text, "r,density", 2, PROFILE_FILE)?;
    Ok(Profile {
        positions: rows.iter().map(|r| r[0]).collect(),
        density: rows.iter().map(|r| r[1]).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EventHeader {
    generator: String,
    seed: u64,
    params: KineticParams,
    region: Region,
    t_end: f64,
    rate_bound: f64,
    events: usize,
}

pub fn events_ndjson(log: &EventLog) -> Result<String> {
    let header = EventHeader {
        generator: log.generator.clone(),
        seed: log.seed,
        params: log.params,
        region: log.region,
        t_end: log.t_end,
        rate_bound: log.rate_bound,
        events: log.events.len(),
    };
    let mut out = serde_json::to_string(&header)?;
    out.push('\n');
    for e in &log.events {
        out.push_str(&serde_json::to_string(e)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_events_ndjson(path: &Path) -> Result<EventLog> {
    let file = fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let name = path.display().to_string();
    let header: EventHeader = match lines.next() {
        Some(line) => serde_json::from_str(&line?).map_err(|e| Error::Parse(format!("{name}:1: {e}")))?,
        None => return Err(Error::Parse(format!("{name}: missing header line"))),
    };
    let mut events = Vec::with_capacity(header.events);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: BirthDeathEvent = serde_json::from_str(&line).map_err(|e| Error::Parse(format!("{name}:{}: {e}", i + 2)))?;
        events.push(e);
    }
    if events.len() != header.events {
        return Err(Error::Parse(format!(
            "{name}: header announces {} events, found {}",
            header.events,
            events.len()
        )));
    }
    let log = EventLog {
        generator: header.generator,
        seed: header.seed,
        region: header.region,
        t_end: header.t_end,
        params: header.params,
        rate_bound: header.rate_bound,
        events,
    };
    log.validate()?;
    Ok(log)
}
