//! Multi-channel piecewise-constant traces and their CSV form.
//!
//! The CSV layout is a header `time,var1,var2,...` followed by one row per
//! sample. Times must start at 0 and be strictly increasing; each value holds
//! until the next row (zero-order hold).

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numfmt::fmt_g;
use crate::signal::FpcSignal;

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    variables: Vec<String>,
    channels: BTreeMap<String, FpcSignal>,
    horizon: f64,
}

impl Trace {
    /// Builds a trace from sample rows; `columns[k][i]` is variable `k` at `times[i]`.
    pub fn from_samples(times: &[f64], variables: &[String], columns: &[Vec<f64>]) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Trace("a trace needs at least one sample".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::Trace(format!("first timestamp must be 0, got {}", times[0])));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Trace(format!(
                    "timestamps must be finite and strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if variables.len() != columns.len() {
            return Err(Error::Trace("one column per variable expected".into()));
        }
        let mut channels = BTreeMap::new();
        for (name, col) in variables.iter().zip(columns) {
            if col.len() != times.len() {
                return Err(Error::Trace(format!("column `{name}` has the wrong length")));
            }
            if let Some(v) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::Trace(format!("column `{name}` holds a non-finite value {v}")));
            }
            let steps = times.iter().copied().zip(col.iter().copied()).collect();
            if channels.insert(name.clone(), FpcSignal::new(steps)?).is_some() {
                return Err(Error::Trace(format!("duplicate variable `{name}`")));
            }
        }
        Ok(Trace {
            variables: variables.to_vec(),
            channels,
            horizon: *times.last().unwrap(),
        })
    }

    /// Builds a trace from ready-made channels. `horizon` is raised to the last breakpoint if needed.
    pub fn from_channels(channels: Vec<(String, FpcSignal)>, horizon: f64) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut variables = Vec::new();
        let mut h = horizon.max(0.0);
        for (name, sig) in channels {
            if sig.steps().iter().any(|&(_, v)| !v.is_finite()) {
                return Err(Error::Trace(format!("channel `{name}` holds a non-finite value")));
            }
            h = h.max(sig.steps().last().unwrap().0);
            variables.push(name.clone());
            if map.insert(name.clone(), sig).is_some() {
                return Err(Error::Trace(format!("duplicate variable `{name}`")));
            }
        }
        Ok(Trace {
            variables,
            channels: map,
            horizon: h,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn channel(&self, name: &str) -> Option<&FpcSignal> {
        self.channels.get(name)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Total number of steps across channels.
    pub fn total_segments(&self) -> usize {
        self.channels.values().map(|c| c.len()).sum()
    }

    /// The trace seen from time `t`: every channel shifted left by `t`.
    pub fn shift(&self, t: f64) -> Result<Trace> {
        let mut channels = Vec::with_capacity(self.variables.len());
        for name in &self.variables {
            let s = self.channels[name].to_fpl().shift(t)?;
            channels.push((name.clone(), FpcSignal::from_fpl(&s).expect("constant steps")));
        }
        Trace::from_channels(channels, (self.horizon - t).max(0.0))
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("time") {
            return Err(Error::Trace("first CSV column must be `time`".into()));
        }
        let variables: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut times = Vec::new();
        let mut columns = vec![Vec::new(); variables.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != variables.len() + 1 {
                return Err(Error::Trace(format!("row {} has {} fields", row + 2, rec.len())));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Trace(format!("row {}: `{s}` is not a number", row + 2)))
            };
            times.push(parse(&rec[0])?);
            for (k, col) in columns.iter_mut().enumerate() {
                col.push(parse(&rec[k + 1])?);
            }
        }
        Self::from_samples(&times, &variables, &columns)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(std::io::BufReader::new(f))
    }

    /// Writes one row per breakpoint of any channel, plus a final row at the horizon.
    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut times: Vec<f64> = self
            .channels
            .values()
            .flat_map(|c| c.steps().iter().map(|s| s.0))
            .collect();
        times.push(self.horizon);
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string()];
        header.extend(self.variables.iter().cloned());
        w.write_record(&header)?;
        let signals: Vec<_> = self.variables.iter().map(|v| self.channels[v].to_fpl()).collect();
        for t in times {
            let mut row = vec![fmt_g(t, 17)];
            row.extend(signals.iter().map(|s| fmt_g(s.eval(t), 17)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path.as_ref())?;
        self.to_csv_writer(std::io::BufWriter::new(f))
    }
}
