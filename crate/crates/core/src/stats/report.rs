use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{format_f64, Trace};
use crate::stats::correlation::{add_measurement_noise, correlation, partial_correlation, Corr};

/// Default significance floor for unit-coherence signals over 1000 s runs.
pub const DEFAULT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEntry {
    pub x: String,
    pub y: String,
    pub given: Vec<String>,
    pub value: Corr,
}

/// Pairwise matrix plus any conditional correlations computed so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub labels: Vec<String>,
    /// Symmetric, row-major, `labels.len()` square.
    pub pairwise: Vec<Vec<Corr>>,
    pub conditional: Vec<ConditionalEntry>,
    pub n_samples: usize,
    pub noise_floor: f64,
}

impl CorrelationReport {
    pub fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownChannel(label.to_string()))
    }

    pub fn get(&self, a: &str, b: &str) -> Result<Corr> {
        Ok(self.pairwise[self.index(a)?][self.index(b)?])
    }

    /// Pairwise value, `None` when undefined.
    pub fn value(&self, a: &str, b: &str) -> Result<Option<f64>> {
        Ok(self.get(a, b)?.value())
    }

    pub fn find_conditional(&self, x: &str, y: &str, given: &[&str]) -> Option<&ConditionalEntry> {
        let mut want: Vec<&str> = given.to_vec();
        want.sort_unstable();
        self.conditional.iter().find(|e| {
            let mut have: Vec<&str> = e.given.iter().map(String::as_str).collect();
            have.sort_unstable();
            have == want && ((e.x == x && e.y == y) || (e.x == y && e.y == x))
        })
    }

    /// Pairwise matrix as CSV; undefined cells are written as `undef`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, ",{}", self.labels.join(","))?;
        for (label, row) in self.labels.iter().zip(&self.pairwise) {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.value().map_or_else(|| "undef".to_string(), format_f64))
                .collect();
            writeln!(out, "{label},{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Computes correlations over a fixed set of aligned series and records
/// every query in a [`CorrelationReport`].
pub struct CorrelationEngine {
    labels: Vec<String>,
    data: Vec<Vec<f64>>,
    /// Noisy copies used to regularise undefined conditional entries.
    noisy: Option<Vec<Vec<f64>>>,
    cache: HashMap<(usize, usize, Vec<usize>), Corr>,
    report: CorrelationReport,
}

impl CorrelationEngine {
    /// Series must all have the same length.
    pub fn new(labels: Vec<String>, data: Vec<Vec<f64>>, noise_floor: f64) -> Result<Self> {
        if labels.len() != data.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: data.len(),
            });
        }
        let n = data.first().map_or(0, Vec::len);
        let k = labels.len();
        let mut pairwise = vec![vec![Corr::Value(1.0); k]; k];
        for i in 0..k {
            for j in i..k {
                let c = correlation(&data[i], &data[j])?;
                let c = if i == j && !c.is_undefined() { Corr::Value(1.0) } else { c };
                pairwise[i][j] = c;
                pairwise[j][i] = c;
            }
        }
        Ok(Self {
            report: CorrelationReport {
                labels: labels.clone(),
                pairwise,
                conditional: Vec::new(),
                n_samples: n,
                noise_floor,
            },
            labels,
            data,
            noisy: None,
            cache: HashMap::new(),
        })
    }

    /// Engine over the named channels of the settled part of `trace`
    /// (all channels when `channels` is empty).
    pub fn from_trace(trace: &Trace, channels: &[&str], noise_floor: f64) -> Result<Self> {
        let settled = trace.settled();
        let names: Vec<String> = if channels.is_empty() {
            settled.names().map(str::to_string).collect()
        } else {
            channels.iter().map(|s| s.to_string()).collect()
        };
        let data = names
            .iter()
            .map(|n| Ok(settled.channel(n)?.samples().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, data, noise_floor)
    }

    /// Undefined conditional entries will carry a value recomputed from a
    /// copy of the data with `fraction` measurement noise on every channel.
    pub fn with_regularization(mut self, trace: &Trace, fraction: f64, seed: u64) -> Result<Self> {
        let noisy = add_measurement_noise(&trace.settled(), fraction, seed)?;
        let data = self
            .labels
            .iter()
            .map(|n| Ok(noisy.channel(n)?.samples().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        self.noisy = Some(data);
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn report(&self) -> &CorrelationReport {
        &self.report
    }

    pub fn into_report(self) -> CorrelationReport {
        self.report
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.report.index(label)
    }

    /// Pairwise correlation by index.
    pub fn pairwise(&self, i: usize, j: usize) -> Corr {
        self.report.pairwise[i][j]
    }

    /// Partial correlation of series `i` and `j` given `given` (indices).
    pub fn conditional_idx(&mut self, i: usize, j: usize, given: &[usize]) -> Result<Corr> {
        if given.is_empty() {
            return Ok(self.pairwise(i, j));
        }
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let mut g = given.to_vec();
        g.sort_unstable();
        g.dedup();
        let key = (a, b, g.clone());
        if let Some(c) = self.cache.get(&key) {
            return Ok(*c);
        }
        let zs: Vec<&[f64]> = g.iter().map(|&k| self.data[k].as_slice()).collect();
        let mut c = partial_correlation(&self.data[a], &self.data[b], &zs)?;
        if let (Corr::Undefined { regularized, .. }, Some(noisy)) = (&mut c, &self.noisy) {
            let zs: Vec<&[f64]> = g.iter().map(|&k| noisy[k].as_slice()).collect();
            *regularized = partial_correlation(&noisy[a], &noisy[b], &zs)?.value();
        }
        self.cache.insert(key, c);
        self.report.conditional.push(ConditionalEntry {
            x: self.labels[a].clone(),
            y: self.labels[b].clone(),
            given: g.iter().map(|&k| self.labels[k].clone()).collect(),
            value: c,
        });
        Ok(c)
    }

    pub fn conditional(&mut self, x: &str, y: &str, given: &[&str]) -> Result<Corr> {
        let (i, j) = (self.index(x)?, self.index(y)?);
        let g = given.iter().map(|n| self.index(n)).collect::<Result<Vec<_>>>()?;
        if g.contains(&i) || g.contains(&j) {
            return Err(Error::invalid("given", "conditioning set contains x or y"));
        }
        self.conditional_idx(i, j, &g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::white_noise;

    #[test]
    fn report_is_symmetric_with_unit_diagonal() {
        let a = white_noise(1, 500);
        let b: Vec<f64> = a.iter().zip(white_noise(2, 500)).map(|(x, y)| x + y).collect();
        let c = vec![1.0; 500];
        let e = CorrelationEngine::new(vec!["a".into(), "b".into(), "c".into()], vec![a, b, c], 0.05).unwrap();
        let r = e.report();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(r.pairwise[i][j], r.pairwise[j][i]);
            }
        }
        assert_eq!(r.get("a", "a").unwrap(), Corr::Value(1.0));
        assert!(r.get("a", "c").unwrap().is_undefined());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(",a,b,c\n"));
        assert!(text.contains("undef"));
    }

    #[test]
    fn conditional_queries_are_recorded_once() {
        let z = white_noise(3, 400);
        let x: Vec<f64> = z.iter().zip(white_noise(4, 400)).map(|(a, b)| a + b).collect();
        let y: Vec<f64> = z.iter().zip(white_noise(5, 400)).map(|(a, b)| a - b).collect();
        let mut e = CorrelationEngine::new(vec!["x".into(), "y".into(), "z".into()], vec![x, y, z], 0.05).unwrap();
        let c1 = e.conditional("x", "y", &["z"]).unwrap();
        let c2 = e.conditional("y", "x", &["z"]).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(e.report().conditional.len(), 1);
        assert!(e.report().find_conditional("y", "x", &["z"]).is_some());
        assert!(e.conditional("x", "y", &["x"]).is_err());
        let json = e.report().to_json();
        let back: CorrelationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, e.report());
    }
}
