use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use crate::numkit::DenseMatrix;
use crate::switchsim::{Schedule, Trajectory};

use super::CliError;

/// Flat `key=value` record, kept in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_owned(), value.to_string()));
    }

    /// Replaces the value for `key`, appending if absent.
    pub fn set(&mut self, key: &str, value: impl Display) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value.to_string(),
            None => self.push(key, value),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render()).map_err(|e| io_err(path, e))
    }
}

pub(crate) fn io_err(path: &Path, e: impl Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Formats a vector as `[a;b;c]` for summary values.
pub fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(";"))
}

pub fn fmt_matrix(m: &DenseMatrix) -> String {
    let rows: Vec<String> = m.to_rows().iter().map(|r| fmt_vec(r)).collect();
    format!("[{}]", rows.join(";"))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn write_rows(path: &Path, header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<PathBuf, CliError> {
    let mut w = writer(path)?;
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(path.to_path_buf())
}

fn state_columns(prefix: &str, m: usize, n: usize) -> Vec<String> {
    (1..=m)
        .flat_map(|i| (1..=n).map(move |c| format!("{prefix}{i}_{c}")))
        .collect()
}

/// `t, w…, [wt…], [eta…], e` with one row per sample.
pub fn write_trajectory_csv(path: &Path, tr: &Trajectory) -> Result<PathBuf, CliError> {
    let (m, n) = (tr.agent_states[0].rows(), tr.agent_states[0].cols());
    let mut header = vec!["t".to_owned()];
    header.extend(state_columns("w", m, n));
    if tr.observer_states.is_some() {
        header.extend(state_columns("wt", m, n));
    }
    if tr.compensator_states.is_some() {
        header.extend(state_columns("eta", m, n));
    }
    header.push("e".into());
    let rows = (0..tr.times.len()).map(|k| {
        let mut r = vec![tr.times[k].to_string()];
        r.extend(tr.agent_states[k].as_slice().iter().map(|v| v.to_string()));
        for block in [&tr.observer_states, &tr.compensator_states].into_iter().flatten() {
            r.extend(block[k].as_slice().iter().map(|v| v.to_string()));
        }
        r.push(tr.error_series[k].to_string());
        r
    });
    write_rows(path, header, rows)
}

/// `t, e`.
pub fn write_error_csv(path: &Path, times: &[f64], e: &[f64]) -> Result<PathBuf, CliError> {
    let rows = times.iter().zip(e).map(|(t, v)| vec![t.to_string(), v.to_string()]);
    write_rows(path, vec!["t".into(), "e".into()], rows)
}

/// Step data for σ(t): one row per switch time plus the horizon; 1-based modes.
pub fn write_sigma_csv(path: &Path, schedule: &Schedule) -> Result<PathBuf, CliError> {
    let mut rows: Vec<Vec<String>> = schedule
        .intervals()
        .iter()
        .map(|iv| vec![iv.start.to_string(), (iv.mode + 1).to_string()])
        .collect();
    let last = *schedule.modes().last().unwrap();
    rows.push(vec![schedule.horizon().to_string(), (last + 1).to_string()]);
    write_rows(path, vec!["t".into(), "sigma".into()], rows.into_iter())
}

/// Agent-coordinate states `z` (m x n each) at the given times.
pub fn write_states_csv(path: &Path, prefix: &str, times: &[f64], states: &[DenseMatrix]) -> Result<PathBuf, CliError> {
    let (m, n) = (states[0].rows(), states[0].cols());
    let mut header = vec!["t".to_owned()];
    header.extend(state_columns(prefix, m, n));
    let rows = times.iter().zip(states).map(|(t, s)| {
        let mut r = vec![t.to_string()];
        r.extend(s.as_slice().iter().map(|v| v.to_string()));
        r
    });
    write_rows(path, header, rows)
}

/// Generic table writer.
pub fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<PathBuf, CliError> {
    write_rows(path, header.iter().map(|h| h.to_string()).collect(), rows.into_iter())
}
