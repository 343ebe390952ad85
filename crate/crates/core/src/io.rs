//! File formats: χ-matrix JSON, count-record and trace JSONL, fit reports
//! and ensemble snapshots.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::apparatus::{CountRecord, Exposure, MeasurementConfig, Mode};
use crate::bayes::ParticleEnsemble;
use crate::diagnostics::TracePoint;
use crate::error::{Error, Result};
use crate::quantum::linalg::{c64, CMatrix};
use crate::quantum::ChiMatrix;

/// `{"d": 2, "trace_preserving": true, "mat": [[[re, im], …], …]}` with
/// `mat` listed row by row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiJson {
    pub d: usize,
    pub trace_preserving: bool,
    pub mat: Vec<Vec<[f64; 2]>>,
}

impl From<&ChiMatrix> for ChiJson {
    fn from(chi: &ChiMatrix) -> Self {
        let m = chi.mat();
        let mat = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self {
            d: chi.dim(),
            trace_preserving: chi.is_trace_preserving(),
            mat,
        }
    }
}

impl TryFrom<ChiJson> for ChiMatrix {
    type Error = Error;
    fn try_from(j: ChiJson) -> Result<Self> {
        let n = j.d * j.d;
        if j.mat.len() != n || j.mat.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("χ for d={} must be {n}x{n}", j.d)));
        }
        let m = CMatrix::from_fn(n, n, |i, k| c64(j.mat[i][k][0], j.mat[i][k][1]));
        ChiMatrix::new(j.d, m, j.trace_preserving)
    }
}

pub fn chi_to_string(chi: &ChiMatrix) -> String {
    serde_json::to_string(&ChiJson::from(chi)).expect("plain data serializes")
}

pub fn chi_from_str(s: &str) -> Result<ChiMatrix> {
    serde_json::from_str::<ChiJson>(s)?.try_into()
}

pub fn read_chi(path: &Path) -> Result<ChiMatrix> {
    chi_from_str(&fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    cfg: [f64; 4],
    n: [u64; 2],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    b: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    t: Option<f64>,
    mode: Mode,
}

pub fn record_to_line(rec: &CountRecord) -> String {
    let (b, t) = match rec.exposure {
        Exposure::Block(b) => (Some(b), None),
        Exposure::Duration(t) => (None, Some(t)),
    };
    let j = RecordJson {
        cfg: rec.config.as_array(),
        n: rec.counts,
        b,
        t,
        mode: rec.mode(),
    };
    serde_json::to_string(&j).expect("plain data serializes")
}

pub fn record_from_line(line: &str) -> Result<CountRecord> {
    let j: RecordJson = serde_json::from_str(line)?;
    let exposure = match (j.mode, j.b, j.t) {
        (Mode::Tp, Some(b), None) => Exposure::Block(b),
        (Mode::Lossy, None, Some(t)) => Exposure::Duration(t),
        _ => {
            return Err(Error::Parse(
                "a record carries \"b\" in tp mode or \"t\" in lossy mode".into(),
            ))
        }
    };
    CountRecord::new(MeasurementConfig::from_array(j.cfg)?, j.n, exposure)
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(&it).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

pub fn trace_to_jsonl(trace: &[TracePoint]) -> String {
    jsonl(trace)
}

pub fn records_to_jsonl(records: &[CountRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&record_to_line(r));
        out.push('\n');
    }
    out
}

fn read_lines<T>(path: &Path, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let f = BufReader::new(fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse(&line).map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), i + 1)))?);
    }
    Ok(out)
}

/// Reads a trace and checks that `N` strictly increases.
pub fn read_trace(path: &Path) -> Result<Vec<TracePoint>> {
    let trace = read_lines(path, |l| Ok(serde_json::from_str::<TracePoint>(l)?))?;
    if trace.windows(2).any(|w| w[1].n <= w[0].n) {
        return Err(Error::Parse(format!("{}: N is not strictly increasing", path.display())));
    }
    Ok(trace)
}

pub fn read_records(path: &Path) -> Result<Vec<CountRecord>> {
    read_lines(path, record_from_line)
}

#[derive(Serialize)]
struct ParticleJson {
    weight: f64,
    chi: ChiJson,
}

#[derive(Serialize)]
struct SnapshotJson {
    mode: Mode,
    particles: Vec<ParticleJson>,
}

/// Particle χ's and weights.
pub fn snapshot_to_string(ens: &ParticleEnsemble) -> String {
    let s = SnapshotJson {
        mode: ens.mode(),
        particles: ens
            .particles()
            .iter()
            .map(|p| ParticleJson {
                weight: p.weight(),
                chi: p.chi().into(),
            })
            .collect(),
    };
    serde_json::to_string(&s).expect("plain data serializes")
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::make_channel;

    #[test]
    fn chi_round_trip() {
        let chi = make_channel(&"waveplate:30,1.2".parse().unwrap()).unwrap();
        let back = chi_from_str(&chi_to_string(&chi)).unwrap();
        assert_eq!(back.mat(), chi.mat());
        assert!(back.is_trace_preserving());
        assert!(chi_from_str(r#"{"d":2,"trace_preserving":true,"mat":[[[1,0]]]}"#).is_err());
    }

    #[test]
    fn record_lines() {
        let cfg = MeasurementConfig::new(1.0, 2.0, 3.0, 4.5).unwrap();
        let tp = CountRecord::new(cfg, [3, 4], Exposure::Block(7)).unwrap();
        let line = record_to_line(&tp);
        assert_eq!(line, r#"{"cfg":[1.0,2.0,3.0,4.5],"n":[3,4],"b":7,"mode":"tp"}"#);
        assert_eq!(record_from_line(&line).unwrap(), tp);
        let lossy = CountRecord::new(cfg, [3, 4], Exposure::Duration(0.25)).unwrap();
        assert_eq!(record_from_line(&record_to_line(&lossy)).unwrap(), lossy);
        assert!(record_from_line(r#"{"cfg":[0,0,0,0],"n":[1,1],"t":1.0,"mode":"tp"}"#).is_err());
    }

    #[test]
    fn trace_file_round_trip_and_monotonicity() {
        let dir = tempfile::tempdir().unwrap();
        let p = |n| TracePoint {
            n,
            d2_truth: None,
            dist_size: 0.1,
            chi2_norm: 0.0,
            r_dd: None,
            ess: 10.0,
        };
        let path = dir.path().join("t.jsonl");
        let trace = vec![p(10), p(20)];
        write_atomic(&path, &trace_to_jsonl(&trace)).unwrap();
        assert_eq!(read_trace(&path).unwrap(), trace);
        write_atomic(&path, &trace_to_jsonl(&[p(20), p(10)])).unwrap();
        assert!(read_trace(&path).is_err());
    }
}
