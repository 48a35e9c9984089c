//! File formats: group cache, channel JSON, result and summary CSVs, plot
//! data and run manifests.
//!
//! Every CSV starts with a `# config_hash=<hex>` line followed by a header
//! row; JSON outputs carry a `config_hash` field.

use std::path::{Path, PathBuf};

use leakrb_core::channel::Channel;
use leakrb_core::clifford::CliffordGroup;
use leakrb_core::engine::{LengthSummary, SequenceResult, VarianceCurve};
use leakrb_core::linalg::ComplexMatrix;
use leakrb_core::C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const HASH_PREFIX: &str = "# config_hash=";

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(
            "matrix must be square and non-empty".into(),
        ));
    }
    let data = rows
        .iter()
        .flatten()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    Ok(ComplexMatrix::from_vec(n, n, data)?)
}

/// Group cache: fingerprint-ordered elements, flattened row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupCacheFile {
    pub n_qubits: usize,
    pub generators: Vec<String>,
    pub elements: Vec<Vec<[f64; 2]>>,
    pub words: Vec<Vec<u8>>,
}

pub fn write_group_cache(path: &Path, group: &CliffordGroup) -> Result<()> {
    let file = GroupCacheFile {
        n_qubits: group.n_qubits(),
        generators: group.generator_names().to_vec(),
        elements: group
            .elements()
            .iter()
            .map(|u| u.as_slice().iter().map(|z| [z.re, z.im]).collect())
            .collect(),
        words: group.words().to_vec(),
    };
    write_json(path, &file)
}

/// Reloads a cache, re-running the cardinality, unitarity and uniqueness
/// checks.
pub fn read_group_cache(path: &Path) -> Result<CliffordGroup> {
    let file: GroupCacheFile = read_json(path)?;
    let dim = 1usize << file.n_qubits.min(8);
    let elements = file
        .elements
        .iter()
        .map(|flat| {
            let data = flat.iter().map(|&[re, im]| C64::new(re, im)).collect();
            ComplexMatrix::from_vec(dim, dim, data)
        })
        .collect::<leakrb_core::Result<Vec<_>>>()
        .map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))?;
    CliffordGroup::from_parts(file.n_qubits, file.generators, elements, file.words).map_err(|e| {
        match e {
            leakrb_core::Error::InvalidArgument(m) => {
                CliError::Config(format!("{}: {m}", path.display()))
            }
            other => CliError::Integrity(format!("{}: {other}", path.display())),
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub label: String,
    pub dim: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

impl ChannelFile {
    pub fn from_channel(ch: &Channel) -> Self {
        Self {
            label: ch.label().to_string(),
            dim: ch.dim(),
            kraus: ch.kraus().iter().map(matrix_to_rows).collect(),
        }
    }

    /// Validates dimensions and trace preservation.
    pub fn to_channel(&self) -> Result<Channel> {
        let kraus = self
            .kraus
            .iter()
            .map(|k| matrix_from_rows(k))
            .collect::<Result<Vec<_>>>()?;
        if let Some(k) = kraus.iter().find(|k| k.rows() != self.dim) {
            return Err(CliError::Config(format!(
                "Kraus operator is {}x{}, channel declares dim {}",
                k.rows(),
                k.cols(),
                self.dim
            )));
        }
        Ok(Channel::new(kraus, self.label.clone())?)
    }
}

pub fn write_channel(path: &Path, ch: &Channel) -> Result<()> {
    write_json(path, &ChannelFile::from_channel(ch))
}

pub fn read_channel(path: &Path) -> Result<Channel> {
    read_json::<ChannelFile>(path)?.to_channel()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct ResultRow {
    y: usize,
    seq_index: usize,
    survival: f64,
    comp_population: f64,
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct SummaryRow {
    y: usize,
    mean: f64,
    stderr: f64,
    variance: f64,
    count: usize,
}

/// One row of the plot-data file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub y: usize,
    pub phi_mean: f64,
    pub phi_stderr: f64,
    pub phi_fit: f64,
}

/// Per-length variance table row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub y: usize,
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
    pub analytic_variance: Option<f64>,
}

pub fn write_csv<T: Serialize>(path: &Path, hash: &str, rows: &[T]) -> Result<()> {
    let mut buf = format!("{HASH_PREFIX}{hash}\n").into_bytes();
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        for r in rows {
            w.serialize(r)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    write_text(path, &String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Reads a hashed CSV; errors name the offending line.
pub fn read_csv<T: DeserializeOwned>(
    path: &Path,
    check: impl Fn(&T) -> Option<String>,
) -> Result<(String, Vec<T>)> {
    let text = read_text(path)?;
    let hash = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix(HASH_PREFIX))
        .map(|h| h.trim().to_string())
        .ok_or_else(|| {
            CliError::Integrity(format!("{}: line 1: missing config hash", path.display()))
        })?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line();
        let more = reader.read_record(&mut record).map_err(|e| {
            let at = e.position().map_or(line, |p| p.line());
            CliError::Config(format!("{}: line {at}: {e}", path.display()))
        })?;
        if !more {
            break;
        }
        let at = record.position().map_or(line, |p| p.line());
        let headers = reader
            .headers()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            .clone();
        let row: T = record
            .deserialize(Some(&headers))
            .map_err(|e| CliError::Config(format!("{}: line {at}: {e}", path.display())))?;
        if let Some(msg) = check(&row) {
            return Err(CliError::Config(format!(
                "{}: line {at}: {msg}",
                path.display()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok((hash, rows))
}

fn probability(name: &str, v: f64) -> Option<String> {
    (!(v.is_finite() && (0.0..=1.0 + 1e-9).contains(&v)))
        .then(|| format!("{name} {v} is not a probability"))
}

pub fn write_results(path: &Path, hash: &str, results: &[SequenceResult]) -> Result<()> {
    let rows: Vec<ResultRow> = results
        .iter()
        .map(|r| ResultRow {
            y: r.y,
            seq_index: r.sequence_index,
            survival: r.survival,
            comp_population: r.comp_population,
            seed: r.seed,
        })
        .collect();
    write_csv(path, hash, &rows)
}

pub fn read_results(path: &Path) -> Result<(String, Vec<SequenceResult>)> {
    let (hash, rows) = read_csv::<ResultRow>(path, |r| {
        probability("survival", r.survival)
            .or_else(|| probability("comp_population", r.comp_population))
            .or_else(|| {
                (r.survival > r.comp_population + 1e-9)
                    .then(|| "survival exceeds comp_population".to_string())
            })
    })?;
    let results = rows
        .into_iter()
        .map(|r| SequenceResult {
            y: r.y,
            sequence_index: r.seq_index,
            survival: r.survival,
            comp_population: r.comp_population,
            seed: r.seed,
        })
        .collect();
    Ok((hash, results))
}

pub fn write_summary(path: &Path, hash: &str, curve: &VarianceCurve) -> Result<()> {
    let rows: Vec<SummaryRow> = curve
        .points
        .iter()
        .map(|p| SummaryRow {
            y: p.y,
            mean: p.mean,
            stderr: p.stderr,
            variance: p.variance,
            count: p.count,
        })
        .collect();
    write_csv(path, hash, &rows)
}

pub fn read_summary(path: &Path) -> Result<(String, Vec<LengthSummary>)> {
    let (hash, rows) = read_csv::<SummaryRow>(path, |r| {
        probability("mean", r.mean)
            .or_else(|| {
                (!(r.stderr.is_finite() && r.stderr >= 0.0))
                    .then(|| format!("invalid stderr {}", r.stderr))
            })
            .or_else(|| {
                (!(r.variance.is_finite() && r.variance >= 0.0))
                    .then(|| format!("invalid variance {}", r.variance))
            })
            .or_else(|| (r.count == 0).then(|| "count must be >= 1".to_string()))
    })?;
    let points = rows
        .into_iter()
        .map(|r| LengthSummary {
            y: r.y,
            mean: r.mean,
            variance: r.variance,
            stderr: r.stderr,
            count: r.count,
        })
        .collect();
    Ok((hash, points))
}

/// Ground truth recorded alongside a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    /// Computational infidelity of the gate error, averaged over gates.
    pub gate_infidelity: Option<f64>,
    pub interleaved_infidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub command: String,
    pub master_seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub truth: Truth,
    pub config: serde_json::Value,
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use leakrb_core::channel::dilated_error;
    use leakrb_core::clifford::generate_clifford_group;
    use leakrb_core::rng_from_seed;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn group_cache_round_trips() {
        let dir = tmp();
        let path = dir.path().join("g.json");
        let g = generate_clifford_group(1).unwrap();
        write_group_cache(&path, &g).unwrap();
        let back = read_group_cache(&path).unwrap();
        assert_eq!(back.elements(), g.elements());
        assert_eq!(back.words(), g.words());
    }

    #[test]
    fn truncated_group_cache_fails_integrity() {
        let dir = tmp();
        let path = dir.path().join("g.json");
        write_group_cache(&path, &generate_clifford_group(1).unwrap()).unwrap();
        let mut file: GroupCacheFile = read_json(&path).unwrap();
        file.elements.pop();
        file.words.pop();
        write_json(&path, &file).unwrap();
        assert!(matches!(
            read_group_cache(&path),
            Err(CliError::Integrity(_))
        ));
    }

    #[test]
    fn channel_round_trips() {
        let dir = tmp();
        let path = dir.path().join("c.json");
        let ch = dilated_error(3, 2, 0.2, &mut rng_from_seed(1)).unwrap();
        write_channel(&path, &ch).unwrap();
        assert_eq!(read_channel(&path).unwrap(), ch);
        let mut file: ChannelFile = read_json(&path).unwrap();
        file.kraus[0][0][0][0] *= 1.5;
        write_json(&path, &file).unwrap();
        assert!(matches!(read_channel(&path), Err(CliError::Integrity(_))));
    }

    #[test]
    fn results_round_trip_exactly() {
        let dir = tmp();
        let path = dir.path().join("r.csv");
        let results = vec![
            SequenceResult {
                y: 1,
                sequence_index: 0,
                survival: 0.1 + 0.2,
                comp_population: 0.9999999999999999,
                seed: u64::MAX,
            },
            SequenceResult {
                y: 2,
                sequence_index: 0,
                survival: 1e-17,
                comp_population: 1.0,
                seed: 0,
            },
        ];
        write_results(&path, "abc", &results).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# config_hash=abc\ny,seq_index,survival,comp_population,seed\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_results(&path).unwrap(), ("abc".to_string(), results));
    }

    #[test]
    fn malformed_rows_report_their_line() {
        let dir = tmp();
        let path = dir.path().join("s.csv");
        std::fs::write(
            &path,
            "# config_hash=h\ny,mean,stderr,variance,count\n1,0.9,0.01,0.001,10\n2,oops,0.01,0.001,10\n",
        )
        .unwrap();
        let e = read_summary(&path).unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
        std::fs::write(
            &path,
            "# config_hash=h\ny,mean,stderr,variance,count\n1,1.5,0.01,0.001,10\n",
        )
        .unwrap();
        let e = read_summary(&path).unwrap_err().to_string();
        assert!(e.contains("line 3") && e.contains("probability"), "{e}");
        std::fs::write(
            &path,
            "# config_hash=h\ny,mean,stderr,variance,count\n1,0.5,0.01\n",
        )
        .unwrap();
        assert!(read_summary(&path)
            .unwrap_err()
            .to_string()
            .contains("line 3"));
    }

    #[test]
    fn missing_hash_is_an_integrity_failure() {
        let dir = tmp();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "y,mean,stderr,variance,count\n1,0.9,0.01,0.001,10\n").unwrap();
        assert!(matches!(read_summary(&path), Err(CliError::Integrity(_))));
    }
}
