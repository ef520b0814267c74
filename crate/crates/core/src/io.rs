//! File formats: binary and JSON time series, binary matrices, model files.
//!
//! Binary files are little-endian. Every writer/reader pair round-trips
//! `f64` values bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::dynamics::{TfimParams, TimeSeries};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::ngrc::{FeatureConfig, Layout, ModelDiagnostics, WeightModel};
use crate::state::StateVector;

pub const SERIES_MAGIC: &[u8; 8] = b"QNGRCTS1";
pub const MATRIX_MAGIC: &[u8; 8] = b"QNGRCMX1";
pub const MODEL_FORMAT: &str = "qngrc-model-1";

/// Refuses headers announcing more than this many amplitudes.
const MAX_AMPLITUDES: u64 = 1 << 32;

struct Le<R>(R);

impl<R: Read> Le<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).map_err(truncated)?;
        Ok(b)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn c64(&mut self) -> Result<c64> {
        Ok(c64::new(self.f64()?, self.f64()?))
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

fn put_c64(w: &mut impl Write, z: c64) -> Result<()> {
    w.write_all(&z.re.to_le_bytes())?;
    w.write_all(&z.im.to_le_bytes())?;
    Ok(())
}

fn check_magic(r: &mut Le<impl Read>, magic: &[u8; 8]) -> Result<()> {
    let got: [u8; 8] = r.bytes()?;
    if &got != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

/// Layout: magic, `u64` count, `u64` dim, `f64` dt, `u64` burn_in,
/// `u64` start_step, `u64` origin length + UTF-8 bytes, `u8` model flag
/// (+ `u64` n, `f64` J, `f64` h), then `count * dim` amplitudes as
/// `(re, im)` pairs, state by state.
pub fn write_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SERIES_MAGIC)?;
    w.write_all(&(series.len() as u64).to_le_bytes())?;
    w.write_all(&(series.dim() as u64).to_le_bytes())?;
    w.write_all(&series.dt.to_le_bytes())?;
    w.write_all(&series.burn_in.to_le_bytes())?;
    w.write_all(&series.start_step.to_le_bytes())?;
    w.write_all(&(series.origin.len() as u64).to_le_bytes())?;
    w.write_all(series.origin.as_bytes())?;
    match series.model {
        Some(m) => {
            w.write_all(&[1])?;
            w.write_all(&(m.n_qubits as u64).to_le_bytes())?;
            w.write_all(&m.coupling.to_le_bytes())?;
            w.write_all(&m.field.to_le_bytes())?;
        }
        None => w.write_all(&[0])?,
    }
    for s in &series.states {
        for &z in s.amplitudes() {
            put_c64(&mut w, z)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let mut r = Le(BufReader::new(File::open(path)?));
    check_magic(&mut r, SERIES_MAGIC)?;
    let count = r.u64()?;
    let dim = r.u64()?;
    if count.checked_mul(dim).is_none_or(|n| n > MAX_AMPLITUDES) {
        return Err(Error::Format(format!(
            "implausible header: {count} states of dimension {dim}"
        )));
    }
    let dt = r.f64()?;
    let burn_in = r.u64()?;
    let start_step = r.u64()?;
    let origin_len = r.u64()?;
    if origin_len > 1 << 20 {
        return Err(Error::Format(format!("origin of {origin_len} bytes")));
    }
    let mut origin = vec![0u8; origin_len as usize];
    r.0.read_exact(&mut origin).map_err(truncated)?;
    let origin = String::from_utf8(origin).map_err(|_| Error::Format("origin is not UTF-8".into()))?;
    let [flag] = r.bytes::<1>()?;
    let model = match flag {
        0 => None,
        1 => Some(TfimParams {
            n_qubits: r.u64()? as usize,
            coupling: r.f64()?,
            field: r.f64()?,
        }),
        other => return Err(Error::Format(format!("model flag {other}"))),
    };
    let mut states = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let amps = (0..dim).map(|_| r.c64()).collect::<Result<Vec<_>>>()?;
        states.push(StateVector::new(amps)?);
    }
    if r.0.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Format("trailing bytes after the last state".into()));
    }
    Ok(TimeSeries {
        states,
        dt,
        burn_in,
        start_step,
        origin,
        model,
    })
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    dt: f64,
    burn_in: u64,
    start_step: u64,
    origin: String,
    model: Option<TfimParams>,
    /// `states[i][j] = [re, im]`.
    states: Vec<Vec<[f64; 2]>>,
}

/// Same content as [`write_series`] as JSON.
pub fn write_series_json(path: &Path, series: &TimeSeries) -> Result<()> {
    let doc = SeriesJson {
        dt: series.dt,
        burn_in: series.burn_in,
        start_step: series.start_step,
        origin: series.origin.clone(),
        model: series.model,
        states: series
            .states
            .iter()
            .map(|s| s.amplitudes().iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &doc)?;
    w.flush()?;
    Ok(())
}

pub fn read_series_json(path: &Path) -> Result<TimeSeries> {
    let doc: SeriesJson = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    let states = doc
        .states
        .into_iter()
        .map(|s| StateVector::new(s.into_iter().map(|[re, im]| c64::new(re, im)).collect()))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = states.first() {
        if states.iter().any(|s| s.dim() != first.dim()) {
            return Err(Error::Format("states of different dimensions".into()));
        }
    }
    Ok(TimeSeries {
        states,
        dt: doc.dt,
        burn_in: doc.burn_in,
        start_step: doc.start_step,
        origin: doc.origin,
        model: doc.model,
    })
}

/// Reads either series format, chosen by the file's first byte.
pub fn read_series_any(path: &Path) -> Result<TimeSeries> {
    let mut first = [0u8; 1];
    File::open(path)?.read_exact(&mut first).map_err(truncated)?;
    if first[0] == b'{' {
        read_series_json(path)
    } else {
        read_series(path)
    }
}

/// Layout: magic, `u64` rows, `u64` cols, entries column-major as `(re, im)`.
pub fn write_matrix(path: &Path, m: &CMat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            put_c64(&mut w, m[(i, j)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<CMat> {
    let mut r = Le(BufReader::new(File::open(path)?));
    check_magic(&mut r, MATRIX_MAGIC)?;
    let rows = r.u64()?;
    let cols = r.u64()?;
    if rows.checked_mul(cols).is_none_or(|n| n > MAX_AMPLITUDES) {
        return Err(Error::Format(format!("implausible shape {rows}x{cols}")));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let data = (0..rows * cols).map(|_| r.c64()).collect::<Result<Vec<_>>>()?;
    Ok(Mat::from_fn(rows, cols, |i, j| data[j * rows + i]))
}

/// JSON matrix, column-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_mat(m: &CMat) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_mat(&self) -> Result<CMat> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Format(format!(
                "{} entries for a {}x{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(Mat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[j * self.rows + i];
            c64::new(re, im)
        }))
    }
}

/// First line of a model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelHeader {
    pub format: String,
    pub config: FeatureConfig,
    pub layout: Layout,
    pub diagnostics: ModelDiagnostics,
    pub rows: usize,
    pub cols: usize,
}

/// Layout: one line of compact JSON [`ModelHeader`], then `W` row-major as
/// `(re, im)` little-endian pairs.
pub fn write_model(path: &Path, model: &WeightModel) -> Result<()> {
    let header = ModelHeader {
        format: MODEL_FORMAT.into(),
        config: model.config,
        layout: model.layout,
        diagnostics: model.diagnostics(),
        rows: model.w.nrows(),
        cols: model.w.ncols(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for i in 0..model.w.nrows() {
        for j in 0..model.w.ncols() {
            put_c64(&mut w, model.w[(i, j)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_model_header(path: &Path) -> Result<ModelHeader> {
    read_header(&mut BufReader::new(File::open(path)?))
}

fn read_header(r: &mut impl BufRead) -> Result<ModelHeader> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("model header is not terminated".into()));
    }
    let header: ModelHeader = serde_json::from_slice(&line)?;
    if header.format != MODEL_FORMAT {
        return Err(Error::Format(format!(
            "model format `{}`, expected `{MODEL_FORMAT}`",
            header.format
        )));
    }
    Ok(header)
}

pub fn read_model(path: &Path) -> Result<WeightModel> {
    let mut r = BufReader::new(File::open(path)?);
    let h = read_header(&mut r)?;
    h.config.validate()?;
    let n = h.rows.checked_mul(h.cols).filter(|&n| n as u64 <= MAX_AMPLITUDES);
    let Some(n) = n else {
        return Err(Error::Format(format!("implausible shape {}x{}", h.rows, h.cols)));
    };
    let mut r = Le(r);
    let data = (0..n).map(|_| r.c64()).collect::<Result<Vec<_>>>()?;
    let mut rest = [0u8; 1];
    if r.0.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after the weight matrix".into()));
    }
    let w = Mat::from_fn(h.rows, h.cols, |i, j| data[i * h.cols + j]);
    Ok(WeightModel::from_parts(w, h.config, h.layout, h.diagnostics))
}
