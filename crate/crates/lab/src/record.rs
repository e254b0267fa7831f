//! Per-replicate records and aggregate rows, with their file formats.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::stats::Estimate;
use crate::{LabError, Result};

pub const HEADER: [&str; 25] = [
    "experiment",
    "d",
    "L",
    "topology",
    "bc",
    "kind",
    "p",
    "K",
    "replicate",
    "seed",
    "exact",
    "R2",
    "droplet_size",
    "boundary_size",
    "delta",
    "ratio",
    "size_ok",
    "bound_ok",
    "Dsize",
    "DboundarySize",
    "event",
    "r",
    "energy0",
    "energy1",
    "walltime_ms",
];

/// One row per parameter point and replicate. Fields an experiment does not
/// measure stay empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub topology: String,
    pub bc: String,
    pub kind: String,
    pub p: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub replicate: u64,
    pub seed: u64,
    pub exact: bool,
    #[serde(rename = "R2")]
    pub r2: Option<f64>,
    pub droplet_size: Option<usize>,
    pub boundary_size: Option<usize>,
    pub delta: Option<f64>,
    pub ratio: Option<f64>,
    pub size_ok: Option<bool>,
    pub bound_ok: Option<bool>,
    #[serde(rename = "Dsize")]
    pub d_size: Option<usize>,
    #[serde(rename = "DboundarySize")]
    pub d_boundary_size: Option<usize>,
    pub event: Option<bool>,
    pub r: Option<usize>,
    pub energy0: Option<f64>,
    pub energy1: Option<f64>,
    pub walltime_ms: Option<f64>,
}

/// 17 significant digits, enough to read back the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn opt<T>(value: Option<T>, f: impl FnOnce(T) -> String) -> String {
    value.map(f).unwrap_or_default()
}

impl Record {
    fn cells(&self) -> [String; 25] {
        [
            self.experiment.clone(),
            self.d.to_string(),
            self.l.to_string(),
            self.topology.clone(),
            self.bc.clone(),
            self.kind.clone(),
            opt(self.p, fmt_f64),
            opt(self.k, fmt_f64),
            self.replicate.to_string(),
            self.seed.to_string(),
            self.exact.to_string(),
            opt(self.r2, fmt_f64),
            opt(self.droplet_size, |x| x.to_string()),
            opt(self.boundary_size, |x| x.to_string()),
            opt(self.delta, fmt_f64),
            opt(self.ratio, fmt_f64),
            opt(self.size_ok, |x| x.to_string()),
            opt(self.bound_ok, |x| x.to_string()),
            opt(self.d_size, |x| x.to_string()),
            opt(self.d_boundary_size, |x| x.to_string()),
            opt(self.event, |x| x.to_string()),
            opt(self.r, |x| x.to_string()),
            opt(self.energy0, fmt_f64),
            opt(self.energy1, fmt_f64),
            opt(self.walltime_ms, fmt_f64),
        ]
    }

    fn from_cells(cells: &csv::StringRecord, line: usize) -> Result<Self> {
        let bad = |column: &str, value: &str| LabError::Format {
            path: "records".into(),
            line,
            message: format!("column {column}: cannot parse `{value}`"),
        };
        let cell = |k: usize| cells.get(k).unwrap_or("");
        fn parse<T: std::str::FromStr>(s: &str) -> Option<Option<T>> {
            if s.is_empty() {
                Some(None)
            } else {
                s.parse().ok().map(Some)
            }
        }
        macro_rules! optional {
            ($k:expr) => {
                parse(cell($k)).ok_or_else(|| bad(HEADER[$k], cell($k)))?
            };
        }
        macro_rules! required {
            ($k:expr) => {
                cell($k).parse().map_err(|_| bad(HEADER[$k], cell($k)))?
            };
        }
        if cells.len() != HEADER.len() {
            return Err(LabError::Format {
                path: "records".into(),
                line,
                message: format!("expected {} columns, found {}", HEADER.len(), cells.len()),
            });
        }
        Ok(Self {
            experiment: cell(0).into(),
            d: required!(1),
            l: required!(2),
            topology: cell(3).into(),
            bc: cell(4).into(),
            kind: cell(5).into(),
            p: optional!(6),
            k: optional!(7),
            replicate: required!(8),
            seed: required!(9),
            exact: required!(10),
            r2: optional!(11),
            droplet_size: optional!(12),
            boundary_size: optional!(13),
            delta: optional!(14),
            ratio: optional!(15),
            size_ok: optional!(16),
            bound_ok: optional!(17),
            d_size: optional!(18),
            d_boundary_size: optional!(19),
            event: optional!(20),
            r: optional!(21),
            energy0: optional!(22),
            energy1: optional!(23),
            walltime_ms: optional!(24),
        })
    }
}

pub fn write_csv<W: Write>(records: &[Record], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(r.cells())?;
    }
    w.flush().map_err(|e| LabError::io("records", e))?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<Record>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(LabError::Format { path: "records".into(), line: 1, message: "unexpected header".into() });
    }
    reader.records().enumerate().map(|(k, row)| Record::from_cells(&row?, k + 2)).collect()
}

pub fn write_jsonl<W: Write>(records: &[Record], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| LabError::io("records", e))?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<Record>> {
    input
        .lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l.map_err(|e| LabError::io("records", e))?)?))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

/// Replaces `path` in one step once the whole file is written.
pub fn write_atomic(path: &Path, contents: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| LabError::io(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        contents(&mut buf)?;
        buf.flush().map_err(|e| LabError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| LabError::io(path, e.error))?;
    Ok(())
}

pub fn write_records(records: &[Record], path: &Path, format: Format) -> Result<()> {
    write_atomic(path, |w| match format {
        Format::Csv => write_csv(records, w),
        Format::Jsonl => write_jsonl(records, w),
    })
}

pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    let file = std::fs::File::open(path).map_err(|e| LabError::io(path, e))?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        read_jsonl(std::io::BufReader::new(file))
    } else {
        read_csv(file)
    }
}

/// One parameter point of the aggregate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub experiment: String,
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub kind: String,
    pub p: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    /// What the estimate is of, e.g. `R2` or `P(event)`.
    pub quantity: String,
    /// Extra coordinates of the point without spaces, e.g. `r=2` or `pair=7-8`.
    pub label: String,
    pub estimate: Estimate,
    /// A reference value such as a proven bound, when one applies.
    pub reference: Option<f64>,
}

impl AggregateRow {
    pub fn new(base: &Record, quantity: impl Into<String>, estimate: Estimate) -> Self {
        Self {
            experiment: base.experiment.clone(),
            d: base.d,
            l: base.l,
            kind: base.kind.clone(),
            p: base.p,
            k: base.k,
            quantity: quantity.into(),
            label: "-".into(),
            estimate,
            reference: None,
        }
    }

    pub fn label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn reference(mut self, value: f64) -> Self {
        self.reference = Some(value);
        self
    }
}

/// Whitespace-separated table with a `#` header line, readable by gnuplot.
pub fn write_aggregate_table<W: Write>(rows: &[AggregateRow], mut out: W) -> Result<()> {
    let io = |e| LabError::io("aggregate", e);
    writeln!(out, "# experiment d L kind p K quantity label n mean stderr lo95 hi95 reference").map_err(io)?;
    let or_nan = |x: Option<f64>| fmt_f64(x.unwrap_or(f64::NAN));
    for r in rows {
        let e = &r.estimate;
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {} {} {} {} {}",
            r.experiment,
            r.d,
            r.l,
            if r.kind.is_empty() { "-" } else { &r.kind },
            or_nan(r.p),
            or_nan(r.k),
            r.quantity,
            r.label,
            e.n,
            fmt_f64(e.mean),
            fmt_f64(e.stderr),
            fmt_f64(e.lo95),
            fmt_f64(e.hi95),
            or_nan(r.reference),
        )
        .map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ea_core::disorder::Stream;
    use ea_core::rng::CounterRng;

    fn random_record(rng: &mut CounterRng) -> Record {
        let mut maybe = |x: f64| if rng.sign() > 0 { Some(x) } else { None };
        let mut r = Record {
            experiment: "chaos".into(),
            d: 2,
            l: 5,
            topology: "open".into(),
            bc: "fixed-plus".into(),
            kind: "rotate".into(),
            ..Record::default()
        };
        r.p = maybe(0.3);
        r.r2 = maybe(1.0 / 3.0);
        r.delta = maybe(-1e-300);
        r.ratio = maybe(123456.789e10);
        r.energy0 = maybe(-std::f64::consts::PI);
        r.energy1 = maybe(f64::MIN_POSITIVE);
        r.droplet_size = Some(7);
        r.event = Some(true);
        r
    }

    #[test]
    fn csv_and_jsonl_round_trip_bit_exactly() {
        let mut rng = CounterRng::new(1, &Stream::new("records"));
        let records: Vec<Record> = (0..1000)
            .map(|k| {
                let mut r = random_record(&mut rng);
                r.replicate = k;
                r.energy0 = Some(rng.normal() * 1e3);
                r.r2 = Some(rng.uniform());
                r
            })
            .collect();
        let mut csv_bytes = Vec::new();
        write_csv(&records, &mut csv_bytes).unwrap();
        let back = read_csv(csv_bytes.as_slice()).unwrap();
        assert_eq!(back, records);
        for (a, b) in back.iter().zip(&records) {
            assert_eq!(a.energy0.map(f64::to_bits), b.energy0.map(f64::to_bits));
        }
        let mut json_bytes = Vec::new();
        write_jsonl(&records, &mut json_bytes).unwrap();
        assert_eq!(read_jsonl(json_bytes.as_slice()).unwrap(), records);
    }

    #[test]
    fn header_has_the_fixed_schema() {
        let mut bytes = Vec::new();
        write_csv(&[], &mut bytes).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.trim_end().split(',').count(), 25);
        assert!(text.starts_with("experiment,d,L,topology,bc,kind,p,K,replicate,seed,exact,R2,"));
        assert!(text.trim_end().ends_with("energy0,energy1,walltime_ms"));
    }

    #[test]
    fn json_uses_the_same_field_names() {
        let mut bytes = Vec::new();
        write_jsonl(&[Record::default()], &mut bytes).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let keys: Vec<&str> = value.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        let mut expected = HEADER.to_vec();
        expected.sort_unstable();
        let mut keys = keys;
        keys.sort_unstable();
        assert_eq!(keys, expected);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        std::fs::write(&path, "stale").unwrap();
        write_records(&[Record::default()], &path, Format::Csv).unwrap();
        assert_eq!(read_records(&path).unwrap(), vec![Record::default()]);
        let jsonl = dir.path().join("out.jsonl");
        write_records(&[Record::default()], &jsonl, Format::Jsonl).unwrap();
        assert_eq!(read_records(&jsonl).unwrap(), vec![Record::default()]);
    }

    #[test]
    fn malformed_rows_are_reported() {
        let text = format!("{}\nchaos,2,x\n", HEADER.join(","));
        assert!(matches!(read_csv(text.as_bytes()), Err(LabError::Format { line: 2, .. })));
    }
}
