//! Comma-separated output tables and their readers.
//!
//! Every float is written in scientific notation with 17 significant digits,
//! which round-trips an `f64` exactly. Missing values are written as `NaN`.

use std::io::{Read, Write};

use noonbloch_core::correlation::{CoincidenceTrace, CorrelationMatrix, PeriodEstimate};
use serde::Deserialize;
use thiserror::Error;

use crate::verify::{CheckRecord, CheckStatus, VerificationReport};

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed table: {0}")]
    Malformed(String),
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else {
        format!("{x:.16e}")
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn reader<R: Read>(r: R, headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(headers).flexible(!headers).from_reader(r)
}

fn check_headers<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), TableError> {
    let found = rdr.headers()?;
    if found.iter().ne(expected.iter().copied()) {
        return Err(TableError::Malformed(format!(
            "expected columns {expected:?}, found {:?}",
            found.iter().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct DensityRow {
    pub z: f64,
    pub site: i64,
    pub n: f64,
}

const DENSITY_COLUMNS: [&str; 3] = ["z", "site", "n"];

pub fn write_density<W: Write>(w: W, rows: &[DensityRow]) -> Result<(), TableError> {
    let mut wtr = writer(w);
    wtr.write_record(DENSITY_COLUMNS)?;
    for row in rows {
        wtr.write_record([fmt_f64(row.z), row.site.to_string(), fmt_f64(row.n)])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_density<R: Read>(r: R) -> Result<Vec<DensityRow>, TableError> {
    let mut rdr = reader(r, true);
    check_headers(&mut rdr, &DENSITY_COLUMNS)?;
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRow {
    pub z: f64,
    pub x: i64,
    pub y: i64,
    pub gamma: Option<f64>,
    pub degenerate: bool,
}

impl GammaRow {
    pub fn from_trace(trace: &CoincidenceTrace) -> Vec<GammaRow> {
        trace
            .points
            .iter()
            .map(|pt| GammaRow {
                z: pt.z,
                x: pt.right_site,
                y: pt.left_site,
                gamma: pt.gamma,
                degenerate: pt.degenerate,
            })
            .collect()
    }
}

const GAMMA_COLUMNS: [&str; 5] = ["z", "x", "y", "gamma", "degenerate"];

pub fn write_gamma<W: Write>(w: W, rows: &[GammaRow]) -> Result<(), TableError> {
    let mut wtr = writer(w);
    wtr.write_record(GAMMA_COLUMNS)?;
    for row in rows {
        wtr.write_record([
            fmt_f64(row.z),
            row.x.to_string(),
            row.y.to_string(),
            fmt_f64(row.gamma.unwrap_or(f64::NAN)),
            u8::from(row.degenerate).to_string(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_gamma<R: Read>(r: R) -> Result<Vec<GammaRow>, TableError> {
    #[derive(Deserialize)]
    struct Raw {
        z: f64,
        x: i64,
        y: i64,
        gamma: f64,
        degenerate: u8,
    }
    let mut rdr = reader(r, true);
    check_headers(&mut rdr, &GAMMA_COLUMNS)?;
    rdr.deserialize()
        .map(|raw| {
            let raw: Raw = raw?;
            let degenerate = match raw.degenerate {
                0 => false,
                1 => true,
                other => return Err(TableError::Malformed(format!("degenerate flag {other}"))),
            };
            Ok(GammaRow {
                z: raw.z,
                x: raw.x,
                y: raw.y,
                gamma: (!raw.gamma.is_nan()).then_some(raw.gamma),
                degenerate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct PeriodRecord {
    pub estimated_period: f64,
    pub predicted_period: f64,
    pub relative_error: f64,
}

impl PeriodRecord {
    pub fn new(estimate: &PeriodEstimate, predicted: f64) -> Self {
        Self {
            estimated_period: estimate.period,
            predicted_period: predicted,
            relative_error: (estimate.period - predicted).abs() / predicted,
        }
    }
}

const PERIOD_COLUMNS: [&str; 3] = ["estimated_period", "predicted_period", "relative_error"];

pub fn write_period<W: Write>(w: W, record: &PeriodRecord) -> Result<(), TableError> {
    let mut wtr = writer(w);
    wtr.write_record(PERIOD_COLUMNS)?;
    wtr.write_record([
        fmt_f64(record.estimated_period),
        fmt_f64(record.predicted_period),
        fmt_f64(record.relative_error),
    ])?;
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_period<R: Read>(r: R) -> Result<PeriodRecord, TableError> {
    let mut rdr = reader(r, true);
    check_headers(&mut rdr, &PERIOD_COLUMNS)?;
    let mut rows = rdr.deserialize::<PeriodRecord>();
    let record = rows
        .next()
        .ok_or_else(|| TableError::Malformed("period table has no record".into()))??;
    if rows.next().is_some() {
        return Err(TableError::Malformed("period table has more than one record".into()));
    }
    Ok(record)
}

/// Dense correlation matrix at one distance.
///
/// Layout: three `key,value` lines (`z`, `p`, `q`), then a header row
/// `site,<ν...>` and one row per μ starting with its site label.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTable {
    pub z: f64,
    pub p: u32,
    pub q: u32,
    pub sites: Vec<i64>,
    /// Row-major, `entries[i][j]` is Γ(sites[i], sites[j]).
    pub entries: Vec<Vec<f64>>,
}

impl From<&CorrelationMatrix> for MatrixTable {
    fn from(m: &CorrelationMatrix) -> Self {
        Self {
            z: m.z(),
            p: m.p(),
            q: m.q(),
            sites: m.window().sites().collect(),
            entries: m.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

pub fn write_matrix<W: Write>(w: W, table: &MatrixTable) -> Result<(), TableError> {
    let mut wtr = csv::WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    wtr.write_record(["z".to_owned(), fmt_f64(table.z)])?;
    wtr.write_record(["p".to_owned(), table.p.to_string()])?;
    wtr.write_record(["q".to_owned(), table.q.to_string()])?;
    wtr.write_record(
        std::iter::once("site".to_owned()).chain(table.sites.iter().map(i64::to_string)),
    )?;
    for (site, row) in table.sites.iter().zip(&table.entries) {
        wtr.write_record(std::iter::once(site.to_string()).chain(row.iter().map(|&v| fmt_f64(v))))?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_matrix<R: Read>(r: R) -> Result<MatrixTable, TableError> {
    fn bad(msg: impl Into<String>) -> TableError {
        TableError::Malformed(msg.into())
    }
    fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T, TableError> {
        field.parse().map_err(|_| bad(format!("cannot parse {what} from `{field}`")))
    }

    let mut records = reader(r, false).into_records();
    let mut next = |what: &str| -> Result<csv::StringRecord, TableError> {
        records.next().ok_or_else(|| bad(format!("missing {what}")))?.map_err(Into::into)
    };
    let mut scalar = |key: &str| -> Result<String, TableError> {
        let rec = next(key)?;
        match (rec.get(0), rec.get(1), rec.len()) {
            (Some(k), Some(v), 2) if k == key => Ok(v.to_owned()),
            _ => Err(bad(format!("expected `{key},<value>` line"))),
        }
    };
    let z = parse(&scalar("z")?, "z")?;
    let p = parse(&scalar("p")?, "p")?;
    let q = parse(&scalar("q")?, "q")?;

    let header = next("site header")?;
    if header.get(0) != Some("site") {
        return Err(bad("expected `site` header row"));
    }
    let sites: Vec<i64> = header.iter().skip(1).map(|s| parse(s, "site label")).collect::<Result<_, _>>()?;

    let mut entries = Vec::with_capacity(sites.len());
    for &site in &sites {
        let rec = next("matrix row")?;
        if rec.len() != sites.len() + 1 {
            return Err(bad(format!("row for site {site} has {} fields", rec.len())));
        }
        if parse::<i64>(&rec[0], "row label")? != site {
            return Err(bad(format!("row label {} does not match site {site}", &rec[0])));
        }
        entries.push(rec.iter().skip(1).map(|s| parse(s, "entry")).collect::<Result<_, _>>()?);
    }
    if records.next().is_some() {
        return Err(bad("trailing rows after matrix"));
    }
    Ok(MatrixTable { z, p, q, sites, entries })
}

const VERIFY_COLUMNS: [&str; 4] = ["check", "tolerance", "max_deviation", "status"];

pub fn write_report<W: Write>(w: W, report: &VerificationReport) -> Result<(), TableError> {
    let mut wtr = writer(w);
    wtr.write_record(VERIFY_COLUMNS)?;
    for rec in &report.checks {
        wtr.write_record([
            rec.name.clone(),
            fmt_f64(rec.tolerance),
            fmt_f64(rec.max_deviation.unwrap_or(f64::NAN)),
            rec.status.to_string(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_report<R: Read>(r: R) -> Result<VerificationReport, TableError> {
    #[derive(Deserialize)]
    struct Raw {
        check: String,
        tolerance: f64,
        max_deviation: f64,
        status: String,
    }
    let mut rdr = reader(r, true);
    check_headers(&mut rdr, &VERIFY_COLUMNS)?;
    let checks = rdr
        .deserialize()
        .map(|raw| {
            let raw: Raw = raw?;
            let status: CheckStatus = raw.status.parse().map_err(TableError::Malformed)?;
            Ok(CheckRecord {
                name: raw.check,
                tolerance: raw.tolerance,
                max_deviation: (!raw.max_deviation.is_nan()).then_some(raw.max_deviation),
                status,
            })
        })
        .collect::<Result<_, TableError>>()?;
    Ok(VerificationReport { checks })
}
