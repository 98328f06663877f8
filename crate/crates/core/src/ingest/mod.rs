//! Loading and validation of the three input corpora.
//!
//! All three are plain CSV with a fixed, ordered header:
//!
//! | corpus        | columns |
//! |---------------|---------|
//! | bibliometrics | `institution,country,period_start,period_end,field,counting,p,p_top50,p_top10,p_top5,p_top1` |
//! | economy       | `country,year,gdp_usd,population,gdp_per_capita` (last may be empty) |
//! | patents       | `country,year,families` |
//!
//! Numbers are dot-decimal 64-bit floats. Row numbers in errors are 1-based
//! file line numbers (the header is line 1).

mod names;

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use names::{CountryNameMap, BUILTIN_TABLE_VERSION};

pub const BIBLIOMETRICS_COLUMNS: [&str; 11] = [
    "institution",
    "country",
    "period_start",
    "period_end",
    "field",
    "counting",
    "p",
    "p_top50",
    "p_top10",
    "p_top5",
    "p_top1",
];
pub const ECONOMY_COLUMNS: [&str; 5] = ["country", "year", "gdp_usd", "population", "gdp_per_capita"];
pub const PATENT_COLUMNS: [&str; 3] = ["country", "year", "families"];

/// Relative tolerance between a reported GDP per capita and GDP / population.
pub const ECONOMY_CONSISTENCY_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("header mismatch: expected [{expected}], found [{found}]")]
    HeaderMismatch { expected: String, found: String },
    #[error("row {row}: malformed number in column {column:?}: {value:?}")]
    MalformedNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: unknown country name {name:?}")]
    UnknownCountryName { name: String, row: usize },
    #[error("row {row}: {detail}")]
    InvariantViolation { row: usize, detail: String },
    #[error("row {row}: inconsistent economy record: {detail}")]
    InconsistentEconomy { row: usize, detail: String },
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Inclusive range of publication years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Period {
    pub start: i32,
    pub end: i32,
}

impl Period {
    pub fn new(start: i32, end: i32) -> Option<Self> {
        (start <= end).then_some(Period { start, end })
    }

    pub fn len_years(&self) -> i32 {
        self.end - self.start + 1
    }

    /// Economy year paired with this period unless the caller overrides it.
    pub fn default_reference_year(&self) -> i32 {
        self.end - 1
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl FromStr for Period {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['-', '–'])
            .ok_or_else(|| format!("expected YYYY-YYYY, got {s:?}"))?;
        let start: i32 = a.trim().parse().map_err(|_| format!("bad start year in {s:?}"))?;
        let end: i32 = b.trim().parse().map_err(|_| format!("bad end year in {s:?}"))?;
        Period::new(start, end).ok_or_else(|| format!("period {s:?} ends before it starts"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Counting {
    Fractional,
    Full,
}

impl fmt::Display for Counting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Counting::Fractional => "fractional",
            Counting::Full => "full",
        })
    }
}

impl FromStr for Counting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fractional" => Ok(Counting::Fractional),
            "full" => Ok(Counting::Full),
            other => Err(format!("unknown counting mode {other:?}")),
        }
    }
}

/// One university × period × field row of paper counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstitutionRecord {
    pub institution: String,
    pub country: String,
    pub period: Period,
    pub field: String,
    pub counting: Counting,
    pub p: f64,
    pub p_top50: f64,
    pub p_top10: f64,
    pub p_top5: f64,
    pub p_top1: f64,
}

impl InstitutionRecord {
    /// Checks `0 <= p_top1 <= p_top5 <= p_top10 <= p_top50 <= p`.
    pub fn check_monotone(&self) -> Result<(), String> {
        let chain = [
            ("p_top1", self.p_top1),
            ("p_top5", self.p_top5),
            ("p_top10", self.p_top10),
            ("p_top50", self.p_top50),
            ("p", self.p),
        ];
        if self.p_top1 < 0.0 {
            return Err(format!("p_top1 = {} is negative", self.p_top1));
        }
        for pair in chain.windows(2) {
            let (lo_name, lo) = pair[0];
            let (hi_name, hi) = pair[1];
            if lo > hi {
                return Err(format!("{lo_name} = {lo} exceeds {hi_name} = {hi}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyRecord {
    pub country: String,
    pub year: i32,
    pub gdp_usd: f64,
    pub population: f64,
    pub gdp_per_capita: f64,
}

/// Triadic patent families for one country and year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatentRecord {
    pub country: String,
    pub year: i32,
    pub families: f64,
}

pub(crate) fn check_header(headers: &csv::StringRecord, expected: &[&str]) -> Result<(), IngestError> {
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    for name in expected {
        if !found.contains(name) {
            return Err(IngestError::MissingColumn((*name).to_string()));
        }
    }
    if found != expected {
        return Err(IngestError::HeaderMismatch {
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(())
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    line: usize,
    columns: &'a [&'a str],
}

impl<'a> Row<'a> {
    fn text(&self, idx: usize) -> &'a str {
        self.record.get(idx).unwrap_or("").trim()
    }

    fn malformed(&self, idx: usize) -> IngestError {
        IngestError::MalformedNumber {
            row: self.line,
            column: self.columns[idx].to_string(),
            value: self.text(idx).to_string(),
        }
    }

    /// Nonnegative finite dot-decimal number.
    fn decimal(&self, idx: usize) -> Result<f64, IngestError> {
        let raw = self.text(idx);
        if raw.contains(',') {
            return Err(self.malformed(idx));
        }
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            _ => Err(self.malformed(idx)),
        }
    }

    fn optional_decimal(&self, idx: usize) -> Result<Option<f64>, IngestError> {
        if self.text(idx).is_empty() {
            Ok(None)
        } else {
            self.decimal(idx).map(Some)
        }
    }

    fn year(&self, idx: usize) -> Result<i32, IngestError> {
        self.text(idx).parse().map_err(|_| self.malformed(idx))
    }

    fn country(&self, idx: usize, names: &CountryNameMap) -> Result<String, IngestError> {
        let raw = self.text(idx);
        names
            .resolve(raw)
            .map(str::to_string)
            .ok_or_else(|| IngestError::UnknownCountryName {
                name: raw.to_string(),
                row: self.line,
            })
    }
}

fn for_each_row<R, F>(reader: R, columns: &[&str], mut f: F) -> Result<(), IngestError>
where
    R: Read,
    F: FnMut(Row<'_>) -> Result<(), IngestError>,
{
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    check_header(rdr.headers()?, columns)?;
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        f(Row {
            record: &record,
            line,
            columns,
        })?;
    }
    Ok(())
}

fn open(path: &Path) -> Result<std::fs::File, IngestError> {
    std::fs::File::open(path).map_err(|e| IngestError::io(path, e))
}

/// Loads institution rows for one field and counting mode, all periods.
pub fn load_bibliometrics(
    path: &Path,
    field: &str,
    counting: Counting,
    names: &CountryNameMap,
) -> Result<Vec<InstitutionRecord>, IngestError> {
    read_bibliometrics(open(path)?, field, counting, names)
}

/// Every row of the input is parsed and validated, but only rows matching
/// `field` (case-insensitive) and `counting` are returned.
pub fn read_bibliometrics<R: Read>(
    reader: R,
    field: &str,
    counting: Counting,
    names: &CountryNameMap,
) -> Result<Vec<InstitutionRecord>, IngestError> {
    let wanted_field = field.trim().to_lowercase();
    let mut out = Vec::new();
    for_each_row(reader, &BIBLIOMETRICS_COLUMNS, |row| {
        let period_start = row.year(2)?;
        let period_end = row.year(3)?;
        let period = Period::new(period_start, period_end).ok_or_else(|| {
            IngestError::InvariantViolation {
                row: row.line,
                detail: format!("period {period_start}-{period_end} ends before it starts"),
            }
        })?;
        let row_counting: Counting =
            row.text(5)
                .parse()
                .map_err(|detail| IngestError::InvariantViolation {
                    row: row.line,
                    detail,
                })?;
        let record = InstitutionRecord {
            institution: row.text(0).to_string(),
            country: row.country(1, names)?,
            period,
            field: row.text(4).to_string(),
            counting: row_counting,
            p: row.decimal(6)?,
            p_top50: row.decimal(7)?,
            p_top10: row.decimal(8)?,
            p_top5: row.decimal(9)?,
            p_top1: row.decimal(10)?,
        };
        record
            .check_monotone()
            .map_err(|detail| IngestError::InvariantViolation {
                row: row.line,
                detail,
            })?;
        if record.counting == counting && record.field.to_lowercase() == wanted_field {
            out.push(record);
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn load_economy(path: &Path, names: &CountryNameMap) -> Result<Vec<EconomyRecord>, IngestError> {
    read_economy(open(path)?, names)
}

/// Returns records sorted by (country, year). A blank per-capita cell is
/// filled from GDP / population; a given one must agree with it to within
/// [`ECONOMY_CONSISTENCY_TOLERANCE`].
pub fn read_economy<R: Read>(reader: R, names: &CountryNameMap) -> Result<Vec<EconomyRecord>, IngestError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for_each_row(reader, &ECONOMY_COLUMNS, |row| {
        let country = row.country(0, names)?;
        let year = row.year(1)?;
        let gdp_usd = row.decimal(2)?;
        let population = row.decimal(3)?;
        let gdp_per_capita = match row.optional_decimal(4)? {
            Some(pc) => {
                if population > 0.0 {
                    let derived = gdp_usd / population;
                    let consistent = if pc == 0.0 {
                        derived == 0.0
                    } else {
                        (pc - derived).abs() / pc <= ECONOMY_CONSISTENCY_TOLERANCE
                    };
                    if !consistent {
                        return Err(IngestError::InconsistentEconomy {
                            row: row.line,
                            detail: format!(
                                "gdp_per_capita {pc} vs gdp_usd/population {derived}"
                            ),
                        });
                    }
                }
                pc
            }
            None if population > 0.0 => gdp_usd / population,
            None => {
                return Err(IngestError::InvariantViolation {
                    row: row.line,
                    detail: "zero population and no gdp_per_capita".into(),
                })
            }
        };
        if !seen.insert((country.clone(), year)) {
            return Err(IngestError::InvariantViolation {
                row: row.line,
                detail: format!("duplicate economy row for {country} {year}"),
            });
        }
        out.push(EconomyRecord {
            country,
            year,
            gdp_usd,
            population,
            gdp_per_capita,
        });
        Ok(())
    })?;
    out.sort_by(|a, b| (&a.country, a.year).cmp(&(&b.country, b.year)));
    Ok(out)
}

pub fn load_patents(path: &Path, names: &CountryNameMap) -> Result<Vec<PatentRecord>, IngestError> {
    read_patents(open(path)?, names)
}

/// Returns records sorted by (country, year).
pub fn read_patents<R: Read>(reader: R, names: &CountryNameMap) -> Result<Vec<PatentRecord>, IngestError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for_each_row(reader, &PATENT_COLUMNS, |row| {
        let country = row.country(0, names)?;
        let year = row.year(1)?;
        let families = row.decimal(2)?;
        if !seen.insert((country.clone(), year)) {
            return Err(IngestError::InvariantViolation {
                row: row.line,
                detail: format!("duplicate patent row for {country} {year}"),
            });
        }
        out.push(PatentRecord {
            country,
            year,
            families,
        });
        Ok(())
    })?;
    out.sort_by(|a, b| (&a.country, a.year).cmp(&(&b.country, b.year)));
    Ok(out)
}

pub fn write_bibliometrics<W: Write>(writer: W, records: &[InstitutionRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BIBLIOMETRICS_COLUMNS)?;
    for r in records {
        w.write_record([
            r.institution.clone(),
            r.country.clone(),
            r.period.start.to_string(),
            r.period.end.to_string(),
            r.field.clone(),
            r.counting.to_string(),
            r.p.to_string(),
            r.p_top50.to_string(),
            r.p_top10.to_string(),
            r.p_top5.to_string(),
            r.p_top1.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_economy<W: Write>(writer: W, records: &[EconomyRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ECONOMY_COLUMNS)?;
    for r in records {
        w.write_record([
            r.country.clone(),
            r.year.to_string(),
            r.gdp_usd.to_string(),
            r.population.to_string(),
            r.gdp_per_capita.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_patents<W: Write>(writer: W, records: &[PatentRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PATENT_COLUMNS)?;
    for r in records {
        w.write_record([r.country.clone(), r.year.to_string(), r.families.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
