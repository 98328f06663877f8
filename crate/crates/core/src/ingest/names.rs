//! Country name reconciliation.
//!
//! Bibliometric, economy and patent sources spell countries differently
//! ("Korea, Rep.", "South Korea", "KOR"). Every loader resolves names through
//! a [`CountryNameMap`] so that all records share ISO 3166-1 alpha-3 codes as
//! the join key.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use super::IngestError;

/// Version tag of the bundled name table. Bump whenever `data/country_names.csv` changes.
pub const BUILTIN_TABLE_VERSION: &str = "2021.1";

const BUILTIN_TABLE: &str = include_str!("../../data/country_names.csv");

/// Mapping from source-corpus country names to ISO alpha-3 codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountryNameMap {
    version: String,
    // keyed by normalized name
    names: BTreeMap<String, String>,
    // first name seen for each code, used for display
    display: BTreeMap<String, String>,
}

fn normalize(name: &str) -> String {
    name.trim().to_lowercase()
}

fn is_iso3(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

impl CountryNameMap {
    pub fn empty(version: impl Into<String>) -> Self {
        CountryNameMap {
            version: version.into(),
            names: BTreeMap::new(),
            display: BTreeMap::new(),
        }
    }

    /// The table shipped with the crate, covering Leiden Ranking, World Bank and OECD spellings.
    pub fn builtin() -> Self {
        let mut map = CountryNameMap::empty(BUILTIN_TABLE_VERSION);
        map.extend_from_reader(BUILTIN_TABLE.as_bytes())
            .expect("bundled country table is valid");
        map
    }

    /// Reads a `source_name,iso3` CSV file.
    pub fn from_csv(path: &Path) -> Result<Self, IngestError> {
        let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
        let mut map = CountryNameMap::empty(path.display().to_string());
        map.extend_from_reader(file)?;
        Ok(map)
    }

    /// Adds entries from a `source_name,iso3` CSV. Re-mapping a name to a different
    /// code is an error; repeating an identical entry is not.
    pub fn extend_from_reader<R: Read>(&mut self, reader: R) -> Result<(), IngestError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(IngestError::Csv)?.clone();
        super::check_header(&headers, &["source_name", "iso3"])?;
        for (idx, row) in rdr.records().enumerate() {
            let row = row.map_err(IngestError::Csv)?;
            let line = idx + 2;
            let name = row.get(0).unwrap_or("").trim();
            let code = row.get(1).unwrap_or("").trim();
            if name.is_empty() || !is_iso3(code) {
                return Err(IngestError::InvariantViolation {
                    row: line,
                    detail: format!("bad name-map entry {name:?} -> {code:?}"),
                });
            }
            self.insert(name, code, line)?;
        }
        Ok(())
    }

    fn insert(&mut self, name: &str, code: &str, line: usize) -> Result<(), IngestError> {
        let key = normalize(name);
        match self.names.get(&key) {
            Some(existing) if existing != code => {
                return Err(IngestError::InvariantViolation {
                    row: line,
                    detail: format!("name {name:?} maps to both {existing} and {code}"),
                });
            }
            Some(_) => {}
            None => {
                self.names.insert(key, code.to_string());
            }
        }
        self.display
            .entry(code.to_string())
            .or_insert_with(|| name.to_string());
        Ok(())
    }

    /// Entries from `other` take part in lookups too; conflicting names are rejected.
    pub fn merge(&mut self, other: &CountryNameMap) -> Result<(), IngestError> {
        for (key, code) in &other.names {
            self.insert(key, code, 0)?;
        }
        for (code, name) in &other.display {
            self.display.entry(code.clone()).or_insert_with(|| name.clone());
        }
        self.version = format!("{}+{}", self.version, other.version);
        Ok(())
    }

    /// Resolves a source spelling or an ISO code already in the codomain.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        if let Some(code) = self.names.get(&normalize(name)) {
            return Some(code.as_str());
        }
        let trimmed = name.trim();
        self.display
            .get_key_value(trimmed)
            .map(|(code, _)| code.as_str())
    }

    pub fn contains_code(&self, code: &str) -> bool {
        self.display.contains_key(code)
    }

    pub fn codes(&self) -> BTreeSet<&str> {
        self.display.keys().map(String::as_str).collect()
    }

    /// Human-readable name for a code, falling back to the code itself.
    pub fn display_name<'a>(&'a self, code: &'a str) -> &'a str {
        self.display.get(code).map(String::as_str).unwrap_or(code)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

impl Default for CountryNameMap {
    fn default() -> Self {
        CountryNameMap::builtin()
    }
}
