use std::collections::{BTreeSet, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::records::DrugLineRecord;
use crate::error::{Error, Result};

/// Raw-to-generic drug name mapping loaded from a two-column TSV.
#[derive(Debug, Clone, Default)]
pub struct StandardizationTable {
    synonyms: HashMap<String, String>,
    canonical: BTreeSet<String>,
}

fn normalize_key(raw: &str) -> String {
    raw.trim().to_lowercase()
}

impl StandardizationTable {
    /// Parses `raw<TAB>canonical` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv<R: Read>(label: &str, mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| Error::io(label, e))?;
        let mut table = StandardizationTable::default();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (raw, canonical) = match (cols.next(), cols.next(), cols.next()) {
                (Some(r), Some(c), None) if !r.trim().is_empty() && !c.trim().is_empty() => (r, c),
                _ => {
                    return Err(Error::Schema {
                        path: label.to_string(),
                        line: i as u64 + 1,
                        message: "expected two tab-separated columns raw<TAB>canonical".into(),
                    })
                }
            };
            table.insert(raw, canonical);
        }
        Ok(table)
    }

    pub fn insert(&mut self, raw: &str, canonical: &str) {
        let canonical = normalize_key(canonical);
        self.canonical.insert(canonical.clone());
        self.synonyms.insert(normalize_key(raw), canonical);
    }

    pub fn len(&self) -> usize {
        self.synonyms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synonyms.is_empty()
    }

    /// Case-insensitive, whitespace-trimmed lookup. Names that already are a
    /// canonical value of the table map to themselves.
    pub fn standardize(&self, raw: &str) -> Result<String> {
        let key = normalize_key(raw);
        if let Some(c) = self.synonyms.get(&key) {
            return Ok(c.clone());
        }
        if self.canonical.contains(&key) {
            return Ok(key);
        }
        Err(Error::UnknownDrugName(raw.trim().to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownDrugPolicy {
    /// Drop drug-line rows containing an unknown name and count them.
    #[default]
    Drop,
    /// Fail on the first unknown name.
    Strict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardizationReport {
    pub rows_dropped_unknown_drug: usize,
    /// Distinct unknown names in first-seen order.
    pub unknown_names: Vec<String>,
}

/// Standardization index shipped with the crate.
pub const DEFAULT_STANDARDIZATION_TSV: &str = include_str!("../../data/drug_standardization.tsv");

impl StandardizationTable {
    pub fn shipped() -> Self {
        StandardizationTable::from_tsv("drug_standardization.tsv", DEFAULT_STANDARDIZATION_TSV.as_bytes())
            .expect("shipped standardization table parses")
    }
}

/// Rewrites every drug name of every line to its canonical form.
pub fn standardize_lines(
    lines: &[DrugLineRecord],
    table: &StandardizationTable,
    policy: UnknownDrugPolicy,
) -> Result<(Vec<DrugLineRecord>, StandardizationReport)> {
    let mut report = StandardizationReport::default();
    let mut out = Vec::with_capacity(lines.len());
    'rows: for line in lines {
        let mut names = Vec::with_capacity(line.drug_names_raw.len());
        for raw in &line.drug_names_raw {
            match table.standardize(raw) {
                Ok(c) => names.push(c),
                Err(e) => match policy {
                    UnknownDrugPolicy::Strict => return Err(e),
                    UnknownDrugPolicy::Drop => {
                        let name = raw.trim().to_string();
                        if !report.unknown_names.contains(&name) {
                            log::warn!("dropping drug line with unknown drug '{name}'");
                            report.unknown_names.push(name);
                        }
                        report.rows_dropped_unknown_drug += 1;
                        continue 'rows;
                    }
                },
            }
        }
        out.push(DrugLineRecord {
            drug_names_raw: names,
            ..line.clone()
        });
    }
    Ok((out, report))
}
