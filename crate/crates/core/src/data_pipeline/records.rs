use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CLINICAL_COLUMNS: [&str; 7] = [
    "patient_id",
    "age_at_start",
    "race",
    "tumor_stage",
    "tumor_grade",
    "overall_survival_days",
    "vital_status",
];

pub const DRUG_LINE_COLUMNS: [&str; 4] = ["patient_id", "drug_names", "start_day", "end_day"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VitalStatus {
    Deceased,
    Living,
}

impl FromStr for VitalStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deceased" | "dead" => Ok(VitalStatus::Deceased),
            "living" | "alive" => Ok(VitalStatus::Living),
            other => Err(format!(
                "vital_status must be one of deceased/living, got '{other}'"
            )),
        }
    }
}

impl fmt::Display for VitalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VitalStatus::Deceased => "deceased",
            VitalStatus::Living => "living",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClinicalRecord {
    pub patient_id: String,
    pub age_at_start: u32,
    pub race: String,
    pub tumor_stage: String,
    pub tumor_grade: String,
    pub overall_survival_days: u32,
    pub vital_status: VitalStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrugLineRecord {
    pub patient_id: String,
    pub drug_names_raw: Vec<String>,
    pub start_day: i64,
    pub end_day: i64,
}

/// Rows of a CSV table keyed by required column, with their 1-based file line.
struct Table {
    label: String,
    columns: Vec<usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read<R: Read>(label: &str, reader: R, required: &[&str]) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut columns = Vec::with_capacity(required.len());
        for name in required {
            let idx = headers.iter().position(|h| h == *name).ok_or_else(|| {
                Error::MissingColumn {
                    path: label.to_string(),
                    column: name.to_string(),
                }
            })?;
            columns.push(idx);
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Error::Schema {
                    path: label.to_string(),
                    line,
                    message: e.to_string(),
                }
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            rows.push((line, rec));
        }
        Ok(Table {
            label: label.to_string(),
            columns,
            rows,
        })
    }

    fn field<'a>(&self, rec: &'a csv::StringRecord, col: usize) -> &'a str {
        rec.get(self.columns[col]).unwrap_or("")
    }

    fn parse<T: FromStr>(&self, line: u64, rec: &csv::StringRecord, col: usize, name: &str) -> Result<T> {
        let raw = self.field(rec, col);
        raw.parse().map_err(|_| self.schema_error(line, format!("invalid {name} '{raw}'")))
    }

    fn schema_error(&self, line: u64, message: String) -> Error {
        Error::Schema {
            path: self.label.clone(),
            line,
            message,
        }
    }
}

/// Reads `clinical.csv`. `label` names the source in error messages.
pub fn read_clinical<R: Read>(label: &str, reader: R) -> Result<Vec<ClinicalRecord>> {
    let table = Table::read(label, reader, &CLINICAL_COLUMNS)?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let line = *line;
        let patient_id = table.field(rec, 0).to_string();
        if patient_id.is_empty() {
            return Err(table.schema_error(line, "empty patient_id".into()));
        }
        let categorical = |col: usize, name: &str| -> Result<String> {
            let v = table.field(rec, col);
            if v.is_empty() {
                Err(table.schema_error(line, format!("empty {name}")))
            } else {
                Ok(v.to_string())
            }
        };
        let vital_raw = table.field(rec, 6);
        let vital_status = vital_raw
            .parse()
            .map_err(|msg: String| table.schema_error(line, msg))?;
        out.push(ClinicalRecord {
            patient_id,
            age_at_start: table.parse(line, rec, 1, "age_at_start")?,
            race: categorical(2, "race")?,
            tumor_stage: categorical(3, "tumor_stage")?,
            tumor_grade: categorical(4, "tumor_grade")?,
            overall_survival_days: table.parse(line, rec, 5, "overall_survival_days")?,
            vital_status,
        });
    }
    Ok(out)
}

/// Reads `drug_lines.csv`; `drug_names` is split on `;` and blank entries are discarded.
pub fn read_drug_lines<R: Read>(label: &str, reader: R) -> Result<Vec<DrugLineRecord>> {
    let table = Table::read(label, reader, &DRUG_LINE_COLUMNS)?;
    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let line = *line;
        let patient_id = table.field(rec, 0).to_string();
        if patient_id.is_empty() {
            return Err(table.schema_error(line, "empty patient_id".into()));
        }
        let drug_names_raw = table
            .field(rec, 1)
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        out.push(DrugLineRecord {
            patient_id,
            drug_names_raw,
            start_day: table.parse(line, rec, 2, "start_day")?,
            end_day: table.parse(line, rec, 3, "end_day")?,
        });
    }
    Ok(out)
}

pub fn write_clinical<W: Write>(writer: W, records: &[ClinicalRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CLINICAL_COLUMNS)?;
    for r in records {
        wtr.write_record([
            r.patient_id.clone(),
            r.age_at_start.to_string(),
            r.race.clone(),
            r.tumor_stage.clone(),
            r.tumor_grade.clone(),
            r.overall_survival_days.to_string(),
            r.vital_status.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<clinical>", e))?;
    Ok(())
}

pub fn write_drug_lines<W: Write>(writer: W, records: &[DrugLineRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(DRUG_LINE_COLUMNS)?;
    for r in records {
        wtr.write_record([
            r.patient_id.clone(),
            r.drug_names_raw.join(";"),
            r.start_day.to_string(),
            r.end_day.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<drug_lines>", e))?;
    Ok(())
}
