use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::combination::DrugCombination;
use super::records::{ClinicalRecord, DrugLineRecord, VitalStatus};
use crate::error::{Error, Result};

pub const PERIOD_DAYS: i64 = 30;

pub const PERIOD_COLUMNS: [&str; 7] = [
    "patient_id",
    "month_index",
    "combination",
    "months_on_current",
    "prior_lines",
    "death_this_period",
    "line_ended_this_period",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventFlags {
    pub death_this_period: bool,
    pub line_ended_this_period: bool,
}

/// One 30-day window of one patient's course.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreatmentPeriod {
    pub patient_id: String,
    pub month_index: u32,
    pub combination: DrugCombination,
    pub months_on_current: u32,
    pub prior_lines: u32,
    pub event_flags: EventFlags,
}

/// Number of periods for a survival time: ceil(days / 30), at least one.
pub fn period_count(survival_days: u32) -> u32 {
    let days = survival_days as i64;
    ((days + PERIOD_DAYS - 1) / PERIOD_DAYS).max(1) as u32
}

/// Day span `[lo, hi]` of window `k`, clipped to the survival time. Adjacent
/// windows share only their boundary day, so the spans partition `[0, days]`.
pub fn window_span(k: u32, survival_days: u32) -> (i64, i64) {
    let lo = k as i64 * PERIOD_DAYS;
    let hi = (lo + PERIOD_DAYS).min(survival_days as i64);
    (lo, hi.max(lo))
}

/// A line contributes to a window when the two overlap by at least one day.
fn overlaps(line: &DrugLineRecord, lo: i64, hi: i64) -> bool {
    line.end_day.min(hi) - line.start_day.max(lo) >= 1
}

/// Reorganizes filtered, standardized records into monthly periods.
///
/// Output is ordered by patient id, then month. Each window's combination is
/// the union of drugs from every overlapping line. `months_on_current` restarts
/// at 1 whenever the combination changes (no-treatment runs included) and
/// `prior_lines` counts the treated runs that precede the current run.
pub fn build_treatment_periods(
    clinical: &[ClinicalRecord],
    lines: &[DrugLineRecord],
) -> Result<Vec<TreatmentPeriod>> {
    let mut by_patient: BTreeMap<&str, Vec<&DrugLineRecord>> = BTreeMap::new();
    for line in lines {
        by_patient.entry(line.patient_id.as_str()).or_default().push(line);
    }
    let mut patients: Vec<&ClinicalRecord> = clinical.iter().collect();
    patients.sort_by(|a, b| a.patient_id.cmp(&b.patient_id));

    let mut out = Vec::new();
    for patient in patients {
        let days = patient.overall_survival_days;
        let patient_lines = by_patient
            .get(patient.patient_id.as_str())
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        for line in patient_lines {
            if line.end_day > days as i64 + PERIOD_DAYS {
                return Err(Error::InconsistentSpan {
                    patient_id: patient.patient_id.clone(),
                    end_day: line.end_day,
                    survival_days: days,
                });
            }
        }

        let n = period_count(days);
        let combos: Vec<DrugCombination> = (0..n)
            .map(|k| {
                let (lo, hi) = window_span(k, days);
                patient_lines
                    .iter()
                    .filter(|l| overlaps(l, lo, hi))
                    .fold(DrugCombination::no_treatment(), |acc, l| {
                        acc.union(&DrugCombination::new(l.drug_names_raw.iter().cloned()))
                    })
            })
            .collect();

        let mut months_on_current = 0;
        let mut prior_lines = 0;
        for k in 0..n as usize {
            if k > 0 && combos[k] != combos[k - 1] {
                if !combos[k - 1].is_no_treatment() {
                    prior_lines += 1;
                }
                months_on_current = 0;
            }
            months_on_current += 1;
            let last = k + 1 == n as usize;
            out.push(TreatmentPeriod {
                patient_id: patient.patient_id.clone(),
                month_index: k as u32,
                combination: combos[k].clone(),
                months_on_current,
                prior_lines,
                event_flags: EventFlags {
                    death_this_period: last && patient.vital_status == VitalStatus::Deceased,
                    line_ended_this_period: !last && combos[k + 1] != combos[k],
                },
            });
        }
    }
    Ok(out)
}

pub fn write_periods<W: Write>(writer: W, periods: &[TreatmentPeriod]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(PERIOD_COLUMNS)?;
    for p in periods {
        wtr.write_record([
            p.patient_id.clone(),
            p.month_index.to_string(),
            p.combination.to_string(),
            p.months_on_current.to_string(),
            p.prior_lines.to_string(),
            p.event_flags.death_this_period.to_string(),
            p.event_flags.line_ended_this_period.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<periods>", e))?;
    Ok(())
}

pub fn read_periods<R: Read>(label: &str, reader: R) -> Result<Vec<TreatmentPeriod>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(PERIOD_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: label.to_string(),
                column: name.to_string(),
            })?;
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let get = |i: usize| rec.get(idx[i]).unwrap_or("");
        let bad = |name: &str| Error::Schema {
            path: label.to_string(),
            line,
            message: format!("invalid {name} '{}'", get(PERIOD_COLUMNS.iter().position(|c| *c == name).unwrap())),
        };
        out.push(TreatmentPeriod {
            patient_id: get(0).to_string(),
            month_index: get(1).parse().map_err(|_| bad("month_index"))?,
            combination: get(2).parse().expect("infallible"),
            months_on_current: get(3).parse().map_err(|_| bad("months_on_current"))?,
            prior_lines: get(4).parse().map_err(|_| bad("prior_lines"))?,
            event_flags: EventFlags {
                death_this_period: get(5).parse().map_err(|_| bad("death_this_period"))?,
                line_ended_this_period: get(6)
                    .parse()
                    .map_err(|_| bad("line_ended_this_period"))?,
            },
        });
    }
    Ok(out)
}

/// Groups periods by patient, preserving order.
pub fn group_by_patient(periods: &[TreatmentPeriod]) -> BTreeMap<&str, Vec<&TreatmentPeriod>> {
    let mut map: BTreeMap<&str, Vec<&TreatmentPeriod>> = BTreeMap::new();
    for p in periods {
        map.entry(p.patient_id.as_str()).or_default().push(p);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patient(id: &str, days: u32, status: VitalStatus) -> ClinicalRecord {
        ClinicalRecord {
            patient_id: id.into(),
            age_at_start: 60,
            race: "White".into(),
            tumor_stage: "IIIC".into(),
            tumor_grade: "G3".into(),
            overall_survival_days: days,
            vital_status: status,
        }
    }

    fn line(id: &str, drugs: &[&str], start: i64, end: i64) -> DrugLineRecord {
        DrugLineRecord {
            patient_id: id.into(),
            drug_names_raw: drugs.iter().map(|s| s.to_string()).collect(),
            start_day: start,
            end_day: end,
        }
    }

    #[test]
    fn zero_survival_is_single_death_period() {
        let periods =
            build_treatment_periods(&[patient("p", 0, VitalStatus::Deceased)], &[]).unwrap();
        assert_eq!(periods.len(), 1);
        assert!(periods[0].event_flags.death_this_period);
        assert!(periods[0].combination.is_no_treatment());
    }

    #[test]
    fn ninety_five_day_trace() {
        let periods = build_treatment_periods(
            &[patient("p", 95, VitalStatus::Deceased)],
            &[line("p", &["paclitaxel", "carboplatin"], 10, 70)],
        )
        .unwrap();
        let combos: Vec<String> = periods.iter().map(|p| p.combination.to_string()).collect();
        assert_eq!(
            combos,
            [
                "carboplatin+paclitaxel",
                "carboplatin+paclitaxel",
                "carboplatin+paclitaxel",
                "NONE"
            ]
        );
        let moc: Vec<u32> = periods.iter().map(|p| p.months_on_current).collect();
        assert_eq!(moc, [1, 2, 3, 1]);
        let prior: Vec<u32> = periods.iter().map(|p| p.prior_lines).collect();
        assert_eq!(prior, [0, 0, 0, 1]);
        let ended: Vec<bool> = periods
            .iter()
            .map(|p| p.event_flags.line_ended_this_period)
            .collect();
        assert_eq!(ended, [false, false, true, false]);
        assert!(periods[3].event_flags.death_this_period);
        assert!(!periods[2].event_flags.death_this_period);
    }

    #[test]
    fn overlapping_lines_union() {
        let periods = build_treatment_periods(
            &[patient("p", 60, VitalStatus::Deceased)],
            &[line("p", &["carboplatin"], 0, 40), line("p", &["bevacizumab"], 20, 60)],
        )
        .unwrap();
        assert_eq!(periods[0].combination.to_string(), "bevacizumab+carboplatin");
        assert_eq!(periods[1].combination.to_string(), "bevacizumab+carboplatin");
    }

    #[test]
    fn span_beyond_survival_is_error() {
        let err = build_treatment_periods(
            &[patient("p", 60, VitalStatus::Deceased)],
            &[line("p", &["carboplatin"], 0, 91)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InconsistentSpan { .. }));
        // one window of slack is tolerated
        assert!(build_treatment_periods(
            &[patient("p", 60, VitalStatus::Deceased)],
            &[line("p", &["carboplatin"], 0, 90)],
        )
        .is_ok());
    }

    #[test]
    fn living_patient_has_no_death_flag() {
        let periods =
            build_treatment_periods(&[patient("p", 65, VitalStatus::Living)], &[]).unwrap();
        assert_eq!(periods.len(), 3);
        assert!(periods.iter().all(|p| !p.event_flags.death_this_period));
    }

    #[test]
    fn periods_csv_round_trip() {
        let periods = build_treatment_periods(
            &[patient("p", 95, VitalStatus::Deceased)],
            &[line("p", &["paclitaxel", "carboplatin"], 10, 70)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_periods(&mut buf, &periods).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&PERIOD_COLUMNS.join(",")));
        assert!(text.contains("p,3,NONE,1,1,true,false"));
        assert_eq!(read_periods("periods.csv", buf.as_slice()).unwrap(), periods);
    }
}
