use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::actions::ActionSet;
use super::env::Transition;
use super::state::PatientState;
use crate::data_pipeline::DrugCombination;
use crate::error::{Error, Result};

/// One line of `trajectories.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub round: u64,
    pub step: u32,
    pub state: PatientState,
    pub action: usize,
    pub combination: DrugCombination,
    pub reward: i32,
    pub done: bool,
    pub capped: bool,
}

pub fn write_trajectory<W: Write>(
    writer: &mut W,
    round: u64,
    transitions: &[Transition],
    actions: &ActionSet,
) -> Result<()> {
    for (step, t) in transitions.iter().enumerate() {
        let record = TrajectoryRecord {
            round,
            step: step as u32,
            state: t.state.clone(),
            action: t.action,
            combination: actions.combination(t.action).clone(),
            reward: t.reward,
            done: t.done,
            capped: t.capped,
        };
        serde_json::to_writer(&mut *writer, &record)?;
        writer
            .write_all(b"\n")
            .map_err(|e| Error::io("<trajectories>", e))?;
    }
    Ok(())
}

pub fn read_trajectories<R: BufRead>(label: &str, reader: R) -> Result<Vec<TrajectoryRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(label, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Schema {
            path: label.to_string(),
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}
