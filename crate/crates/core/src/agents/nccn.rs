use std::io::BufRead;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data_pipeline::DrugCombination;
use crate::error::{Error, Result};
use crate::mdp_env::{ActionSet, HealthState, PatientState, Policy, Transition};
use crate::rng::SimRng;

/// Guideline regimen lists as read from `nccn_regimens.txt`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NccnRegimens {
    pub preferred: Vec<DrugCombination>,
    pub other_recommended: Vec<DrugCombination>,
}

impl NccnRegimens {
    /// Two sections, `[preferred]` and `[other_recommended]`, one `+`-joined
    /// combination per line. `#` starts a comment.
    pub fn parse<R: BufRead>(label: &str, reader: R) -> Result<Self> {
        let mut out = NccnRegimens::default();
        let mut section: Option<&mut Vec<DrugCombination>> = None;
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(label, e))?;
            let text = line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let schema_err = |message: String| Error::Schema {
                path: label.to_string(),
                line: n as u64 + 1,
                message,
            };
            if let Some(name) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                section = match name.trim() {
                    "preferred" => Some(&mut out.preferred),
                    "other_recommended" => Some(&mut out.other_recommended),
                    other => return Err(schema_err(format!("unknown section [{other}]"))),
                };
                continue;
            }
            let list = section
                .as_deref_mut()
                .ok_or_else(|| schema_err("regimen outside a section".into()))?;
            let combo: DrugCombination = text.parse().unwrap_or_else(|e| match e {});
            if combo.is_no_treatment() {
                return Err(schema_err("NONE is not a regimen".into()));
            }
            if !list.contains(&combo) {
                list.push(combo);
            }
        }
        Ok(out)
    }
}

/// Rules-based agent: preferred regimens until the disease recurs after
/// preferred-phase treatment, then other recommended regimens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NccnPolicy {
    preferred: Vec<usize>,
    other_recommended: Vec<usize>,
    recurred: bool,
    treated_preferred: bool,
    current: Option<usize>,
}

fn resolve(list: &[DrugCombination], actions: &ActionSet, which: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for combo in list {
        match actions.index_of(combo) {
            Some(i) => out.push(i),
            None => missing.push(combo.to_string()),
        }
    }
    if !missing.is_empty() {
        log::warn!(
            "{} {which} regimens are not in the action set and were skipped",
            missing.len()
        );
        log::debug!("skipped {which} regimens: {}", missing.join(", "));
    }
    if out.is_empty() {
        return Err(Error::EmptyRegimenList(which.to_string()));
    }
    Ok(out)
}

impl NccnPolicy {
    /// Keeps only regimens present in `actions`; each list must keep at least one.
    pub fn new(regimens: &NccnRegimens, actions: &ActionSet) -> Result<Self> {
        Ok(NccnPolicy {
            preferred: resolve(&regimens.preferred, actions, "preferred")?,
            other_recommended: resolve(&regimens.other_recommended, actions, "other_recommended")?,
            recurred: false,
            treated_preferred: false,
            current: None,
        })
    }

    pub fn preferred(&self) -> &[usize] {
        &self.preferred
    }

    pub fn other_recommended(&self) -> &[usize] {
        &self.other_recommended
    }

    pub fn has_recurred(&self) -> bool {
        self.recurred
    }
}

impl Policy for NccnPolicy {
    fn begin_episode(&mut self) {
        self.recurred = false;
        self.treated_preferred = false;
        self.current = None;
    }

    fn select(&mut self, state: &PatientState, legal: &[usize], rng: &mut SimRng) -> Result<usize> {
        if legal.is_empty() {
            return Err(Error::NoLegalActions);
        }
        match state.health {
            HealthState::Dead => Err(Error::TerminalState),
            HealthState::Remission => Ok(legal[0]),
            HealthState::NeedsTreatment => {
                if let Some(c) = self.current {
                    return Ok(c);
                }
                let list = if self.recurred {
                    &self.other_recommended
                } else {
                    &self.preferred
                };
                let choice = list[rng.random_range(0..list.len())];
                self.current = Some(choice);
                Ok(choice)
            }
        }
    }

    fn observe(&mut self, t: &Transition) {
        if t.state.health == HealthState::NeedsTreatment && !self.recurred {
            self.treated_preferred = true;
        }
        match (t.state.health, t.next_state.health) {
            (_, HealthState::Remission) => self.current = None,
            (HealthState::Remission, HealthState::NeedsTreatment) if self.treated_preferred => {
                self.recurred = true;
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let text = "# lists\n[preferred]\ncarboplatin+paclitaxel\n\n[other_recommended]\ngemcitabine # mono\n";
        let r = NccnRegimens::parse("t", text.as_bytes()).unwrap();
        assert_eq!(r.preferred, vec![DrugCombination::new(["carboplatin", "paclitaxel"])]);
        assert_eq!(r.other_recommended, vec![DrugCombination::new(["gemcitabine"])]);
    }

    #[test]
    fn rejects_orphan_regimen() {
        assert!(matches!(
            NccnRegimens::parse("t", "carboplatin\n".as_bytes()),
            Err(Error::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn empty_after_filtering() {
        let r = NccnRegimens {
            preferred: vec![DrugCombination::new(["a"])],
            other_recommended: vec![DrugCombination::new(["b"])],
        };
        let actions = ActionSet::new([DrugCombination::new(["b"])]);
        assert!(matches!(NccnPolicy::new(&r, &actions), Err(Error::EmptyRegimenList(_))));
    }
}
