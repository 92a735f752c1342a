use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Literal used for the no-treatment combination in text formats.
pub const NO_TREATMENT_LABEL: &str = "NONE";

/// A set of canonical generic drug names, kept sorted and deduplicated so
/// that equality does not depend on input order. The empty set is the
/// distinguished no-treatment value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DrugCombination(Vec<String>);

impl DrugCombination {
    pub fn new<I, S>(drugs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut drugs: Vec<String> = drugs
            .into_iter()
            .map(Into::into)
            .filter(|d| !d.is_empty())
            .collect();
        drugs.sort();
        drugs.dedup();
        DrugCombination(drugs)
    }

    pub fn no_treatment() -> Self {
        DrugCombination(Vec::new())
    }

    pub fn is_no_treatment(&self) -> bool {
        self.0.is_empty()
    }

    pub fn drugs(&self) -> &[String] {
        &self.0
    }

    /// Union of two combinations.
    pub fn union(&self, other: &DrugCombination) -> DrugCombination {
        DrugCombination::new(self.0.iter().chain(other.0.iter()).cloned())
    }
}

impl fmt::Display for DrugCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str(NO_TREATMENT_LABEL)
        } else {
            f.write_str(&self.0.join("+"))
        }
    }
}

impl FromStr for DrugCombination {
    type Err = std::convert::Infallible;

    /// Parses the `+`-joined form; `NONE` (any case) or an empty string is no treatment.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case(NO_TREATMENT_LABEL) {
            return Ok(DrugCombination::no_treatment());
        }
        Ok(DrugCombination::new(
            s.split('+').map(|d| d.trim().to_lowercase()),
        ))
    }
}

impl Serialize for DrugCombination {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DrugCombination {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(s.parse().expect("infallible"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_does_not_matter() {
        let a = DrugCombination::new(["paclitaxel", "carboplatin"]);
        let b = DrugCombination::new(["carboplatin", "paclitaxel", "carboplatin"]);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "carboplatin+paclitaxel");
    }

    #[test]
    fn none_round_trips() {
        let none: DrugCombination = "NONE".parse().unwrap();
        assert!(none.is_no_treatment());
        assert_eq!(none.to_string(), "NONE");
        let parsed: DrugCombination = "paclitaxel+carboplatin".parse().unwrap();
        assert_eq!(parsed.to_string(), "carboplatin+paclitaxel");
    }
}
