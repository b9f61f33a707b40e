//! Transaction-file parsing and the built-in fixtures.
//!
//! A transaction file holds one record per line, fields split on a single
//! delimiter. Under [`LabelPolicy::FirstFieldIsRecordLabel`] the first field
//! names the record (a plant species, a user session) and the rest are the
//! event members (region codes, category codes). Bytes that are not valid
//! UTF-8 are replaced rather than rejected.

use std::collections::HashMap;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_tokens, Dataset, Diagnostic, Event, LabeledPartition, Vocabulary};

const SEVEN_EVENT: &str = include_str!("../fixtures/seven_event.txt");
const APPENDIX_A_REFERENCE: &str = include_str!("../fixtures/appendix_a_reference.json");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelPolicy {
    /// Field 1 is a record label and is not an event member.
    #[default]
    FirstFieldIsRecordLabel,
    AllFieldsAreMembers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransactionFormat {
    pub delimiter: char,
    pub label_policy: LabelPolicy,
    /// Emit one event per member token holding the labels of the records it
    /// appears in. Requires record labels.
    pub transpose: bool,
}

impl Default for TransactionFormat {
    fn default() -> Self {
        Self {
            delimiter: ',',
            label_policy: LabelPolicy::FirstFieldIsRecordLabel,
            transpose: false,
        }
    }
}

impl TransactionFormat {
    pub fn members_only() -> Self {
        Self {
            label_policy: LabelPolicy::AllFieldsAreMembers,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome {
    pub dataset: Dataset,
    /// Skipped lines; `record` is the zero-based line number.
    pub diagnostics: Vec<Diagnostic>,
}

pub fn parse_transactions<R: Read>(mut source: R, format: &TransactionFormat) -> Result<ParseOutcome> {
    if format.transpose && format.label_policy != LabelPolicy::FirstFieldIsRecordLabel {
        return Err(Error::InvalidParameter(
            "transposed parsing needs record labels".into(),
        ));
    }
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = String::from_utf8_lossy(&bytes);

    let mut records: Vec<(String, Vec<&str>)> = Vec::new();
    let mut diagnostics = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(format.delimiter).map(str::trim);
        let label = match format.label_policy {
            LabelPolicy::FirstFieldIsRecordLabel => fields.next().unwrap_or_default().to_owned(),
            LabelPolicy::AllFieldsAreMembers => String::new(),
        };
        let members: Vec<&str> = fields.collect();
        let problem = if members.iter().any(|m| m.is_empty()) {
            Some("empty field".to_owned())
        } else if format.label_policy == LabelPolicy::FirstFieldIsRecordLabel && label.is_empty() {
            Some("empty record label".to_owned())
        } else {
            check_tokens(&members).err()
        };
        match problem {
            Some(reason) => diagnostics.push(Diagnostic {
                record: line_no,
                reason,
            }),
            None => records.push((label, members)),
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let dataset = if format.transpose {
        transpose(&records, &mut diagnostics)
    } else {
        let mut vocabulary = Vocabulary::new();
        let events = records
            .iter()
            .map(|(_, members)| {
                let ids = members.iter().map(|m| vocabulary.intern(m)).collect();
                Event::new(ids).expect("tokens already checked")
            })
            .collect();
        Dataset { vocabulary, events }
    };
    Ok(ParseOutcome {
        dataset,
        diagnostics,
    })
}

fn transpose(records: &[(String, Vec<&str>)], diagnostics: &mut Vec<Diagnostic>) -> Dataset {
    let mut vocabulary = Vocabulary::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<Vec<_>> = Vec::new();
    for (k, (label, members)) in records.iter().enumerate() {
        if vocabulary.get(label).is_some() {
            diagnostics.push(Diagnostic {
                record: k,
                reason: format!("record label `{label}` repeated"),
            });
            continue;
        }
        let id = vocabulary.intern(label);
        for m in members {
            let g = *slot.entry(m).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(id);
        }
    }
    let events = groups
        .into_iter()
        .map(|g| Event::new(g).expect("labels are unique"))
        .collect();
    Dataset { vocabulary, events }
}

/// Writes `dataset` back out as transaction lines. Record labels, when the
/// format asks for them, are `r0`, `r1`, ...
pub fn write_transactions(dataset: &Dataset, format: &TransactionFormat) -> String {
    let delim = format.delimiter.to_string();
    let mut out = String::new();
    for (k, event) in dataset.events.iter().enumerate() {
        let members = dataset.event_labels(event).join(&delim);
        if format.label_policy == LabelPolicy::FirstFieldIsRecordLabel {
            out.push_str(&format!("r{k}{delim}"));
        }
        out.push_str(&members);
        out.push('\n');
    }
    out
}

/// Reads a reference partition stored as a JSON list of label lists.
pub fn parse_reference(json: &str) -> Result<LabeledPartition> {
    let blocks: Vec<Vec<String>> =
        serde_json::from_str(json).map_err(|e| Error::Reference(e.to_string()))?;
    LabeledPartition::from_blocks(blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureId {
    SevenEvent,
    AppendixAReference,
}

impl FromStr for FixtureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seven_event" => Ok(FixtureId::SevenEvent),
            "appendix_a_reference" => Ok(FixtureId::AppendixAReference),
            other => Err(Error::UnknownFixture(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fixture {
    Events(Dataset),
    Reference(LabeledPartition),
}

pub fn load_fixture(name: &str) -> Result<Fixture> {
    Ok(match name.parse::<FixtureId>()? {
        FixtureId::SevenEvent => Fixture::Events(seven_event()),
        FixtureId::AppendixAReference => Fixture::Reference(appendix_a_reference()),
    })
}

/// The seven-event worked example over A..G; event `k` has source `A + k`.
pub fn seven_event() -> Dataset {
    parse_transactions(SEVEN_EVENT.as_bytes(), &TransactionFormat::members_only())
        .expect("bundled fixture parses")
        .dataset
}

/// The 31-cluster reference partition of the 70 Plants region codes.
pub fn appendix_a_reference() -> LabeledPartition {
    parse_reference(APPENDIX_A_REFERENCE).expect("bundled reference parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarId;

    #[test]
    fn label_policy_drops_species_name() {
        let out = parse_transactions("abies,al,ak\n".as_bytes(), &TransactionFormat::default()).unwrap();
        assert_eq!(out.dataset.decode(), vec![vec!["al", "ak"]]);
        assert!(out.diagnostics.is_empty());
    }

    #[test]
    fn empty_input_is_an_error() {
        let fmt = TransactionFormat::default();
        assert_eq!(parse_transactions("".as_bytes(), &fmt), Err(Error::EmptyDataset));
        assert_eq!(parse_transactions("\n\n  \n".as_bytes(), &fmt), Err(Error::EmptyDataset));
        assert_eq!(parse_transactions("lonely\n".as_bytes(), &fmt), Err(Error::EmptyDataset));
    }

    #[test]
    fn malformed_lines_become_diagnostics() {
        let input = "a,x,y\nb\n\nc,x,,y\nd,y,y\ne,z\n";
        let out = parse_transactions(input.as_bytes(), &TransactionFormat::default()).unwrap();
        assert_eq!(out.dataset.events.len(), 2);
        let lines: Vec<usize> = out.diagnostics.iter().map(|d| d.record).collect();
        assert_eq!(lines, vec![1, 3, 4]);
        assert_eq!(out.dataset.vocabulary.labels(), &["x", "y", "z"]);
    }

    #[test]
    fn non_utf8_species_names_are_tolerated() {
        let mut input = b"caf".to_vec();
        input.extend_from_slice(&[0xe9, 0xff]);
        input.extend_from_slice(b",qc,on\r\nabies,on\r\n");
        let out = parse_transactions(&input[..], &TransactionFormat::default()).unwrap();
        assert_eq!(out.dataset.decode(), vec![vec!["qc", "on"], vec!["on"]]);
    }

    #[test]
    fn transposed_parsing_clusters_records() {
        let fmt = TransactionFormat {
            transpose: true,
            ..TransactionFormat::default()
        };
        let out = parse_transactions("p1,al,ak\np2,ak\np1,al\n".as_bytes(), &fmt).unwrap();
        assert_eq!(out.dataset.vocabulary.labels(), &["p1", "p2"]);
        assert_eq!(out.dataset.decode(), vec![vec!["p1"], vec!["p1", "p2"]]);
        assert_eq!(out.diagnostics.len(), 1);

        let bad = TransactionFormat {
            transpose: true,
            ..TransactionFormat::members_only()
        };
        assert!(parse_transactions("a,b".as_bytes(), &bad).is_err());
    }

    #[test]
    fn custom_delimiter() {
        let fmt = TransactionFormat {
            delimiter: '\t',
            ..TransactionFormat::members_only()
        };
        let out = parse_transactions("a\tb\nb\tc\n".as_bytes(), &fmt).unwrap();
        assert_eq!(out.dataset.vocabulary.len(), 3);
    }

    #[test]
    fn seven_event_fixture() {
        let ds = seven_event();
        assert_eq!(ds.vocabulary.labels(), &["A", "B", "C", "D", "E", "F", "G"]);
        assert_eq!(ds.events.len(), 7);
        assert_eq!(ds.decode()[0], vec!["A", "B", "C", "D", "E"]);
        let sources: Vec<usize> = ds.events.iter().map(|e| e.source().index()).collect();
        assert_eq!(sources, (0..7).collect::<Vec<_>>());
        assert_eq!(ds.events[4].members(), &[VarId(4), VarId(0), VarId(5), VarId(6)]);
    }

    #[test]
    fn appendix_reference_fixture() {
        let Fixture::Reference(p) = load_fixture("appendix_a_reference").unwrap() else {
            panic!("expected a reference partition");
        };
        assert_eq!(p.clusters.len(), 31);
        assert_eq!(p.clusters[0], vec!["fl", "hi", "pr"]);
        assert_eq!(p.universe().len(), 70);
        assert_eq!(p.clusters.iter().filter(|c| c.len() == 1).count(), 10);
    }

    #[test]
    fn unknown_fixture() {
        assert_eq!(
            load_fixture("plants"),
            Err(Error::UnknownFixture("plants".into()))
        );
    }

    #[test]
    fn reference_json_errors() {
        assert!(matches!(parse_reference("{"), Err(Error::Reference(_))));
        assert!(parse_reference(r#"[["a"],["a","b"]]"#).is_err());
    }
}
