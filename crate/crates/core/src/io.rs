//! JSON formats shared by the command-line tool and the browser demo.
//!
//! Probabilities and weights are strings holding exact rationals (`"5/12"`,
//! `"1"`), so files round-trip without loss. Agents and objects are
//! referenced by their identifiers.
//!
//! - Instance: `{"objects": [{"id", "capacity"}], "agents": [{"id", "prefs"}]}`.
//! - Matching: `{"assignment": {"agent id": "object id" | null}}`.
//! - Assignment matrix: `{"agents": [...], "objects": [...], "rows": [["1/2", ...]]}`.
//! - Decomposition: `{"objects": [...], "terms": [{"weight", "assignment"}]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assignment::{Decomposition, Matching, ProbabilisticAssignment};
use crate::error::{Error, Result};
use crate::instance::{Instance, RawInstance};
use crate::rational::{format_rat, parse_rat};

pub fn parse_instance(json: &str) -> Result<Instance> {
    let raw: RawInstance = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    Instance::validate(&raw)
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&inst.to_raw()).expect("instances serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingFile {
    pub assignment: BTreeMap<String, Option<String>>,
}

impl MatchingFile {
    pub fn from_matching(inst: &Instance, m: &Matching) -> Self {
        MatchingFile {
            assignment: (0..inst.n_agents())
                .map(|i| {
                    (
                        inst.agent_ids()[i].clone(),
                        m.get(i).map(|j| inst.object_ids()[j].clone()),
                    )
                })
                .collect(),
        }
    }

    /// Agents missing from the file are unassigned.
    pub fn to_matching(&self, inst: &Instance) -> Result<Matching> {
        let mut m = Matching::unassigned(inst.n_agents());
        for (agent, object) in &self.assignment {
            let i = inst
                .agent_index(agent)
                .ok_or_else(|| Error::Parse(format!("unknown agent `{agent}`")))?;
            let j = match object {
                Some(o) => Some(
                    inst.object_index(o)
                        .ok_or_else(|| Error::Parse(format!("unknown object `{o}`")))?,
                ),
                None => None,
            };
            m.set(i, j);
        }
        Ok(m)
    }
}

pub fn parse_matching(inst: &Instance, json: &str) -> Result<Matching> {
    let f: MatchingFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    f.to_matching(inst)
}

pub fn matching_to_json(inst: &Instance, m: &Matching) -> String {
    serde_json::to_string_pretty(&MatchingFile::from_matching(inst, m)).expect("serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub agents: Vec<String>,
    pub objects: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl MatrixFile {
    pub fn from_assignment(inst: &Instance, x: &ProbabilisticAssignment) -> Self {
        MatrixFile {
            agents: inst.agent_ids().to_vec(),
            objects: inst.object_ids().to_vec(),
            rows: (0..x.n_agents())
                .map(|i| x.row(i).iter().map(format_rat).collect())
                .collect(),
        }
    }

    /// Reorders rows and columns to the instance's indices.
    pub fn to_assignment(&self, inst: &Instance) -> Result<ProbabilisticAssignment> {
        if self.rows.len() != self.agents.len() {
            return Err(Error::Parse(format!(
                "{} agents but {} rows",
                self.agents.len(),
                self.rows.len()
            )));
        }
        let mut x = ProbabilisticAssignment::zeros(inst.n_agents(), inst.n_objects());
        let cols: Vec<usize> = self
            .objects
            .iter()
            .map(|o| inst.object_index(o).ok_or_else(|| Error::Parse(format!("unknown object `{o}`"))))
            .collect::<Result<_>>()?;
        for (a, row) in self.agents.iter().zip(&self.rows) {
            let i = inst
                .agent_index(a)
                .ok_or_else(|| Error::Parse(format!("unknown agent `{a}`")))?;
            if row.len() != cols.len() {
                return Err(Error::Parse(format!(
                    "row of agent `{a}` has {} entries, expected {}",
                    row.len(),
                    cols.len()
                )));
            }
            for (&j, v) in cols.iter().zip(row) {
                let r = parse_rat(v).ok_or_else(|| Error::Parse(format!("bad probability `{v}`")))?;
                x.set(i, j, r);
            }
        }
        Ok(x)
    }
}

pub fn parse_assignment(inst: &Instance, json: &str) -> Result<ProbabilisticAssignment> {
    let f: MatrixFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let x = f.to_assignment(inst)?;
    x.check_feasible(inst)?;
    Ok(x)
}

pub fn assignment_to_json(inst: &Instance, x: &ProbabilisticAssignment) -> String {
    serde_json::to_string_pretty(&MatrixFile::from_assignment(inst, x)).expect("serializes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermFile {
    pub weight: String,
    pub cardinality: usize,
    pub assignment: BTreeMap<String, Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub objects: Vec<String>,
    pub terms: Vec<TermFile>,
}

impl DecompositionFile {
    pub fn from_decomposition(inst: &Instance, d: &Decomposition) -> Self {
        DecompositionFile {
            objects: inst.object_ids().to_vec(),
            terms: d
                .terms()
                .iter()
                .map(|(w, m)| TermFile {
                    weight: format_rat(w),
                    cardinality: m.cardinality(),
                    assignment: MatchingFile::from_matching(inst, m).assignment,
                })
                .collect(),
        }
    }

    pub fn to_decomposition(&self, inst: &Instance) -> Result<Decomposition> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let w = parse_rat(&t.weight)
                    .ok_or_else(|| Error::Parse(format!("bad weight `{}`", t.weight)))?;
                let m = MatchingFile {
                    assignment: t.assignment.clone(),
                }
                .to_matching(inst)?;
                Ok((w, m))
            })
            .collect::<Result<Vec<_>>>()?;
        Decomposition::new(inst.n_objects(), terms)
    }
}

pub fn decomposition_to_json(inst: &Instance, d: &Decomposition) -> String {
    serde_json::to_string_pretty(&DecompositionFile::from_decomposition(inst, d)).expect("serializes")
}

pub fn parse_decomposition(inst: &Instance, json: &str) -> Result<Decomposition> {
    let f: DecompositionFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    f.to_decomposition(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn example() -> Instance {
        Instance::from_lists(&[2, 1, 1], &[vec![0, 1, 2], vec![0, 1, 2], vec![0], vec![0]]).unwrap()
    }

    #[test]
    fn instance_roundtrip() {
        let inst = example();
        assert_eq!(parse_instance(&instance_to_json(&inst)).unwrap(), inst);
    }

    #[test]
    fn matrix_roundtrip() {
        let inst = example();
        let mut x = ProbabilisticAssignment::zeros(4, 3);
        x.set(0, 0, rat(1, 2));
        x.set(0, 1, rat(5, 12));
        x.set(3, 0, rat(1, 3));
        let back = parse_assignment(&inst, &assignment_to_json(&inst, &x)).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn decomposition_roundtrip() {
        let inst = example();
        let a = Matching::new(vec![Some(1), Some(0), Some(0), None]);
        let b = Matching::new(vec![Some(0), Some(1), None, Some(0)]);
        let d = Decomposition::new(3, vec![(rat(1, 3), a), (rat(2, 3), b)]).unwrap();
        let back = parse_decomposition(&inst, &decomposition_to_json(&inst, &d)).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn unknown_ids_are_reported() {
        let inst = example();
        let err = parse_matching(&inst, r#"{"assignment": {"9": "o1"}}"#).unwrap_err();
        assert!(err.to_string().contains("unknown agent"));
        assert!(parse_instance("{").is_err());
    }
}
