//! One-sided matching instances: agents, capacitated objects and strict
//! preference lists truncated at the outside option.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Serialized form of an instance, as read from and written to disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInstance {
    pub objects: Vec<RawObject>,
    pub agents: Vec<RawAgent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawObject {
    pub id: String,
    pub capacity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAgent {
    pub id: String,
    /// Acceptable objects, most preferred first.
    pub prefs: Vec<String>,
}

/// A validated instance.
///
/// Preference lists only contain the objects an agent prefers to staying
/// unassigned; everything after the outside option is dropped, since no
/// mechanism here ever assigns an agent past it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<String>,
    objects: Vec<String>,
    capacities: Vec<u32>,
    prefs: Vec<Vec<usize>>,
    // rank[i * m + j] = position of object j in agent i's list
    rank: Vec<Option<u32>>,
}

impl Instance {
    /// Validates a raw description, reporting every violation at once.
    pub fn validate(raw: &RawInstance) -> Result<Instance> {
        let mut violations = Vec::new();

        let mut object_index = HashMap::new();
        for (j, o) in raw.objects.iter().enumerate() {
            if object_index.insert(o.id.as_str(), j).is_some() {
                violations.push(Violation::DuplicateObject(o.id.clone()));
            }
            if o.capacity < 1 || o.capacity > u32::MAX as u64 {
                violations.push(Violation::BadCapacity(o.id.clone(), o.capacity));
            }
        }

        let mut seen_agents = HashSet::new();
        let mut prefs = Vec::with_capacity(raw.agents.len());
        for a in &raw.agents {
            if !seen_agents.insert(a.id.as_str()) {
                violations.push(Violation::DuplicateAgent(a.id.clone()));
            }
            let mut list = Vec::with_capacity(a.prefs.len());
            let mut listed = HashSet::new();
            for o in &a.prefs {
                match object_index.get(o.as_str()) {
                    None => violations.push(Violation::UnknownObject {
                        agent: a.id.clone(),
                        object: o.clone(),
                    }),
                    Some(&j) => {
                        if listed.insert(j) {
                            list.push(j);
                        } else {
                            violations.push(Violation::DuplicatePreference {
                                agent: a.id.clone(),
                                object: o.clone(),
                            });
                        }
                    }
                }
            }
            prefs.push(list);
        }

        if !violations.is_empty() {
            return Err(Error::InvalidInstance(violations));
        }

        Ok(Self::build(
            raw.agents.iter().map(|a| a.id.clone()).collect(),
            raw.objects.iter().map(|o| o.id.clone()).collect(),
            raw.objects.iter().map(|o| o.capacity as u32).collect(),
            prefs,
        ))
    }

    /// Builds an instance from index-based preference lists, naming agents
    /// `1..=n` and objects `o1..=om`.
    pub fn from_lists(capacities: &[u32], prefs: &[Vec<usize>]) -> Result<Instance> {
        let raw = RawInstance {
            objects: capacities
                .iter()
                .enumerate()
                .map(|(j, &c)| RawObject {
                    id: format!("o{}", j + 1),
                    capacity: c as u64,
                })
                .collect(),
            agents: prefs
                .iter()
                .enumerate()
                .map(|(i, list)| RawAgent {
                    id: (i + 1).to_string(),
                    prefs: list.iter().map(|j| format!("o{}", j + 1)).collect(),
                })
                .collect(),
        };
        for list in prefs {
            if let Some(&j) = list.iter().find(|&&j| j >= capacities.len()) {
                return Err(Error::InvalidInstance(vec![Violation::UnknownObject {
                    agent: "?".into(),
                    object: format!("o{}", j + 1),
                }]));
            }
        }
        Self::validate(&raw)
    }

    fn build(
        agents: Vec<String>,
        objects: Vec<String>,
        capacities: Vec<u32>,
        prefs: Vec<Vec<usize>>,
    ) -> Instance {
        let m = objects.len();
        let mut rank = vec![None; agents.len() * m];
        for (i, list) in prefs.iter().enumerate() {
            for (r, &j) in list.iter().enumerate() {
                rank[i * m + j] = Some(r as u32);
            }
        }
        Instance {
            agents,
            objects,
            capacities,
            prefs,
            rank,
        }
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            objects: self
                .objects
                .iter()
                .zip(&self.capacities)
                .map(|(id, &c)| RawObject {
                    id: id.clone(),
                    capacity: c as u64,
                })
                .collect(),
            agents: self
                .agents
                .iter()
                .zip(&self.prefs)
                .map(|(id, list)| RawAgent {
                    id: id.clone(),
                    prefs: list.iter().map(|&j| self.objects[j].clone()).collect(),
                })
                .collect(),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn agent_ids(&self) -> &[String] {
        &self.agents
    }

    pub fn object_ids(&self) -> &[String] {
        &self.objects
    }

    pub fn capacity(&self, j: usize) -> u32 {
        self.capacities[j]
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn total_capacity(&self) -> u64 {
        self.capacities.iter().map(|&c| c as u64).sum()
    }

    /// Agent `i`'s acceptable objects, most preferred first.
    pub fn prefs(&self, i: usize) -> &[usize] {
        &self.prefs[i]
    }

    /// Position of `j` in agent `i`'s list, `None` when unacceptable.
    pub fn rank(&self, i: usize, j: usize) -> Option<usize> {
        self.rank[i * self.objects.len() + j].map(|r| r as usize)
    }

    pub fn is_acceptable(&self, i: usize, j: usize) -> bool {
        self.rank(i, j).is_some()
    }

    /// Rank of an allocation, with the outside option (`None`) placed right
    /// after the last acceptable object.
    pub fn allocation_rank(&self, i: usize, alloc: Option<usize>) -> usize {
        match alloc {
            Some(j) => self.rank(i, j).unwrap_or(usize::MAX),
            None => self.prefs[i].len(),
        }
    }

    /// Whether agent `i` strictly prefers allocation `a` to allocation `b`.
    pub fn prefers(&self, i: usize, a: Option<usize>, b: Option<usize>) -> bool {
        self.allocation_rank(i, a) < self.allocation_rank(i, b)
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == id)
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == id)
    }

    /// Number of constraint sets in the rows/columns/cells structure.
    pub fn constraint_set_count(&self) -> usize {
        let (n, m) = (self.n_agents(), self.n_objects());
        n * m + n + m
    }
}
