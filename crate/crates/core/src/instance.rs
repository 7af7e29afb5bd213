use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CakeError, Result};
use crate::oracle::{Oracle, QueryCounter};
use crate::valuation::Valuation;

/// A cake-division instance: `n` agents, each referring to a named valuation.
///
/// Agents that share a valuation id are known to have identical valuations;
/// the bounded-heterogeneity solver relies on that multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "InstanceFile", try_from = "InstanceFile")]
pub struct Instance {
    valuations: BTreeMap<String, Valuation>,
    agents: Vec<String>,
}

impl Instance {
    pub fn new(valuations: BTreeMap<String, Valuation>, agents: Vec<String>) -> Result<Self> {
        if agents.is_empty() {
            return Err(CakeError::Instance("an instance needs at least one agent".into()));
        }
        if let Some((i, id)) = agents
            .iter()
            .enumerate()
            .find(|(_, id)| !valuations.contains_key(*id))
        {
            return Err(CakeError::Instance(format!(
                "agent {} refers to unknown valuation `{id}`",
                i + 1
            )));
        }
        Ok(Instance { valuations, agents })
    }

    /// Every agent gets its own valuation, ids `v1..vn`.
    pub fn from_valuations(valuations: Vec<Valuation>) -> Result<Self> {
        let ids: Vec<String> = (1..=valuations.len()).map(|i| format!("v{i}")).collect();
        Instance::new(ids.iter().cloned().zip(valuations).collect(), ids)
    }

    /// `n` agents sharing one valuation.
    pub fn identical(n: usize, valuation: Valuation) -> Result<Self> {
        let id = "v1".to_string();
        Instance::new(BTreeMap::from([(id.clone(), valuation)]), vec![id; n])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CakeError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances always serialize")
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[&self.agents[agent]]
    }

    pub fn valuation_id(&self, agent: usize) -> &str {
        &self.agents[agent]
    }

    pub fn valuations(&self) -> &BTreeMap<String, Valuation> {
        &self.valuations
    }

    /// Ids referenced by at least one agent, in sorted order.
    pub fn distinct_valuation_ids(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.agents.iter().map(String::as_str).collect();
        set.into_iter().collect()
    }

    pub fn distinct_valuations(&self) -> usize {
        self.distinct_valuation_ids().len()
    }

    pub fn oracles<'a>(&'a self, counter: &'a QueryCounter) -> Vec<Oracle<'a>> {
        (0..self.n())
            .map(|i| Oracle::new(self.valuation(i), counter))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct AgentEntry {
    valuation: String,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    agents: Vec<AgentEntry>,
    valuations: BTreeMap<String, Valuation>,
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        InstanceFile {
            agents: inst
                .agents
                .into_iter()
                .map(|valuation| AgentEntry { valuation })
                .collect(),
            valuations: inst.valuations,
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = CakeError;

    fn try_from(file: InstanceFile) -> Result<Self> {
        Instance::new(
            file.valuations,
            file.agents.into_iter().map(|a| a.valuation).collect(),
        )
    }
}
