//! On-disk formats. Every file is TOML with a `format_version` key.
//!
//! A scenario directory holds three files:
//!
//! * `scenario.toml`: the [`ScenarioConfig`] used to draw it;
//! * `substrate.toml`: `nodes = [[cpu, sto, security_level], ...]` and
//!   `links = [[a, b, bandwidth], ...]`, indices implied by position;
//! * `requests.toml`: one `[[requests]]` table per request with `id`,
//!   `arrival_time`, `lifetime`, `nodes = [[cpu, sto, security], ...]` and
//!   `links = [[a, b, bandwidth], ...]`.
//!
//! A model is a single `model.toml` (see [`ModelArtifact`]).

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VneError};
use crate::network::{SecurityLevel, SubstrateNetwork, SubstrateNode, Units, VirtualLink, VirtualNode, VirtualRequest};
use crate::policy::PolicyParams;
use crate::scenario::{split_train_test, EventStream, ScenarioConfig};

pub const FORMAT_VERSION: u32 = 1;

pub const SCENARIO_FILE: &str = "scenario.toml";
pub const SUBSTRATE_FILE: &str = "substrate.toml";
pub const REQUESTS_FILE: &str = "requests.toml";
pub const MODEL_FILE: &str = "model.toml";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    format_version: u32,
    config: ScenarioConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubstrateFile {
    format_version: u32,
    nodes: Vec<(Units, Units, u8)>,
    links: Vec<(usize, usize, Units)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestRow {
    id: u64,
    arrival_time: f64,
    lifetime: f64,
    nodes: Vec<(Units, Units, u8)>,
    links: Vec<(usize, usize, Units)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestsFile {
    format_version: u32,
    requests: Vec<RequestRow>,
}

/// A generated substrate together with its full request stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub substrate: SubstrateNetwork,
    pub stream: EventStream,
}

impl Scenario {
    pub fn split(&self) -> (EventStream, EventStream) {
        split_train_test(&self.stream, &self.config)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| VneError::io(dir, e))?;
        let scenario = ScenarioFile {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
        };
        let substrate = SubstrateFile {
            format_version: FORMAT_VERSION,
            nodes: self
                .substrate
                .nodes()
                .iter()
                .map(|n| (n.cpu_capacity(), n.sto_capacity(), n.security_level().get()))
                .collect(),
            links: self
                .substrate
                .links()
                .iter()
                .map(|l| (l.endpoints().0, l.endpoints().1, l.bw_capacity()))
                .collect(),
        };
        let requests = RequestsFile {
            format_version: FORMAT_VERSION,
            requests: self
                .stream
                .requests()
                .map(|r| RequestRow {
                    id: r.request_id,
                    arrival_time: r.arrival_time,
                    lifetime: r.lifetime,
                    nodes: r
                        .nodes
                        .iter()
                        .map(|n| (n.cpu_demand, n.sto_demand, n.security_requirement.get()))
                        .collect(),
                    links: r.links.iter().map(|l| (l.a, l.b, l.bw_demand)).collect(),
                })
                .collect(),
        };
        write_toml(&dir.join(SCENARIO_FILE), &scenario)?;
        write_toml(&dir.join(SUBSTRATE_FILE), &substrate)?;
        write_toml(&dir.join(REQUESTS_FILE), &requests)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let scenario_path = dir.join(SCENARIO_FILE);
        let scenario: ScenarioFile = read_toml(&scenario_path)?;
        check_version(&scenario_path, scenario.format_version)?;
        scenario.config.validate()?;

        let substrate_path = dir.join(SUBSTRATE_FILE);
        let file: SubstrateFile = read_toml(&substrate_path)?;
        check_version(&substrate_path, file.format_version)?;
        let bad = |message: String| VneError::Format {
            path: substrate_path.clone(),
            message,
        };
        let nodes = file
            .nodes
            .iter()
            .map(|&(cpu, sto, level)| Ok(SubstrateNode::new(cpu, sto, SecurityLevel::new(level)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| bad(e.to_string()))?;
        let substrate = SubstrateNetwork::new(nodes, file.links).map_err(|e| bad(e.to_string()))?;

        let requests_path = dir.join(REQUESTS_FILE);
        let file: RequestsFile = read_toml(&requests_path)?;
        check_version(&requests_path, file.format_version)?;
        let max_nodes = scenario.config.max_request_nodes();
        let requests = file
            .requests
            .into_iter()
            .map(|row| {
                let req = VirtualRequest {
                    request_id: row.id,
                    arrival_time: row.arrival_time,
                    lifetime: row.lifetime,
                    nodes: row
                        .nodes
                        .into_iter()
                        .map(|(cpu, sto, level)| {
                            Ok(VirtualNode {
                                cpu_demand: cpu,
                                sto_demand: sto,
                                security_requirement: SecurityLevel::new(level)?,
                            })
                        })
                        .collect::<Result<_>>()?,
                    links: row
                        .links
                        .into_iter()
                        .map(|(a, b, bw_demand)| VirtualLink { a, b, bw_demand })
                        .collect(),
                };
                req.validate(max_nodes)?;
                Ok(req)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| VneError::Format {
                path: requests_path.clone(),
                message: e.to_string(),
            })?;
        Ok(Scenario {
            config: scenario.config,
            substrate,
            stream: EventStream::from_requests(requests),
        })
    }
}

/// Trained (or freshly initialized) policy parameters with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub kernel: [f64; 4],
    pub bias: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub init_std: f64,
    pub seed: u64,
    pub epochs: usize,
    pub batch_updates: usize,
}

impl ModelArtifact {
    pub fn params(&self) -> Result<PolicyParams<f64>> {
        PolicyParams::new(self.kernel, self.bias, self.learning_rate, self.batch_size)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_toml(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: ModelArtifact = read_toml(path)?;
        check_version(path, model.format_version)?;
        model.params().map_err(|e| VneError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(model)
    }
}

fn check_version(path: &Path, version: u32) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(VneError::Format {
            path: path.to_path_buf(),
            message: format!("unsupported format_version {version} (expected {FORMAT_VERSION})"),
        });
    }
    Ok(())
}

fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string(value).map_err(|e| VneError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    fs::write(path, text).map_err(|e| VneError::io(path, e))
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| VneError::io(path, e))?;
    toml::from_str(&text).map_err(|e| VneError::Format {
        path: PathBuf::from(path),
        message: e.to_string(),
    })
}
