//! Power network data: MATPOWER case ingestion, per-unit records, and the
//! π-model admittance quantities the ACOPF formulation is built from.
//!
//! All powers, admittances and limits are stored in per-unit on `base_mva`;
//! angles are in radians. Cost coefficients stay in physical units.

mod admittance;
mod matpower;
mod synthetic;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use admittance::{build_admittance, Admittance, BranchAdmittance, BusAdmittance};
pub use matpower::{parse_matpower, parse_matpower_with_report, to_matpower, MatrixBlock, ParseReport};
pub use synthetic::{tile_case, TileOptions};

/// External bus label as written in the case file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BusId(pub u64);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusType {
    Pq,
    Pv,
    Slack,
}

impl BusType {
    pub fn code(self) -> u8 {
        match self {
            BusType::Pq => 1,
            BusType::Pv => 2,
            BusType::Slack => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusRecord {
    pub id: BusId,
    pub bus_type: BusType,
    pub p_demand: f64,
    pub q_demand: f64,
    pub g_shunt: f64,
    pub b_shunt: f64,
    pub v_mag_init: f64,
    /// Radians.
    pub v_ang_init: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub base_kv: f64,
}

/// Polynomial generation cost in $/h with `p` in MW: `c2·p² + c1·p + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostPoly {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CostPoly {
    pub fn eval_mw(&self, p_mw: f64) -> f64 {
        (self.c2 * p_mw + self.c1) * p_mw + self.c0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRecord {
    pub bus: BusId,
    pub p_init: f64,
    pub q_init: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub v_setpoint: f64,
    pub cost: CostPoly,
    pub in_service: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub from_bus: BusId,
    pub to_bus: BusId,
    pub r: f64,
    pub x: f64,
    pub b_charging: f64,
    /// Off-nominal turns ratio; a file value of 0 is stored as 1.
    pub tap_ratio: f64,
    /// Radians.
    pub phase_shift: f64,
    /// Apparent-power limit; 0 means unlimited.
    pub rate_a: f64,
    pub in_service: bool,
}

impl BranchRecord {
    pub fn is_limited(&self) -> bool {
        self.rate_a > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCase {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<BusRecord>,
    pub gens: Vec<GenRecord>,
    pub branches: Vec<BranchRecord>,
    #[serde(skip)]
    bus_index: HashMap<BusId, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub n_bus: usize,
    pub n_gen: usize,
    pub n_branch: usize,
    pub base_mva: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("missing required block `mpc.{0}`")]
    MissingBlock(String),
    #[error("malformed {block} row {row}: {msg}")]
    MalformedRow { block: String, row: usize, msg: String },
    #[error("unsupported generator cost in row {row}: {msg}")]
    UnsupportedCost { row: usize, msg: String },
    #[error("duplicate bus id {0}")]
    DuplicateBus(BusId),
    #[error("{what} references unknown bus {bus}")]
    UnknownBus { what: String, bus: BusId },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("branch {index} ({from}-{to}) has zero impedance")]
    ZeroImpedance { index: usize, from: BusId, to: BusId },
    #[error("branch {index} connects bus {bus} to itself")]
    SelfLoop { index: usize, bus: BusId },
    #[error("case has no slack bus")]
    NoSlack,
    #[error("case has {0} slack buses, expected one")]
    MultipleSlack(usize),
    #[error("case has no in-service generator")]
    NoGenerator,
    #[error("bus {0} is not connected to the slack bus")]
    Disconnected(BusId),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl GridCase {
    /// Build a case from records and validate all cross-references.
    pub fn new(
        name: impl Into<String>,
        base_mva: f64,
        buses: Vec<BusRecord>,
        gens: Vec<GenRecord>,
        branches: Vec<BranchRecord>,
    ) -> Result<Self, GridError> {
        let mut bus_index = HashMap::with_capacity(buses.len());
        for (k, b) in buses.iter().enumerate() {
            if bus_index.insert(b.id, k).is_some() {
                return Err(GridError::DuplicateBus(b.id));
            }
        }
        let case = Self {
            name: name.into(),
            base_mva,
            buses,
            gens,
            branches,
            bus_index,
        };
        case.validate()?;
        Ok(case)
    }

    fn validate(&self) -> Result<(), GridError> {
        if !(self.base_mva > 0.0) {
            return Err(GridError::InvalidBounds(format!("base_mva = {}", self.base_mva)));
        }
        for b in &self.buses {
            if !(b.v_min > 0.0 && b.v_min <= b.v_max) {
                return Err(GridError::InvalidBounds(format!(
                    "bus {}: v_min = {}, v_max = {}",
                    b.id, b.v_min, b.v_max
                )));
            }
        }
        for (k, g) in self.gens.iter().enumerate() {
            self.require_bus(g.bus, || format!("generator {k}"))?;
            if !(g.p_min <= g.p_max && g.q_min <= g.q_max) {
                return Err(GridError::InvalidBounds(format!(
                    "generator {k} at bus {}: P in [{}, {}], Q in [{}, {}]",
                    g.bus, g.p_min, g.p_max, g.q_min, g.q_max
                )));
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            self.require_bus(br.from_bus, || format!("branch {k}"))?;
            self.require_bus(br.to_bus, || format!("branch {k}"))?;
            if br.from_bus == br.to_bus {
                return Err(GridError::SelfLoop {
                    index: k,
                    bus: br.from_bus,
                });
            }
            if br.in_service && br.r == 0.0 && br.x == 0.0 {
                return Err(GridError::ZeroImpedance {
                    index: k,
                    from: br.from_bus,
                    to: br.to_bus,
                });
            }
        }
        Ok(())
    }

    fn require_bus(&self, bus: BusId, what: impl FnOnce() -> String) -> Result<usize, GridError> {
        self.bus_index
            .get(&bus)
            .copied()
            .ok_or_else(|| GridError::UnknownBus { what: what(), bus })
    }

    /// Internal 0-based index of an external bus id.
    pub fn index_of(&self, bus: BusId) -> Option<usize> {
        self.bus_index.get(&bus).copied()
    }

    pub fn n_bus(&self) -> usize {
        self.buses.len()
    }

    pub fn slack_bus(&self) -> Result<usize, GridError> {
        let mut slack = self
            .buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.bus_type == BusType::Slack)
            .map(|(k, _)| k);
        match (slack.next(), slack.count()) {
            (None, _) => Err(GridError::NoSlack),
            (Some(k), 0) => Ok(k),
            (Some(_), more) => Err(GridError::MultipleSlack(more + 1)),
        }
    }

    /// Rebuild the id index after deserialization.
    pub fn reindex(&mut self) -> Result<(), GridError> {
        let rebuilt = GridCase::new(
            std::mem::take(&mut self.name),
            self.base_mva,
            std::mem::take(&mut self.buses),
            std::mem::take(&mut self.gens),
            std::mem::take(&mut self.branches),
        )?;
        *self = rebuilt;
        Ok(())
    }
}

pub fn case_summary(case: &GridCase) -> CaseSummary {
    CaseSummary {
        n_bus: case.buses.len(),
        n_gen: case.gens.len(),
        n_branch: case.branches.len(),
        base_mva: case.base_mva.round() as u64,
    }
}

/// Read and parse a MATPOWER file; the case name defaults to the file stem.
pub fn load_case(path: impl AsRef<Path>) -> Result<GridCase, GridError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| GridError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut case = parse_matpower(&text)?;
    if case.name.is_empty() {
        if let Some(stem) = path.file_stem() {
            case.name = stem.to_string_lossy().into_owned();
        }
    }
    Ok(case)
}

#[cfg(test)]
mod tests;
