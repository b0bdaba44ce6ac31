//! Core grid data model. All quantities per-unit on `base_mva`.

use serde::{Deserialize, Serialize};

use crate::{GridError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BusType {
    Pq,
    Pv,
    Slack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    /// External bus number from the source file.
    pub id: usize,
    pub bus_type: BusType,
    pub vm_min: f64,
    pub vm_max: f64,
    /// Shunt conductance (per-unit power at Vm = 1).
    pub gs: f64,
    /// Shunt susceptance (per-unit power at Vm = 1).
    pub bs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    /// Internal bus index.
    pub bus: usize,
    pub pd: f64,
    pub qd: f64,
}

/// Quadratic cost curve c2*Pg^2 + c1*Pg + c0 in $/h with Pg per-unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostCurve {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CostCurve {
    pub fn eval(&self, pg: f64) -> f64 {
        (self.c2 * pg + self.c1) * pg + self.c0
    }

    pub fn grad(&self, pg: f64) -> f64 {
        2.0 * self.c2 * pg + self.c1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gen {
    /// Internal bus index.
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub cost: CostCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    /// Internal from-bus index.
    pub from: usize,
    /// Internal to-bus index.
    pub to: usize,
    pub r: f64,
    pub x: f64,
    /// Total line charging susceptance.
    pub b: f64,
    /// Apparent-power limit; `None` when not enforced.
    pub rate_a: Option<f64>,
    pub status: bool,
}

impl Branch {
    /// Series impedance magnitude |Z| = |r + jx|.
    pub fn z_abs(&self) -> f64 {
        self.r.hypot(self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCase {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub loads: Vec<Load>,
    pub gens: Vec<Gen>,
    pub branches: Vec<Branch>,
}

impl GridCase {
    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn n_loads(&self) -> usize {
        self.loads.len()
    }

    /// Internal index of the slack bus.
    pub fn slack(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.bus_type == BusType::Slack)
            .expect("validated case has a slack bus")
    }

    /// Distinct bus indices hosting at least one generator, ascending.
    pub fn gen_buses(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.gens.iter().map(|g| g.bus).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Structural checks; every parsed or deserialized case goes through this.
    pub fn validate(&self) -> Result<()> {
        if self.buses.is_empty() {
            return Err(GridError::EmptyGrid("no buses"));
        }
        let n = self.buses.len();
        let slack_count = self
            .buses
            .iter()
            .filter(|b| b.bus_type == BusType::Slack)
            .count();
        if slack_count == 0 {
            return Err(GridError::NoSlackBus);
        }
        if slack_count > 1 {
            return Err(GridError::MultipleSlackBuses(slack_count));
        }
        for l in &self.loads {
            if l.bus >= n {
                return Err(GridError::UnresolvedBus(l.bus));
            }
        }
        for (i, g) in self.gens.iter().enumerate() {
            if g.bus >= n {
                return Err(GridError::UnresolvedBus(g.bus));
            }
            if g.p_min > g.p_max || g.q_min > g.q_max {
                return Err(GridError::InvertedGenLimits(i));
            }
        }
        for (i, br) in self.branches.iter().enumerate() {
            if br.from >= n || br.to >= n {
                return Err(GridError::UnresolvedBus(br.from.max(br.to)));
            }
            if br.status && br.x == 0.0 {
                return Err(GridError::ZeroReactance(i));
            }
        }
        Ok(())
    }

    /// Whether all buses form a single component over in-service branches.
    pub fn is_connected(&self) -> bool {
        self.component_labels().iter().all(|&c| c == 0)
    }

    /// Component label per bus (0 for the component containing bus 0),
    /// using in-service branches only.
    pub fn component_labels(&self) -> Vec<usize> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in self.branches.iter().filter(|b| b.status) {
            adj[br.from].push(br.to);
            adj[br.to].push(br.from);
        }
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// BFS hop distances from `bus` over in-service branches.
    /// `usize::MAX` marks unreachable buses.
    pub fn bus_distances(&self, bus: usize) -> Vec<usize> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in self.branches.iter().filter(|b| b.status) {
            adj[br.from].push(br.to);
            adj[br.to].push(br.from);
        }
        let mut dist = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        dist[bus] = 0;
        queue.push_back(bus);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Take branch `idx` out of service, leaving `self` untouched.
    pub fn remove_line(&self, idx: usize) -> Result<LineRemoval> {
        if idx >= self.branches.len() {
            return Err(GridError::BranchOutOfRange(idx));
        }
        if !self.branches[idx].status {
            return Err(GridError::BranchAlreadyOff(idx));
        }
        let mut case = self.clone();
        case.branches[idx].status = false;
        let connected = case.is_connected();
        Ok(LineRemoval { case, connected })
    }

    /// Canonical structured-text serialization (one JSON object per case).
    pub fn to_canonical(&self) -> String {
        serde_json::to_string_pretty(self).expect("case serialization cannot fail")
    }

    pub fn from_canonical(text: &str) -> Result<GridCase> {
        let case: GridCase =
            serde_json::from_str(text).map_err(|e| GridError::Canonical(e.to_string()))?;
        case.validate()?;
        Ok(case)
    }
}

/// Outcome of a single line-outage contingency.
#[derive(Debug, Clone)]
pub struct LineRemoval {
    pub case: GridCase,
    /// Whether the grid is still a single component.
    pub connected: bool,
}
