//! One hour's network problem: minimum load shedding on a DC network, the
//! loss-sharing allocation among tied optima, and the split of shed load into
//! generation-caused and transmission-caused parts.

mod case;
mod solve;

use thiserror::Error;

pub use case::{build_case, parse_case_csv, write_case_solution_csv, CaseBuilder, CaseFile, ComponentSnapshot};
pub use solve::{check_certificate, classify_causes, solve_min_shed, solve_min_shed_unscreened, SolveOptions};

use crate::lp::LpError;

/// Default bound on the angle difference across a line, in radians.
pub const DEFAULT_ANGLE_BOUND: f64 = std::f64::consts::FRAC_PI_2;
/// Default MVA base converting per-unit susceptance to MW per radian.
pub const DEFAULT_BASE_MVA: f64 = 100.0;

#[derive(Clone, Debug, PartialEq)]
pub struct AreaCase {
    pub gen_max_mw: f64,
    pub gen_min_mw: f64,
    /// Demand after firm-contract and ownership adjustment.
    pub demand_mw: f64,
    pub sum_flows_limit_mw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineCase {
    pub from: usize,
    pub to: usize,
    /// Per-unit susceptance; zero means the line is open.
    pub susceptance: f64,
    pub cap_fwd_mw: f64,
    pub cap_rev_mw: f64,
    pub angle_min: f64,
    pub angle_max: f64,
}

/// Inputs of one hour's shedding problem.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkCase {
    pub areas: Vec<AreaCase>,
    pub lines: Vec<LineCase>,
    pub base_mva: f64,
}

impl NetworkCase {
    /// Areas with no lines, all bounds open.
    pub fn isolated(gen_max: &[f64], demand: &[f64]) -> Self {
        NetworkCase {
            areas: gen_max
                .iter()
                .zip(demand)
                .map(|(&g, &d)| AreaCase { gen_max_mw: g, gen_min_mw: 0.0, demand_mw: d, sum_flows_limit_mw: f64::INFINITY })
                .collect(),
            lines: Vec::new(),
            base_mva: DEFAULT_BASE_MVA,
        }
    }

    /// Add a line with default angle bounds.
    pub fn with_line(mut self, from: usize, to: usize, susceptance: f64, cap_fwd: f64, cap_rev: f64) -> Self {
        self.lines.push(LineCase {
            from,
            to,
            susceptance,
            cap_fwd_mw: cap_fwd,
            cap_rev_mw: cap_rev,
            angle_min: -DEFAULT_ANGLE_BOUND,
            angle_max: DEFAULT_ANGLE_BOUND,
        });
        self
    }

    /// Multiply every MW quantity by `k`; susceptances are scaled too so that
    /// angles stay put.
    pub fn scaled(&self, k: f64) -> Self {
        let mut c = self.clone();
        for a in &mut c.areas {
            a.gen_max_mw *= k;
            a.gen_min_mw *= k;
            a.demand_mw *= k;
            a.sum_flows_limit_mw *= k;
        }
        for l in &mut c.lines {
            l.cap_fwd_mw *= k;
            l.cap_rev_mw *= k;
            l.susceptance *= k;
        }
        c
    }

    /// Whether every area can cover its own demand, in which case nothing
    /// needs to be shed.
    pub fn all_self_sufficient(&self) -> bool {
        self.areas.iter().all(|a| a.gen_max_mw >= a.demand_mw && a.gen_min_mw <= a.demand_mw)
    }

    pub fn total_demand(&self) -> f64 {
        self.areas.iter().map(|a| a.demand_mw).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

/// Optimal shedding for one case.
#[derive(Clone, Debug, PartialEq)]
pub struct ShedSolution {
    pub shed_mw: Vec<f64>,
    pub gen_mw: Vec<f64>,
    /// Flow on each line in the from→to direction.
    pub flows_mw: Vec<f64>,
    pub angles: Vec<f64>,
    pub total_shed_mw: f64,
    pub status: SolveStatus,
}

impl ShedSolution {
    /// Trivial solution of a case where every area serves itself.
    pub fn no_shed(case: &NetworkCase) -> Self {
        let n = case.areas.len();
        ShedSolution {
            shed_mw: vec![0.0; n],
            gen_mw: case.areas.iter().map(|a| a.demand_mw).collect(),
            flows_mw: vec![0.0; case.lines.len()],
            angles: vec![0.0; n],
            total_shed_mw: 0.0,
            status: SolveStatus::Optimal,
        }
    }
}

/// Per-area split of shed load by cause.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CauseSplit {
    pub gc_mw: Vec<f64>,
    pub tc_mw: Vec<f64>,
    pub gt_mw: Vec<f64>,
}

impl CauseSplit {
    pub fn zero(n: usize) -> Self {
        CauseSplit { gc_mw: vec![0.0; n], tc_mw: vec![0.0; n], gt_mw: vec![0.0; n] }
    }

    pub fn pool(&self) -> (f64, f64, f64) {
        (self.gc_mw.iter().sum(), self.tc_mw.iter().sum(), self.gt_mw.iter().sum())
    }

    pub fn any_shed(&self) -> bool {
        self.gt_mw.iter().any(|&x| x > 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DispatchError {
    #[error("shedding problem is infeasible")]
    Infeasible,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("case file: {0}")]
    CaseFile(String),
}

impl From<LpError> for DispatchError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::Infeasible(_) => DispatchError::Infeasible,
            other => DispatchError::NumericalFailure(other.to_string()),
        }
    }
}
