use std::fmt::Write as _;

use super::{AreaCase, CauseSplit, DispatchError, LineCase, NetworkCase, ShedSolution, DEFAULT_ANGLE_BOUND, DEFAULT_BASE_MVA};
use crate::card_io::{FirmContract, LineState, LossSharing, SystemModel};

/// Current state of every component, as seen by the network problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSnapshot {
    /// MW each unit can produce right now (0 when out or on maintenance).
    pub unit_available_mw: Vec<f64>,
    /// 0-based state index of every line.
    pub line_state: Vec<usize>,
}

/// Assemble one hour's case.
///
/// Generation is summed by unit location. Firm contracts active on the
/// 1-based `day` and ownership shares of the available capacity are applied
/// as transfers: they raise the exporter's demand and lower the importer's.
/// A demand pushed below zero is clamped to zero and the excess becomes extra
/// available generation in that area.
pub fn build_case(model: &SystemModel, snapshot: &ComponentSnapshot, hour_demand: &[f64], day: u32) -> NetworkCase {
    CaseBuilder::new(model).build(snapshot, hour_demand, day)
}

/// [`build_case`] with all name lookups resolved once.
#[derive(Clone, Debug)]
pub struct CaseBuilder {
    n_areas: usize,
    unit_area: Vec<usize>,
    /// (from area, to area, contract)
    contracts: Vec<(usize, usize, FirmContract)>,
    /// (unit, location, [(owner, fraction)])
    ownerships: Vec<(usize, usize, Vec<(usize, f64)>)>,
    sum_flows: Vec<f64>,
    line_ends: Vec<(usize, usize)>,
    line_states: Vec<Vec<LineState>>,
}

impl CaseBuilder {
    pub fn new(model: &SystemModel) -> Self {
        let n = model.areas.len();
        let idx = |name: &str| model.area_index(name).unwrap_or(0);
        let unit_area: Vec<usize> = model.units.iter().map(|u| idx(&u.location)).collect();
        let contracts = model
            .contracts
            .iter()
            .filter_map(|c| Some((model.area_index(&c.from_area)?, model.area_index(&c.to_area)?, c.clone())))
            .collect();
        let ownerships = model
            .ownerships
            .iter()
            .filter_map(|o| {
                let u = model.unit_index(&o.unit_name)?;
                let loc = unit_area[u];
                let shares = o
                    .shares_pct
                    .iter()
                    .enumerate()
                    .take(n)
                    .filter(|&(owner, &pct)| owner != loc && pct > 0.0)
                    .map(|(owner, &pct)| (owner, pct / 100.0))
                    .collect();
                Some((u, loc, shares))
            })
            .collect();
        CaseBuilder {
            n_areas: n,
            unit_area,
            contracts,
            ownerships,
            sum_flows: model.areas.iter().map(|a| a.sum_flows_limit).collect(),
            line_ends: model.lines.iter().map(|l| (idx(&l.from_area), idx(&l.to_area))).collect(),
            line_states: model.lines.iter().map(|l| l.states.clone()).collect(),
        }
    }

    /// Adjusted available generation and demand of every area.
    pub fn balances(&self, unit_available_mw: &[f64], hour_demand: &[f64], day: u32, gen: &mut [f64], demand: &mut [f64]) {
        gen.iter_mut().for_each(|g| *g = 0.0);
        for (&a, &mw) in self.unit_area.iter().zip(unit_available_mw) {
            gen[a] += mw;
        }
        demand.copy_from_slice(hour_demand);
        for (f, t, c) in &self.contracts {
            if c.active_on(day) {
                demand[*f] += c.mw;
                demand[*t] -= c.mw;
            }
        }
        for (u, loc, shares) in &self.ownerships {
            let avail = unit_available_mw[*u];
            for &(owner, frac) in shares {
                let mw = avail * frac;
                demand[*loc] += mw;
                demand[owner] -= mw;
            }
        }
        for (g, d) in gen.iter_mut().zip(demand.iter_mut()) {
            if *d < 0.0 {
                *g -= *d;
                *d = 0.0;
            }
        }
    }

    pub fn build(&self, snapshot: &ComponentSnapshot, hour_demand: &[f64], day: u32) -> NetworkCase {
        let mut gen = vec![0.0; self.n_areas];
        let mut demand = vec![0.0; self.n_areas];
        self.balances(&snapshot.unit_available_mw, hour_demand, day, &mut gen, &mut demand);
        let areas = (0..self.n_areas)
            .map(|i| AreaCase { gen_max_mw: gen[i], gen_min_mw: 0.0, demand_mw: demand[i], sum_flows_limit_mw: self.sum_flows[i] })
            .collect();
        let lines = self
            .line_ends
            .iter()
            .zip(&self.line_states)
            .zip(&snapshot.line_state)
            .map(|((&(from, to), states), &s)| {
                let st = states[s];
                let open = st.cap_fwd_mw <= 0.0 && st.cap_rev_mw <= 0.0;
                LineCase {
                    from,
                    to,
                    susceptance: if open { 0.0 } else { st.admittance.abs() },
                    cap_fwd_mw: st.cap_fwd_mw,
                    cap_rev_mw: st.cap_rev_mw,
                    angle_min: -DEFAULT_ANGLE_BOUND,
                    angle_max: DEFAULT_ANGLE_BOUND,
                }
            })
            .collect();
        NetworkCase { areas, lines, base_mva: DEFAULT_BASE_MVA }
    }
}

/// A standalone case file: the case, the shedding mode and the area names.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseFile {
    pub names: Vec<String>,
    pub case: NetworkCase,
    pub mode: LossSharing,
}

fn num(field: Option<&str>, line: usize, what: &str) -> Result<f64, DispatchError> {
    let text = field.ok_or_else(|| DispatchError::CaseFile(format!("line {line}: missing {what}")))?;
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| !v.is_nan())
        .ok_or_else(|| DispatchError::CaseFile(format!("line {line}: bad {what} '{}'", text.trim())))
}

/// Parse a case file. Rows:
///
/// ```text
/// AREA,name,gen_max,gen_min,demand,sum_flows
/// LINE,from,to,B_pu,cap_fwd,cap_rev[,angle_min,angle_max]
/// MODE,0|1
/// BASE,mva
/// ```
///
/// Line endpoints are area names. `#` starts a comment line.
pub fn parse_case_csv(text: &str) -> Result<CaseFile, DispatchError> {
    let mut names = Vec::new();
    let mut areas = Vec::new();
    let mut pending_lines = Vec::new();
    let mut mode = LossSharing::LossSharing;
    let mut base = DEFAULT_BASE_MVA;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut f = raw.split(',').map(str::trim);
        match f.next().unwrap_or("").to_ascii_uppercase().as_str() {
            "AREA" => {
                let name = f.next().filter(|s| !s.is_empty());
                names.push(name.ok_or_else(|| DispatchError::CaseFile(format!("line {line}: missing name")))?.to_string());
                let gen_max_mw = num(f.next(), line, "gen_max")?;
                let gen_min_mw = num(f.next(), line, "gen_min")?;
                let demand_mw = num(f.next(), line, "demand")?;
                let sum_flows_limit_mw = num(f.next(), line, "sum_flows")?;
                if gen_max_mw < gen_min_mw || demand_mw < 0.0 || sum_flows_limit_mw < 0.0 {
                    return Err(DispatchError::CaseFile(format!("line {line}: inconsistent area bounds")));
                }
                areas.push(AreaCase { gen_max_mw, gen_min_mw, demand_mw, sum_flows_limit_mw });
            }
            "LINE" => {
                let from = f.next().unwrap_or("").to_string();
                let to = f.next().unwrap_or("").to_string();
                let b = num(f.next(), line, "B_pu")?;
                let cf = num(f.next(), line, "cap_fwd")?;
                let cr = num(f.next(), line, "cap_rev")?;
                let (amin, amax) = match (f.next(), f.next()) {
                    (Some(a), Some(b)) => (num(Some(a), line, "angle_min")?, num(Some(b), line, "angle_max")?),
                    _ => (-DEFAULT_ANGLE_BOUND, DEFAULT_ANGLE_BOUND),
                };
                if cf < 0.0 || cr < 0.0 || amin > amax {
                    return Err(DispatchError::CaseFile(format!("line {line}: inconsistent line bounds")));
                }
                pending_lines.push((line, from, to, b, cf, cr, amin, amax));
            }
            "MODE" => {
                let code = num(f.next(), line, "mode")?;
                mode = LossSharing::from_code(code as u32)
                    .filter(|_| code.fract() == 0.0 && code >= 0.0)
                    .ok_or_else(|| DispatchError::CaseFile(format!("line {line}: mode must be 0 or 1")))?;
            }
            "BASE" => base = num(f.next(), line, "base")?,
            other => return Err(DispatchError::CaseFile(format!("line {line}: unknown row kind '{other}'"))),
        }
    }
    if areas.is_empty() {
        return Err(DispatchError::CaseFile("no AREA rows".into()));
    }
    let find = |name: &str, line: usize| {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DispatchError::CaseFile(format!("line {line}: unknown area '{name}'")))
    };
    let mut lines = Vec::new();
    for (line, from, to, b, cf, cr, amin, amax) in pending_lines {
        lines.push(LineCase {
            from: find(&from, line)?,
            to: find(&to, line)?,
            susceptance: b,
            cap_fwd_mw: cf,
            cap_rev_mw: cr,
            angle_min: amin,
            angle_max: amax,
        });
    }
    Ok(CaseFile { names, case: NetworkCase { areas, lines, base_mva: base }, mode })
}

/// Render a solution and its cause split as csv.
pub fn write_case_solution_csv(file: &CaseFile, sol: &ShedSolution, split: &CauseSplit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "STATUS,{:?}", sol.status);
    let _ = writeln!(out, "TOTAL_SHED,{:.6}", sol.total_shed_mw);
    let _ = writeln!(out, "# AREA,name,gen_mw,shed_mw,angle_rad,gc_mw,tc_mw,gt_mw");
    for (i, name) in file.names.iter().enumerate() {
        let _ = writeln!(
            out,
            "AREA,{name},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            sol.gen_mw[i], sol.shed_mw[i], sol.angles[i], split.gc_mw[i], split.tc_mw[i], split.gt_mw[i]
        );
    }
    let _ = writeln!(out, "# LINE,from,to,flow_mw");
    for (l, f) in file.case.lines.iter().zip(&sol.flows_mw) {
        let _ = writeln!(out, "LINE,{},{},{:.6}", file.names[l.from], file.names[l.to], f);
    }
    out
}
