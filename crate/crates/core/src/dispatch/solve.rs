use super::{CauseSplit, DispatchError, NetworkCase, ShedSolution, SolveStatus};
use crate::card_io::LossSharing;
use crate::lp::{LinearProgram, Relation, VarId};

/// Spacing of the grid every reported shed amount is rounded onto. Sums and
/// differences of grid values below 2^29 MW are exact in `f64`.
const SHED_GRID: f64 = 1.0 / (1u64 << 24) as f64;
/// Shed amounts below this are reported as zero.
const SHED_FLOOR: f64 = 1e-7;
/// Weight on shedding in self-sufficient areas under non-loss-sharing.
const PROTECTED_WEIGHT: f64 = 1e6;

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Run the constraint certificate after every solve and fail on a
    /// violation above 1e-6 MW.
    pub certify: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { certify: cfg!(debug_assertions) }
    }
}

struct Vars {
    g: Vec<VarId>,
    s: Vec<VarId>,
    /// Angle times base MVA; `None` for the reference area.
    u: Vec<Option<VarId>>,
}

fn term(u: Option<VarId>, coeff: f64, out: &mut Vec<(VarId, f64)>) {
    if let Some(v) = u {
        out.push((v, coeff));
    }
}

fn build_lp(case: &NetworkCase, copper: bool, shed_cap: Option<&[f64]>) -> (LinearProgram, Vars) {
    let n = case.areas.len();
    let mut lp = LinearProgram::new();
    let g: Vec<_> = case.areas.iter().map(|a| lp.add_var(a.gen_min_mw, a.gen_max_mw, 0.0)).collect();
    let s: Vec<_> = case
        .areas
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let cap = shed_cap.map_or(a.demand_mw, |c| c[i].min(a.demand_mw));
            lp.add_var(0.0, cap.max(0.0), 1.0)
        })
        .collect();
    let mut u: Vec<Option<VarId>> = vec![None; n];
    if !copper {
        for slot in u.iter_mut().skip(1) {
            *slot = Some(lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 0.0));
        }
    }
    let vars = Vars { g, s, u };

    if copper {
        let row: Vec<_> = (0..n).flat_map(|i| [(vars.g[i], 1.0), (vars.s[i], 1.0)]).collect();
        lp.add_row(&row, Relation::Eq, case.total_demand());
    } else {
        let mut export: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n];
        for l in &case.lines {
            let b = l.susceptance.abs();
            if b == 0.0 || l.from == l.to {
                continue;
            }
            let lo = (-l.cap_rev_mw / b).max(case.base_mva * l.angle_min);
            let hi = (l.cap_fwd_mw / b).min(case.base_mva * l.angle_max);
            let mut diff = Vec::new();
            term(vars.u[l.from], 1.0, &mut diff);
            term(vars.u[l.to], -1.0, &mut diff);
            lp.add_row(&diff, Relation::Le, hi);
            lp.add_row(&diff, Relation::Ge, lo);
            // export of `from` is b·(u_from − u_to); of `to` the negative
            term(vars.u[l.from], -b, &mut export[l.from]);
            term(vars.u[l.to], b, &mut export[l.from]);
            term(vars.u[l.to], -b, &mut export[l.to]);
            term(vars.u[l.from], b, &mut export[l.to]);
        }
        for (i, a) in case.areas.iter().enumerate() {
            let mut row = vec![(vars.g[i], 1.0), (vars.s[i], 1.0)];
            row.extend(export[i].iter().copied());
            lp.add_row(&row, Relation::Eq, a.demand_mw);
        }
    }
    for (i, a) in case.areas.iter().enumerate() {
        if a.sum_flows_limit_mw.is_finite() {
            let row = [(vars.g[i], 1.0), (vars.s[i], 1.0)];
            lp.add_row(&row, Relation::Le, a.demand_mw + a.sum_flows_limit_mw);
            lp.add_row(&row, Relation::Ge, a.demand_mw - a.sum_flows_limit_mw);
        }
    }
    (lp, vars)
}

fn tie_tolerance(objective: f64) -> f64 {
    1e-9 + 1e-12 * objective.abs()
}

/// Constrain `Σ coeff·s` to its optimum from the previous stage.
fn hold(lp: &mut LinearProgram, vars: &Vars, weights: &[f64], optimum: f64) {
    let row: Vec<_> = vars.s.iter().zip(weights).map(|(&v, &w)| (v, w)).collect();
    lp.add_row(&row, Relation::Le, optimum + tie_tolerance(optimum));
}

/// Minimize the largest shed fraction over areas with demand.
fn min_max_ratio(lp: &mut LinearProgram, vars: &Vars, case: &NetworkCase) {
    lp.clear_costs();
    let t = lp.add_var(0.0, f64::INFINITY, 1.0);
    for (i, a) in case.areas.iter().enumerate() {
        if a.demand_mw > 0.0 {
            lp.add_row(&[(vars.s[i], 1.0), (t, -a.demand_mw)], Relation::Le, 0.0);
        }
    }
}

fn snap(x: f64, upper: f64) -> f64 {
    let cap = (upper / SHED_GRID).floor() * SHED_GRID;
    let v = ((x / SHED_GRID).round() * SHED_GRID).min(cap);
    if v < SHED_FLOOR {
        0.0
    } else {
        v
    }
}

fn staged_solve(
    case: &NetworkCase,
    mode: LossSharing,
    copper: bool,
    shed_cap: Option<&[f64]>,
) -> Result<Option<ShedSolution>, DispatchError> {
    let n = case.areas.len();
    let (mut lp, vars) = build_lp(case, copper, shed_cap);
    let stage1 = match lp.solve() {
        Ok(sol) => sol,
        Err(crate::lp::LpError::Infeasible(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut best = stage1.clone();
    if stage1.objective > SHED_FLOOR {
        hold(&mut lp, &vars, &vec![1.0; n], stage1.objective);
        if mode == LossSharing::NonLossSharing {
            lp.clear_costs();
            let weights: Vec<f64> = case
                .areas
                .iter()
                .map(|a| if a.gen_max_mw < a.demand_mw { 1.0 } else { PROTECTED_WEIGHT })
                .collect();
            for (&v, &w) in vars.s.iter().zip(&weights) {
                lp.set_cost(v, w);
            }
            let stage2 = lp.solve()?;
            hold(&mut lp, &vars, &weights, stage2.objective);
            best = stage2;
        }
        min_max_ratio(&mut lp, &vars, case);
        // a failure here only loses the tie-break, never the optimum
        if let Ok(sol) = lp.solve() {
            best = sol;
        }
    }
    let shed_mw: Vec<f64> = (0..n)
        .map(|i| {
            let cap = shed_cap.map_or(case.areas[i].demand_mw, |c| c[i].min(case.areas[i].demand_mw));
            snap(best.value(vars.s[i]), cap.max(0.0))
        })
        .collect();
    let u: Vec<f64> = vars.u.iter().map(|v| v.map_or(0.0, |v| best.value(v))).collect();
    let flows_mw = case
        .lines
        .iter()
        .map(|l| if copper || l.from == l.to { 0.0 } else { l.susceptance.abs() * (u[l.from] - u[l.to]) })
        .collect();
    Ok(Some(ShedSolution {
        total_shed_mw: shed_mw.iter().sum(),
        gen_mw: vars.g.iter().map(|&v| best.value(v)).collect(),
        angles: u.iter().map(|x| x / case.base_mva).collect(),
        flows_mw,
        shed_mw,
        status: SolveStatus::Optimal,
    }))
}

/// Largest violation, in MW (radians for angle bounds), of any constraint of
/// the shedding problem at a returned point.
pub fn check_certificate(case: &NetworkCase, sol: &ShedSolution) -> f64 {
    let mut worst: f64 = 0.0;
    let mut export = vec![0.0; case.areas.len()];
    for (l, &f) in case.lines.iter().zip(&sol.flows_mw) {
        let b = l.susceptance.abs();
        let dtheta = sol.angles[l.from] - sol.angles[l.to];
        worst = worst.max((f - b * case.base_mva * dtheta).abs());
        worst = worst.max(f - l.cap_fwd_mw).max(-l.cap_rev_mw - f);
        if b > 0.0 {
            worst = worst.max(dtheta - l.angle_max).max(l.angle_min - dtheta);
        }
        export[l.from] += f;
        export[l.to] -= f;
    }
    worst = worst.max(sol.angles.first().map_or(0.0, |t| t.abs()));
    for (i, a) in case.areas.iter().enumerate() {
        let (g, s) = (sol.gen_mw[i], sol.shed_mw[i]);
        worst = worst.max(a.gen_min_mw - g).max(g - a.gen_max_mw);
        worst = worst.max(-s).max(s - a.demand_mw);
        worst = worst.max((g - a.demand_mw + s - export[i]).abs());
        worst = worst.max(export[i].abs() - a.sum_flows_limit_mw);
    }
    worst = worst.max((sol.total_shed_mw - sol.shed_mw.iter().sum::<f64>()).abs());
    worst
}

fn certify(case: &NetworkCase, sol: &ShedSolution, opts: SolveOptions) -> Result<(), DispatchError> {
    if opts.certify {
        let v = check_certificate(case, sol);
        if v > 1e-6 {
            return Err(DispatchError::NumericalFailure(format!("constraint violation {v:e} MW")));
        }
    }
    Ok(())
}

/// Minimum total shedding on the DC network, with ties among optima broken
/// per `mode`. An infeasible case (only possible with positive minimum
/// generation) comes back with status `Infeasible` and all-zero vectors.
pub fn solve_min_shed(case: &NetworkCase, mode: LossSharing, opts: SolveOptions) -> Result<ShedSolution, DispatchError> {
    if case.all_self_sufficient() {
        return Ok(ShedSolution::no_shed(case));
    }
    solve_min_shed_unscreened(case, mode, opts)
}

/// [`solve_min_shed`] without the shortcut for cases where every area can
/// serve itself: the linear program is always solved.
pub fn solve_min_shed_unscreened(case: &NetworkCase, mode: LossSharing, opts: SolveOptions) -> Result<ShedSolution, DispatchError> {
    match staged_solve(case, mode, false, None)? {
        Some(sol) => {
            certify(case, &sol, opts)?;
            Ok(sol)
        }
        None => {
            let mut sol = ShedSolution::no_shed(case);
            sol.gen_mw.iter_mut().for_each(|g| *g = 0.0);
            sol.status = SolveStatus::Infeasible;
            Ok(sol)
        }
    }
}

/// Split the actual shedding into the part even an unconstrained pool would
/// shed (generation-caused) and the rest (transmission-caused).
///
/// The copper-plate problem drops all lines and angle bounds and keeps one
/// pool balance and the per-area sum-of-flows limits. Its shed in each area
/// is capped at the actual shed there, so the transmission part is never
/// negative.
pub fn classify_causes(case: &NetworkCase, actual: &ShedSolution, mode: LossSharing) -> Result<CauseSplit, DispatchError> {
    if actual.status != SolveStatus::Optimal {
        return Err(DispatchError::Infeasible);
    }
    let n = case.areas.len();
    if actual.total_shed_mw == 0.0 {
        return Ok(CauseSplit::zero(n));
    }
    let copper = staged_solve(case, mode, true, Some(&actual.shed_mw))?.ok_or(DispatchError::Infeasible)?;
    let gt_mw = actual.shed_mw.clone();
    let gc_mw: Vec<f64> = copper.shed_mw.iter().zip(&gt_mw).map(|(&c, &g)| c.min(g)).collect();
    let tc_mw = gt_mw.iter().zip(&gc_mw).map(|(g, c)| g - c).collect();
    Ok(CauseSplit { gc_mw, tc_mw, gt_mw })
}
