//! Time-indexed dispatch program for the production site.
//!
//! Waste-to-energy heat goes straight to the network; gas-turbine and wood
//! boiler steam passes through the shared steam turbine, which yields heat and
//! electricity. Seasonal storage, heat curtailment and grid exchange close the
//! balances.

use std::fmt;

use heatdispatch_lp::{LinearProgram, LpSolution, Row, Sense, SolveStatus, Var};

use crate::demand::DemandProfile;
use crate::error::{Error, Result};
use crate::model::{
    convert, emission_rate, fuel_cost_rate, storage_step, Carrier, CarrierFlow, MinLoadMode,
    SteamTurbineSpec, StorageSpec, TechnologySpec, ThermalCarrier,
};

pub const HOURS_PER_YEAR: f64 = 8760.0;
/// Name of the row added by [`attach_epsilon`].
pub const EPSILON_ROW: &str = "emissions_cap";

/// Absolute slack on bounds when checking solutions.
const BOUND_TOL: f64 = 1e-7;
/// Relative tolerance on balances and caps when checking solutions.
const BALANCE_TOL: f64 = 1e-6;
/// Tolerance of the recomputed objectives against the LP expressions.
const OBJECTIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    Wte,
    GasTurbine,
    WoodBoiler,
}

impl Unit {
    pub const ALL: [Unit; 3] = [Unit::Wte, Unit::GasTurbine, Unit::WoodBoiler];

    fn index(self) -> usize {
        self as usize
    }

    /// Short tag used in variable names.
    pub fn tag(self) -> &'static str {
        match self {
            Unit::Wte => "wte",
            Unit::GasTurbine => "gt",
            Unit::WoodBoiler => "wb",
        }
    }

    /// Name of the plant the unit's delivered heat is reported under.
    pub fn plant(self) -> &'static str {
        match self {
            Unit::Wte => "wte_chp",
            Unit::GasTurbine => "ccgt",
            Unit::WoodBoiler => "wood_chp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// CHF/MWh.
    pub import_price: f64,
    /// CHF/MWh.
    pub export_price: f64,
    /// t/MWh.
    pub import_intensity: f64,
    /// MW; `None` is unlimited.
    pub import_cap: Option<f64>,
    pub export_cap: Option<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            import_price: 200.0,
            export_price: 80.0,
            import_intensity: 0.128,
            import_cap: None,
            export_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchProblem {
    /// Hours per timestep.
    pub step: f64,
    pub wte: TechnologySpec,
    pub gas_turbine: TechnologySpec,
    pub wood_boiler: TechnologySpec,
    pub steam_turbine: SteamTurbineSpec,
    pub storage: Option<StorageSpec>,
    pub storage_required: bool,
    pub heat_demand: DemandProfile,
    pub electricity_demand: DemandProfile,
    pub grid: Grid,
    /// Whether each unit's annual fuel cap is enforced, indexed like [`Unit::ALL`].
    pub fuel_caps_active: [bool; 3],
    pub allow_steam_dump: bool,
}

impl DispatchProblem {
    pub fn horizon(&self) -> usize {
        self.heat_demand.len()
    }

    pub fn horizon_hours(&self) -> f64 {
        self.horizon() as f64 * self.step
    }

    pub fn tech(&self, unit: Unit) -> &TechnologySpec {
        match unit {
            Unit::Wte => &self.wte,
            Unit::GasTurbine => &self.gas_turbine,
            Unit::WoodBoiler => &self.wood_boiler,
        }
    }

    pub fn tech_mut(&mut self, unit: Unit) -> &mut TechnologySpec {
        match unit {
            Unit::Wte => &mut self.wte,
            Unit::GasTurbine => &mut self.gas_turbine,
            Unit::WoodBoiler => &mut self.wood_boiler,
        }
    }

    /// Fuel energy available over the horizon in MWh, if capped.
    ///
    /// Annual caps are pro-rated for horizons shorter than a year.
    pub fn fuel_cap(&self, unit: Unit) -> Option<f64> {
        if !self.fuel_caps_active[unit.index()] {
            return None;
        }
        let fraction = (self.horizon_hours() / HOURS_PER_YEAR).min(1.0);
        self.tech(unit).fuel.annual_energy_cap().map(|cap| cap * fraction)
    }

    fn check(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("timestep of {} h is not positive", self.step)));
        }
        if self.horizon() == 0 {
            return Err(Error::Data("demand profiles are empty".into()));
        }
        if self.electricity_demand.len() != self.horizon() {
            return Err(Error::Data(format!(
                "heat demand has {} steps but electricity demand has {}",
                self.horizon(),
                self.electricity_demand.len()
            )));
        }
        for profile in [&self.heat_demand, &self.electricity_demand] {
            if let Some(t) = profile.values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Data(format!(
                    "{} demand at timestep {t} is {}",
                    profile.carrier, profile.values[t]
                )));
            }
        }
        if self.storage_required && self.storage.is_none() {
            return Err(Error::Config("the scenario requires storage but none is configured".into()));
        }
        let mut violations: Vec<String> = Unit::ALL.iter().flat_map(|&u| self.tech(u).violations()).collect();
        violations.extend(self.steam_turbine.violations());
        if let Some(s) = &self.storage {
            violations.extend(s.violations());
        }
        if !violations.is_empty() {
            return Err(Error::Config(violations.join("; ")));
        }
        Ok(())
    }
}

/// Role of a dispatch variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Fuel(Unit),
    SteamDump,
    HeatCurtail,
    GridImport,
    GridExport,
    Charge,
    Discharge,
    /// State of charge at the start of the step; index `H` is the end state.
    Soc,
    Commitment(Unit),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableMap {
    horizon: usize,
    fuel: [Vec<Var>; 3],
    steam_dump: Vec<Var>,
    heat_curtail: Vec<Var>,
    grid_import: Vec<Var>,
    grid_export: Vec<Var>,
    charge: Vec<Var>,
    discharge: Vec<Var>,
    soc: Vec<Var>,
    commitment: [Vec<Var>; 3],
    roles: Vec<(Role, usize)>,
}

impl VariableMap {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn fuel(&self, unit: Unit, t: usize) -> Var {
        self.fuel[unit.index()][t]
    }

    pub fn steam_dump(&self, t: usize) -> Var {
        self.steam_dump[t]
    }

    pub fn heat_curtail(&self, t: usize) -> Var {
        self.heat_curtail[t]
    }

    pub fn grid_import(&self, t: usize) -> Var {
        self.grid_import[t]
    }

    pub fn grid_export(&self, t: usize) -> Var {
        self.grid_export[t]
    }

    pub fn has_storage(&self) -> bool {
        !self.soc.is_empty()
    }

    pub fn charge(&self, t: usize) -> Option<Var> {
        self.charge.get(t).copied()
    }

    pub fn discharge(&self, t: usize) -> Option<Var> {
        self.discharge.get(t).copied()
    }

    /// `t` ranges over `0..=H`.
    pub fn soc(&self, t: usize) -> Option<Var> {
        self.soc.get(t).copied()
    }

    pub fn commitment(&self, unit: Unit, t: usize) -> Option<Var> {
        self.commitment[unit.index()].get(t).copied()
    }

    /// Role and timestep of an LP variable.
    pub fn role_of(&self, var: Var) -> Option<(Role, usize)> {
        self.roles.get(var.index()).copied()
    }

    pub fn lookup(&self, role: Role, t: usize) -> Option<Var> {
        match role {
            Role::Fuel(u) => self.fuel[u.index()].get(t).copied(),
            Role::SteamDump => self.steam_dump.get(t).copied(),
            Role::HeatCurtail => self.heat_curtail.get(t).copied(),
            Role::GridImport => self.grid_import.get(t).copied(),
            Role::GridExport => self.grid_export.get(t).copied(),
            Role::Charge => self.charge(t),
            Role::Discharge => self.discharge(t),
            Role::Soc => self.soc(t),
            Role::Commitment(u) => self.commitment(u, t),
        }
    }

    pub fn num_variables(&self) -> usize {
        self.roles.len()
    }
}

/// Cost (CHF) and emissions (t CO₂-eq) as linear expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveExpressions {
    pub cost: Vec<(Var, f64)>,
    pub emissions: Vec<(Var, f64)>,
}

impl ObjectiveExpressions {
    pub fn cost_of(&self, values: &[f64]) -> f64 {
        evaluate(&self.cost, values)
    }

    pub fn emissions_of(&self, values: &[f64]) -> f64 {
        evaluate(&self.emissions, values)
    }
}

fn evaluate(expr: &[(Var, f64)], values: &[f64]) -> f64 {
    expr.iter().map(|&(v, c)| c * values[v.index()]).sum()
}

fn magnitude(expr: &[(Var, f64)], values: &[f64]) -> f64 {
    expr.iter().map(|&(v, c)| (c * values[v.index()]).abs()).sum()
}

struct Builder {
    lp: LinearProgram,
    roles: Vec<(Role, usize)>,
}

impl Builder {
    fn var(&mut self, role: Role, t: usize, lower: f64, upper: f64) -> Result<Var> {
        let name = match role {
            Role::Fuel(u) => format!("fuel_{}({t})", u.tag()),
            Role::SteamDump => format!("steam_dump({t})"),
            Role::HeatCurtail => format!("heat_curtail({t})"),
            Role::GridImport => format!("grid_import({t})"),
            Role::GridExport => format!("grid_export({t})"),
            Role::Charge => format!("charge({t})"),
            Role::Discharge => format!("discharge({t})"),
            Role::Soc => format!("soc({t})"),
            Role::Commitment(u) => format!("on_{}({t})", u.tag()),
        };
        let v = self.lp.add_variable(name, lower, upper)?;
        self.roles.push((role, t));
        Ok(v)
    }
}

/// Largest steam flow into the turbine implied by the unit bounds.
fn max_steam(problem: &DispatchProblem) -> f64 {
    Unit::ALL
        .iter()
        .map(|&u| problem.tech(u))
        .filter(|t| t.thermal_output_carrier == ThermalCarrier::Steam)
        .map(|t| t.max_fuel_power().map_or(f64::INFINITY, |f| f * t.eta_th))
        .sum()
}

/// Builds the dispatch program. Its objective is the cost expression.
pub fn build_dispatch(
    problem: &DispatchProblem,
) -> Result<(LinearProgram, VariableMap, ObjectiveExpressions)> {
    problem.check()?;
    let h = problem.horizon();
    let dt = problem.step;
    let mut b = Builder {
        lp: LinearProgram::new(),
        roles: Vec::new(),
    };
    let mut map = VariableMap {
        horizon: h,
        fuel: Default::default(),
        steam_dump: Vec::with_capacity(h),
        heat_curtail: Vec::with_capacity(h),
        grid_import: Vec::with_capacity(h),
        grid_export: Vec::with_capacity(h),
        charge: Vec::new(),
        discharge: Vec::new(),
        soc: Vec::new(),
        commitment: Default::default(),
        roles: Vec::new(),
    };

    for t in 0..h {
        for u in Unit::ALL {
            let tech = problem.tech(u);
            let max = tech.max_fuel_power().unwrap_or(f64::INFINITY);
            let min = match tech.min_load_mode {
                MinLoadMode::AlwaysOn => tech.min_fuel_power(),
                _ => 0.0,
            };
            map.fuel[u.index()].push(b.var(Role::Fuel(u), t, min, max)?);
        }
        let dump_ub = if problem.allow_steam_dump { f64::INFINITY } else { 0.0 };
        map.steam_dump.push(b.var(Role::SteamDump, t, 0.0, dump_ub)?);
        map.heat_curtail.push(b.var(Role::HeatCurtail, t, 0.0, f64::INFINITY)?);
        let g = &problem.grid;
        map.grid_import.push(b.var(Role::GridImport, t, 0.0, g.import_cap.unwrap_or(f64::INFINITY))?);
        map.grid_export.push(b.var(Role::GridExport, t, 0.0, g.export_cap.unwrap_or(f64::INFINITY))?);
        if let Some(s) = &problem.storage {
            map.charge.push(b.var(Role::Charge, t, 0.0, s.charge_power_cap)?);
            map.discharge.push(b.var(Role::Discharge, t, 0.0, s.discharge_power_cap)?);
            map.soc.push(b.var(Role::Soc, t, 0.0, s.energy_capacity)?);
        }
        for u in Unit::ALL {
            if problem.tech(u).min_load_mode == MinLoadMode::UnitCommitment {
                let v = b.var(Role::Commitment(u), t, 0.0, 1.0)?;
                b.lp.mark_binary(v)?;
                map.commitment[u.index()].push(v);
            }
        }
    }
    if let Some(s) = &problem.storage {
        map.soc.push(b.var(Role::Soc, h, 0.0, s.energy_capacity)?);
        if !s.cyclic {
            b.lp.set_bounds(map.soc[0], s.initial_soc, s.initial_soc)?;
        }
    }

    let st = &problem.steam_turbine;
    let st_cap_row = st.eta_el > 0.0 && st.eta_el * max_steam(problem) > st.electric_capacity;
    for t in 0..h {
        // steam_in = sum of steam outputs - dump
        let mut steam: Vec<(Var, f64)> = Vec::new();
        let mut heat: Vec<(Var, f64)> = Vec::new();
        let mut elec: Vec<(Var, f64)> = Vec::new();
        for u in Unit::ALL {
            let tech = problem.tech(u);
            let f = map.fuel(u, t);
            match tech.thermal_output_carrier {
                ThermalCarrier::Heat => heat.push((f, tech.eta_th)),
                ThermalCarrier::Steam => steam.push((f, tech.eta_th)),
            }
            elec.push((f, tech.eta_el));
        }
        steam.push((map.steam_dump(t), -1.0));
        heat.extend(steam.iter().map(|&(v, c)| (v, st.eta_th * c)));
        elec.extend(steam.iter().map(|&(v, c)| (v, st.eta_el * c)));
        if problem.storage.is_some() {
            heat.push((map.discharge[t], 1.0));
            heat.push((map.charge[t], -1.0));
        }
        heat.push((map.heat_curtail(t), -1.0));
        elec.push((map.grid_import(t), 1.0));
        elec.push((map.grid_export(t), -1.0));

        b.lp.add_constraint(format!("heat_balance({t})"), heat, Sense::Eq, problem.heat_demand.values[t])?;
        b.lp.add_constraint(
            format!("elec_balance({t})"),
            elec,
            Sense::Eq,
            problem.electricity_demand.values[t],
        )?;
        b.lp.add_constraint(format!("steam_in_nonneg({t})"), steam.clone(), Sense::Ge, 0.0)?;
        if st_cap_row {
            let row: Vec<_> = steam.iter().map(|&(v, c)| (v, st.eta_el * c)).collect();
            b.lp.add_constraint(format!("steam_turbine_cap({t})"), row, Sense::Le, st.electric_capacity)?;
        }
        for u in Unit::ALL {
            let tech = problem.tech(u);
            if let Some(on) = map.commitment(u, t) {
                let max = tech.max_fuel_power().unwrap_or(0.0);
                let f = map.fuel(u, t);
                b.lp.add_constraint(format!("max_load_{}({t})", u.tag()), [(f, 1.0), (on, -max)], Sense::Le, 0.0)?;
                b.lp.add_constraint(
                    format!("min_load_{}({t})", u.tag()),
                    [(f, 1.0), (on, -tech.min_load_fraction * max)],
                    Sense::Ge,
                    0.0,
                )?;
            }
        }
        if let Some(s) = &problem.storage {
            b.lp.add_constraint(
                format!("soc_dynamics({t})"),
                [
                    (map.soc[t + 1], 1.0),
                    (map.soc[t], -(1.0 - s.standing_loss_rate * dt)),
                    (map.charge[t], -dt * s.charge_efficiency),
                    (map.discharge[t], dt / s.discharge_efficiency),
                ],
                Sense::Eq,
                0.0,
            )?;
        }
    }
    if let Some(s) = &problem.storage {
        if s.cyclic {
            b.lp.add_constraint("soc_cyclic", [(map.soc[0], 1.0), (map.soc[h], -1.0)], Sense::Eq, 0.0)?;
        }
    }
    for u in Unit::ALL {
        if let Some(cap) = problem.fuel_cap(u) {
            let row: Vec<_> = (0..h).map(|t| (map.fuel(u, t), dt)).collect();
            b.lp.add_constraint(format!("fuel_cap_{}", u.tag()), row, Sense::Le, cap)?;
        }
    }

    let mut cost = Vec::new();
    let mut emissions = Vec::new();
    let g = &problem.grid;
    for t in 0..h {
        for u in Unit::ALL {
            let tech = problem.tech(u);
            let f = map.fuel(u, t);
            let c = tech.fuel.cost_per_mwh()?;
            if c != 0.0 {
                cost.push((f, dt * c));
            }
            let e = tech.emission_per_fuel_mwh();
            if e != 0.0 {
                emissions.push((f, dt * e));
            }
        }
        cost.push((map.grid_import(t), dt * g.import_price));
        cost.push((map.grid_export(t), -dt * g.export_price));
        if g.import_intensity != 0.0 {
            emissions.push((map.grid_import(t), dt * g.import_intensity));
        }
    }
    b.lp.set_objective(cost.iter().copied())?;
    map.roles = b.roles;
    Ok((b.lp, map, ObjectiveExpressions { cost, emissions }))
}

/// Copy of `lp` minimising cost with emissions limited to `epsilon` tonnes.
/// An infinite `epsilon` adds no row.
pub fn attach_epsilon(
    lp: &LinearProgram,
    expressions: &ObjectiveExpressions,
    epsilon: f64,
) -> Result<LinearProgram> {
    if expressions.emissions.is_empty() {
        return Err(Error::Domain("the emissions expression is empty".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::Domain(format!("emissions limit {epsilon} must be nonnegative")));
    }
    let mut out = lp.clone();
    if epsilon.is_finite() {
        out.add_constraint(EPSILON_ROW, expressions.emissions.iter().copied(), Sense::Le, epsilon)?;
    }
    out.set_objective(expressions.cost.iter().copied())?;
    Ok(out)
}

/// Raw dispatch decisions, one entry per timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchFlows {
    pub fuel: [Vec<f64>; 3],
    pub steam_dump: Vec<f64>,
    pub heat_curtail: Vec<f64>,
    pub grid_import: Vec<f64>,
    pub grid_export: Vec<f64>,
    /// Empty without storage.
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    /// `H + 1` entries with storage.
    pub soc: Vec<f64>,
    /// Commitment decisions for units in unit-commitment mode.
    pub commitment: [Vec<f64>; 3],
}

impl DispatchFlows {
    pub fn horizon(&self) -> usize {
        self.steam_dump.len()
    }

    pub fn fuel(&self, unit: Unit) -> &[f64] {
        &self.fuel[unit.index()]
    }

    pub fn charge_at(&self, t: usize) -> f64 {
        self.charge.get(t).copied().unwrap_or(0.0)
    }

    pub fn discharge_at(&self, t: usize) -> f64 {
        self.discharge.get(t).copied().unwrap_or(0.0)
    }
}

/// Per-timestep quantities derived from the flows, in MW.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepAccount {
    /// Heat reaching the network (or storage) by unit after curtailment.
    pub heat_delivered: [f64; 3],
    /// Heat produced by unit before curtailment.
    pub heat_generated: [f64; 3],
    /// Electricity by unit, including its share of steam-turbine output.
    pub electricity: [f64; 3],
    pub steam_in: f64,
    pub steam_turbine_electric: f64,
    pub steam_turbine_heat: f64,
    pub heat_supply: f64,
    pub electricity_supply: f64,
    /// CHF/h.
    pub cost_rate: f64,
    /// t/h.
    pub emission_rate: f64,
}

/// Splits steam-turbine output and curtailment onto the producing units.
///
/// Dumped steam is taken from gas-turbine steam first, then wood. Curtailment
/// is taken from waste-to-energy heat first, then wood, then gas.
pub fn account_step(problem: &DispatchProblem, flows: &DispatchFlows, t: usize) -> Result<StepAccount> {
    let st = &problem.steam_turbine;
    let mut acc = StepAccount::default();
    let mut steam = [0.0; 3];
    for u in Unit::ALL {
        let tech = problem.tech(u);
        let (el, th) = convert(tech, flows.fuel(u)[t].max(0.0))?;
        acc.electricity[u.index()] = el;
        match tech.thermal_output_carrier {
            ThermalCarrier::Heat => acc.heat_generated[u.index()] = th,
            ThermalCarrier::Steam => steam[u.index()] = th,
        }
        acc.cost_rate += fuel_cost_rate(&tech.fuel, flows.fuel(u)[t].max(0.0))?;
        acc.emission_rate += emission_rate(tech, el, th)?;
    }
    let mut dump = flows.steam_dump[t];
    for u in [Unit::GasTurbine, Unit::WoodBoiler, Unit::Wte] {
        let take = dump.min(steam[u.index()]).max(0.0);
        steam[u.index()] -= take;
        dump -= take;
    }
    acc.steam_in = Unit::ALL
        .iter()
        .map(|&u| {
            let tech = problem.tech(u);
            if tech.thermal_output_carrier == ThermalCarrier::Steam {
                tech.eta_th * flows.fuel(u)[t]
            } else {
                0.0
            }
        })
        .sum::<f64>()
        - flows.steam_dump[t];
    for u in Unit::ALL {
        acc.heat_generated[u.index()] += st.eta_th * steam[u.index()];
        acc.electricity[u.index()] += st.eta_el * steam[u.index()];
    }
    acc.steam_turbine_electric = st.eta_el * acc.steam_in;
    acc.steam_turbine_heat = st.eta_th * acc.steam_in;

    acc.heat_delivered = acc.heat_generated;
    let mut curtail = flows.heat_curtail[t];
    for u in [Unit::Wte, Unit::WoodBoiler, Unit::GasTurbine] {
        let take = curtail.min(acc.heat_delivered[u.index()]).max(0.0);
        acc.heat_delivered[u.index()] -= take;
        curtail -= take;
    }

    let direct_heat: f64 = Unit::ALL
        .iter()
        .filter(|&&u| problem.tech(u).thermal_output_carrier == ThermalCarrier::Heat)
        .map(|&u| problem.tech(u).eta_th * flows.fuel(u)[t])
        .sum();
    let direct_el: f64 = Unit::ALL.iter().map(|&u| problem.tech(u).eta_el * flows.fuel(u)[t]).sum();
    acc.heat_supply = direct_heat + acc.steam_turbine_heat + flows.discharge_at(t)
        - flows.charge_at(t)
        - flows.heat_curtail[t];
    acc.electricity_supply =
        direct_el + acc.steam_turbine_electric + flows.grid_import[t] - flows.grid_export[t];

    let g = &problem.grid;
    acc.cost_rate += g.import_price * flows.grid_import[t] - g.export_price * flows.grid_export[t];
    acc.emission_rate += g.import_intensity * flows.grid_import[t];
    Ok(acc)
}

/// Energy totals over the horizon, MWh unless noted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DispatchTotals {
    pub heat_delivered: [f64; 3],
    pub heat_generated: [f64; 3],
    pub electricity: [f64; 3],
    pub fuel: [f64; 3],
    pub heat_curtailed: f64,
    pub steam_dumped: f64,
    pub storage_charged: f64,
    pub storage_discharged: f64,
    pub grid_import: f64,
    pub grid_export: f64,
    pub heat_demand: f64,
    pub electricity_demand: f64,
}

impl DispatchTotals {
    pub fn heat_delivered(&self, unit: Unit) -> f64 {
        self.heat_delivered[unit.index()]
    }

    pub fn heat_generated(&self, unit: Unit) -> f64 {
        self.heat_generated[unit.index()]
    }

    pub fn electricity(&self, unit: Unit) -> f64 {
        self.electricity[unit.index()]
    }

    pub fn fuel(&self, unit: Unit) -> f64 {
        self.fuel[unit.index()]
    }

    /// Heat put into the network by the plants, storage charging included.
    pub fn dhn_supply(&self) -> f64 {
        self.heat_delivered.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSolution {
    pub step: f64,
    pub flows: DispatchFlows,
    pub accounts: Vec<StepAccount>,
    pub totals: DispatchTotals,
    /// CHF over the horizon.
    pub cost: f64,
    /// t CO₂-eq over the horizon.
    pub emissions: f64,
}

impl DispatchSolution {
    pub fn horizon(&self) -> usize {
        self.flows.horizon()
    }

    /// Every directed flow as a [`CarrierFlow`].
    pub fn carrier_flows(&self, problem: &DispatchProblem) -> Vec<CarrierFlow> {
        let mut out = Vec::new();
        let fuel_carrier = |u: Unit| match u {
            Unit::Wte => Carrier::Waste,
            Unit::GasTurbine => Carrier::Gas,
            Unit::WoodBoiler => Carrier::Wood,
        };
        for (t, acc) in self.accounts.iter().enumerate() {
            let mut push = |carrier, technology: &str, value: f64| {
                out.push(CarrierFlow {
                    timestep: t,
                    carrier,
                    technology: technology.to_string(),
                    value,
                })
            };
            for u in Unit::ALL {
                let name = &problem.tech(u).name;
                push(fuel_carrier(u), name, self.flows.fuel(u)[t]);
                push(Carrier::Heat, u.plant(), acc.heat_delivered[u.index()]);
                push(Carrier::Electricity, u.plant(), acc.electricity[u.index()]);
            }
            push(Carrier::Steam, "steam_turbine", acc.steam_in);
            push(Carrier::Steam, "steam_dump", self.flows.steam_dump[t]);
            push(Carrier::Heat, "curtailment", self.flows.heat_curtail[t]);
            push(Carrier::Electricity, "grid_import", self.flows.grid_import[t]);
            push(Carrier::Electricity, "grid_export", self.flows.grid_export[t]);
            if !self.flows.charge.is_empty() {
                push(Carrier::Heat, "storage_charge", self.flows.charge[t]);
                push(Carrier::Heat, "storage_discharge", self.flows.discharge[t]);
            }
        }
        out
    }
}

fn read_flows(values: &[f64], map: &VariableMap) -> DispatchFlows {
    let get = |vars: &[Var]| vars.iter().map(|v| values[v.index()]).collect::<Vec<_>>();
    DispatchFlows {
        fuel: [get(&map.fuel[0]), get(&map.fuel[1]), get(&map.fuel[2])],
        steam_dump: get(&map.steam_dump),
        heat_curtail: get(&map.heat_curtail),
        grid_import: get(&map.grid_import),
        grid_export: get(&map.grid_export),
        charge: get(&map.charge),
        discharge: get(&map.discharge),
        soc: get(&map.soc),
        commitment: [
            get(&map.commitment[0]),
            get(&map.commitment[1]),
            get(&map.commitment[2]),
        ],
    }
}

/// Builds totals and accounts from flows alone.
pub fn summarize(problem: &DispatchProblem, flows: DispatchFlows) -> Result<DispatchSolution> {
    let dt = problem.step;
    let h = flows.horizon();
    let mut totals = DispatchTotals::default();
    let mut accounts = Vec::with_capacity(h);
    let mut cost = 0.0;
    let mut emissions = 0.0;
    for t in 0..h {
        let acc = account_step(problem, &flows, t)?;
        for k in 0..3 {
            totals.heat_delivered[k] += dt * acc.heat_delivered[k];
            totals.heat_generated[k] += dt * acc.heat_generated[k];
            totals.electricity[k] += dt * acc.electricity[k];
            totals.fuel[k] += dt * flows.fuel[k][t];
        }
        totals.heat_curtailed += dt * flows.heat_curtail[t];
        totals.steam_dumped += dt * flows.steam_dump[t];
        totals.storage_charged += dt * flows.charge_at(t);
        totals.storage_discharged += dt * flows.discharge_at(t);
        totals.grid_import += dt * flows.grid_import[t];
        totals.grid_export += dt * flows.grid_export[t];
        totals.heat_demand += dt * problem.heat_demand.values[t];
        totals.electricity_demand += dt * problem.electricity_demand.values[t];
        cost += dt * acc.cost_rate;
        emissions += dt * acc.emission_rate;
        accounts.push(acc);
    }
    Ok(DispatchSolution {
        step: dt,
        flows,
        accounts,
        totals,
        cost,
        emissions,
    })
}

/// Converts an optimal LP solution into flows and checks the recomputed cost
/// and emissions against the LP expressions.
pub fn extract_solution(
    raw: &LpSolution,
    map: &VariableMap,
    expressions: &ObjectiveExpressions,
    problem: &DispatchProblem,
) -> Result<DispatchSolution> {
    match raw.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(Error::Infeasible("the dispatch program has no feasible point".into())),
        SolveStatus::Unbounded => {
            return Err(Error::Consistency("the dispatch program is unbounded".into()))
        }
    }
    if raw.values.len() != map.num_variables() {
        return Err(Error::Consistency(format!(
            "solution has {} values but the map has {} variables",
            raw.values.len(),
            map.num_variables()
        )));
    }
    let sol = summarize(problem, read_flows(&raw.values, map))?;
    for (label, recomputed, expr) in [
        ("cost", sol.cost, &expressions.cost),
        ("emissions", sol.emissions, &expressions.emissions),
    ] {
        let lp_value = evaluate(expr, &raw.values);
        let scale = magnitude(expr, &raw.values).max(1.0);
        if (recomputed - lp_value).abs() > OBJECTIVE_TOL * scale {
            return Err(Error::Consistency(format!(
                "recomputed {label} {recomputed} disagrees with the LP value {lp_value}"
            )));
        }
    }
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    HeatBalance,
    ElectricityBalance,
    Bound,
    MinLoad,
    SteamFlow,
    SteamTurbineCapacity,
    StorageDynamics,
    StorageCapacity,
    Cyclic,
    FuelCap,
    Commitment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub timestep: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.timestep {
            Some(t) => write!(f, "t={t}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Rechecks every physical condition from the flows.
pub fn validate_solution(solution: &DispatchSolution, problem: &DispatchProblem) -> Vec<Violation> {
    let mut out = Vec::new();
    let flows = &solution.flows;
    let h = problem.horizon();
    let dt = problem.step;
    let mut flag = |kind, timestep: Option<usize>, message: String| {
        out.push(Violation {
            kind,
            timestep,
            message,
        })
    };
    if flows.horizon() != h {
        flag(
            ViolationKind::Bound,
            None,
            format!("solution covers {} steps, problem has {h}", flows.horizon()),
        );
        return out;
    }
    let st = &problem.steam_turbine;
    let g = &problem.grid;
    for t in 0..h {
        let Ok(acc) = account_step(problem, flows, t) else {
            flag(ViolationKind::Bound, Some(t), "flows cannot be accounted".into());
            continue;
        };
        let d = problem.heat_demand.values[t];
        if (acc.heat_supply - d).abs() > BALANCE_TOL * d.max(1.0) {
            flag(
                ViolationKind::HeatBalance,
                Some(t),
                format!("heat supply {} MW vs demand {d} MW", acc.heat_supply),
            );
        }
        let e = problem.electricity_demand.values[t];
        if (acc.electricity_supply - e).abs() > BALANCE_TOL * e.max(1.0) {
            flag(
                ViolationKind::ElectricityBalance,
                Some(t),
                format!("electricity supply {} MW vs demand {e} MW", acc.electricity_supply),
            );
        }

        let mut check_range = |kind, what: String, v: f64, lo: f64, hi: f64| {
            if v < lo - BOUND_TOL * lo.abs().max(1.0) || v > hi + BOUND_TOL * hi.abs().max(1.0) {
                flag(kind, Some(t), format!("{what} = {v} outside [{lo}, {hi}]"));
            }
        };
        for u in Unit::ALL {
            let tech = problem.tech(u);
            let fuel = flows.fuel(u)[t];
            let max = tech.max_fuel_power().unwrap_or(f64::INFINITY);
            check_range(ViolationKind::Bound, format!("fuel_{}", u.tag()), fuel, 0.0, max);
            match tech.min_load_mode {
                MinLoadMode::AlwaysOn => {
                    let min = tech.min_fuel_power();
                    check_range(ViolationKind::MinLoad, format!("fuel_{} (minimum load)", u.tag()), fuel, min, max);
                }
                MinLoadMode::UnitCommitment => match flows.commitment[u.index()].get(t) {
                    Some(&on) if (on - on.round()).abs() <= 1e-6 => {
                        let on = on.round();
                        let hi = on * max;
                        let lo = on * tech.min_fuel_power();
                        check_range(ViolationKind::MinLoad, format!("fuel_{} (commitment)", u.tag()), fuel, lo, hi);
                    }
                    other => check_range(
                        ViolationKind::Commitment,
                        format!("on_{}", u.tag()),
                        other.copied().unwrap_or(f64::NAN),
                        0.0,
                        0.0,
                    ),
                },
                MinLoadMode::None => {}
            }
        }
        let dump_hi = if problem.allow_steam_dump { f64::INFINITY } else { 0.0 };
        check_range(ViolationKind::Bound, "steam_dump".into(), flows.steam_dump[t], 0.0, dump_hi);
        check_range(ViolationKind::Bound, "heat_curtail".into(), flows.heat_curtail[t], 0.0, f64::INFINITY);
        check_range(
            ViolationKind::Bound,
            "grid_import".into(),
            flows.grid_import[t],
            0.0,
            g.import_cap.unwrap_or(f64::INFINITY),
        );
        check_range(
            ViolationKind::Bound,
            "grid_export".into(),
            flows.grid_export[t],
            0.0,
            g.export_cap.unwrap_or(f64::INFINITY),
        );
        check_range(ViolationKind::SteamFlow, "steam_in".into(), acc.steam_in, 0.0, f64::INFINITY);
        check_range(
            ViolationKind::SteamTurbineCapacity,
            "steam turbine electricity".into(),
            acc.steam_turbine_electric,
            f64::NEG_INFINITY,
            st.electric_capacity,
        );
        if let Some(s) = &problem.storage {
            check_range(ViolationKind::Bound, "charge".into(), flows.charge_at(t), 0.0, s.charge_power_cap);
            check_range(
                ViolationKind::Bound,
                "discharge".into(),
                flows.discharge_at(t),
                0.0,
                s.discharge_power_cap,
            );
        }
    }

    if let Some(s) = &problem.storage {
        if flows.soc.len() != h + 1 || flows.charge.len() != h || flows.discharge.len() != h {
            flag(ViolationKind::StorageDynamics, None, "storage trajectory has the wrong length".into());
        } else {
            let soc_tol = BALANCE_TOL * s.energy_capacity.max(1.0);
            for (t, &soc) in flows.soc.iter().enumerate() {
                if soc < -soc_tol || soc > s.energy_capacity + soc_tol {
                    flag(
                        ViolationKind::StorageCapacity,
                        Some(t),
                        format!("state of charge {soc} MWh outside [0, {}]", s.energy_capacity),
                    );
                }
            }
            for t in 0..h {
                let next = storage_step(flows.soc[t], flows.charge[t], flows.discharge[t], s, dt);
                if (flows.soc[t + 1] - next).abs() > soc_tol {
                    flag(
                        ViolationKind::StorageDynamics,
                        Some(t),
                        format!("state of charge {} MWh, dynamics give {next}", flows.soc[t + 1]),
                    );
                }
            }
            if s.cyclic && (flows.soc[0] - flows.soc[h]).abs() > 1e-5 {
                flag(
                    ViolationKind::Cyclic,
                    None,
                    format!("storage starts at {} MWh but ends at {}", flows.soc[0], flows.soc[h]),
                );
            }
            if !s.cyclic && (flows.soc[0] - s.initial_soc).abs() > soc_tol {
                flag(ViolationKind::StorageDynamics, Some(0), "initial state of charge not respected".into());
            }
        }
    } else if !flows.charge.is_empty() || !flows.discharge.is_empty() {
        flag(ViolationKind::Bound, None, "storage flows without storage".into());
    }

    for u in Unit::ALL {
        if let Some(cap) = problem.fuel_cap(u) {
            let used: f64 = flows.fuel(u).iter().sum::<f64>() * dt;
            if used > cap + BALANCE_TOL * cap.max(1.0) {
                flag(
                    ViolationKind::FuelCap,
                    None,
                    format!("{} uses {used} MWh of fuel, cap {cap}", problem.tech(u).name),
                );
            }
        }
    }
    out
}

/// Largest relative heat and electricity balance residuals.
pub fn balance_residuals(solution: &DispatchSolution, problem: &DispatchProblem) -> (f64, f64) {
    let mut worst = (0.0f64, 0.0f64);
    for (t, acc) in solution.accounts.iter().enumerate() {
        let d = problem.heat_demand.values[t];
        let e = problem.electricity_demand.values[t];
        worst.0 = worst.0.max((acc.heat_supply - d).abs() / d.max(1.0));
        worst.1 = worst.1.max((acc.electricity_supply - e).abs() / e.max(1.0));
    }
    worst
}

/// Net storage energy change over the horizon in MWh; zero for a closed cycle.
pub fn storage_closure(solution: &DispatchSolution, problem: &DispatchProblem) -> Option<f64> {
    let s = problem.storage.as_ref()?;
    let f = &solution.flows;
    let dt = problem.step;
    Some(
        (0..f.horizon())
            .map(|t| {
                (s.charge_efficiency * f.charge[t] - f.discharge[t] / s.discharge_efficiency
                    - s.standing_loss_rate * f.soc[t])
                    * dt
            })
            .sum(),
    )
}

/// Timesteps where heat is curtailed although storage could still absorb it.
pub fn unsaturated_curtailment(solution: &DispatchSolution, problem: &DispatchProblem, tol: f64) -> Vec<usize> {
    let f = &solution.flows;
    (0..f.horizon())
        .filter(|&t| f.heat_curtail[t] > tol)
        .filter(|&t| match &problem.storage {
            None => false,
            Some(s) => {
                f.charge[t] < s.charge_power_cap - tol && f.soc[t + 1] < s.energy_capacity - tol
            }
        })
        .collect()
}

/// Constraint rows of the program by name, for diagnostics.
pub fn find_row(lp: &LinearProgram, name: &str) -> Option<Row> {
    lp.rows().find(|&r| lp.constraint(r).name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference;
    use approx::assert_relative_eq;
    use heatdispatch_lp::{solve_lp, solve_milp};

    fn problem(heat: Vec<f64>, elec: Vec<f64>, storage: bool) -> DispatchProblem {
        DispatchProblem {
            step: 1.0,
            wte: reference::wte_chp(),
            gas_turbine: reference::gas_turbine(),
            wood_boiler: reference::wood_boiler(30.0),
            steam_turbine: reference::steam_turbine(),
            storage: storage.then(reference::seasonal_storage),
            storage_required: false,
            heat_demand: DemandProfile::new(Carrier::Heat, 1.0, heat),
            electricity_demand: DemandProfile::new(Carrier::Electricity, 1.0, elec),
            grid: Grid::default(),
            fuel_caps_active: [false; 3],
            allow_steam_dump: true,
        }
    }

    fn solve(p: &DispatchProblem, emissions: bool) -> DispatchSolution {
        let (mut lp, map, ex) = build_dispatch(p).unwrap();
        if emissions {
            lp.set_objective(ex.emissions.iter().copied()).unwrap();
        }
        let raw = if lp.binaries().is_empty() { solve_lp(&lp) } else { solve_milp(&lp) }.unwrap();
        extract_solution(&raw, &map, &ex, p).unwrap()
    }

    #[test]
    fn single_step_counts() {
        let (lp, map, _) = build_dispatch(&problem(vec![30.0], vec![50.0], false)).unwrap();
        assert_eq!(lp.num_variables(), 7);
        assert_eq!(lp.num_constraints(), 3);
        assert_eq!(map.num_variables(), 7);
        // min load is a bound
        assert_eq!(lp.variable(map.fuel(Unit::Wte, 0)).lower, 40.0);
        assert_eq!(lp.variable(map.fuel(Unit::Wte, 0)).upper, 80.0);
    }

    #[test]
    fn cyclic_storage_counts() {
        let (lp, map, _) = build_dispatch(&problem(vec![30.0; 24], vec![50.0; 24], true)).unwrap();
        let dyn_rows = lp.constraints().iter().filter(|c| c.name.starts_with("soc_dynamics")).count();
        let cyc_rows = lp.constraints().iter().filter(|c| c.name == "soc_cyclic").count();
        assert_eq!((dyn_rows, cyc_rows), (24, 1));
        assert!(map.soc(24).is_some() && map.soc(25).is_none());
    }

    #[test]
    fn variable_map_is_a_bijection() {
        let mut p = problem(vec![30.0; 5], vec![50.0; 5], true);
        p.gas_turbine.min_load_mode = MinLoadMode::UnitCommitment;
        p.gas_turbine.min_load_fraction = 0.4;
        let (lp, map, _) = build_dispatch(&p).unwrap();
        let mut seen = std::collections::HashSet::new();
        for k in 0..lp.num_variables() {
            let var = lp.var_by_name(&lp.variables()[k].name).unwrap();
            let (role, t) = map.role_of(var).unwrap();
            assert_eq!(map.lookup(role, t), Some(var));
            assert!(seen.insert((role, t)));
        }
        assert_eq!(lp.binaries().len(), 5);
    }

    #[test]
    fn impossible_demand_is_infeasible() {
        let mut p = problem(vec![30.0], vec![500.0], false);
        p.grid.import_cap = Some(100.0);
        p.grid.export_cap = Some(0.0);
        let (lp, map, ex) = build_dispatch(&p).unwrap();
        let raw = solve_lp(&lp).unwrap();
        assert_eq!(raw.status, SolveStatus::Infeasible);
        assert!(matches!(extract_solution(&raw, &map, &ex, &p), Err(Error::Infeasible(_))));
    }

    #[test]
    fn zero_demand_runs_waste_at_minimum_and_curtails() {
        let mut p = problem(vec![0.0], vec![0.0], false);
        p.grid.export_price = 0.0;
        let sol = solve(&p, true);
        assert_relative_eq!(sol.flows.fuel(Unit::Wte)[0], 40.0, epsilon = 1e-9);
        assert_relative_eq!(sol.flows.heat_curtail[0], 18.0, epsilon = 1e-9);
        assert_relative_eq!(sol.flows.grid_export[0], 8.0, epsilon = 1e-9);
        assert!(sol.flows.fuel(Unit::GasTurbine)[0].abs() < 1e-9);
        assert!(sol.flows.fuel(Unit::WoodBoiler)[0].abs() < 1e-9);
        assert_relative_eq!(sol.cost, -40_000.0 * 0.30 / 3.3, max_relative = 1e-9);
        assert_relative_eq!(sol.emissions, 8.0 * 0.775, max_relative = 1e-9);
        assert!(validate_solution(&sol, &p).is_empty());
    }

    #[test]
    fn demand_matching_the_minimum_needs_no_curtailment() {
        let p = problem(vec![18.0], vec![8.0], false);
        let sol = solve(&p, true);
        assert!(sol.flows.heat_curtail[0].abs() < 1e-9);
        assert_relative_eq!(sol.totals.heat_delivered(Unit::Wte), 18.0, epsilon = 1e-9);
    }

    #[test]
    fn recomputed_objectives_match_the_program() {
        let p = problem(vec![40.0, 60.0, 20.0], vec![100.0, 120.0, 90.0], true);
        for emissions in [false, true] {
            let (mut lp, map, ex) = build_dispatch(&p).unwrap();
            if emissions {
                lp.set_objective(ex.emissions.iter().copied()).unwrap();
            }
            let raw = solve_lp(&lp).unwrap();
            let sol = extract_solution(&raw, &map, &ex, &p).unwrap();
            assert_relative_eq!(sol.emissions, ex.emissions_of(&raw.values), max_relative = 1e-6);
            assert_relative_eq!(sol.cost, ex.cost_of(&raw.values), max_relative = 1e-6);
            assert!(validate_solution(&sol, &p).is_empty());
        }
    }

    #[test]
    fn perturbed_flows_flag_their_rows() {
        let p = problem(vec![40.0, 60.0, 20.0], vec![100.0, 120.0, 90.0], true);
        let sol = solve(&p, false);
        let mut bad = sol.flows.clone();
        bad.grid_import[1] += 1.0;
        let v = validate_solution(&summarize(&p, bad).unwrap(), &p);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].kind, v[0].timestep), (ViolationKind::ElectricityBalance, Some(1)));

        let mut bad = sol.flows.clone();
        bad.heat_curtail[2] += 1.0;
        let v = validate_solution(&summarize(&p, bad).unwrap(), &p);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].kind, v[0].timestep), (ViolationKind::HeatBalance, Some(2)));

        let mut bad = sol.flows.clone();
        bad.soc[1] = 20_000.0;
        let v = validate_solution(&summarize(&p, bad).unwrap(), &p);
        assert!(v.iter().any(|x| x.kind == ViolationKind::StorageCapacity && x.timestep == Some(1)));
    }

    #[test]
    fn epsilon_limits_emissions() {
        let p = problem(vec![60.0, 70.0], vec![100.0, 100.0], false);
        let (lp, _, ex) = build_dispatch(&p).unwrap();
        let free = solve_lp(&attach_epsilon(&lp, &ex, f64::INFINITY).unwrap()).unwrap();
        let base = solve_lp(&lp).unwrap();
        assert_eq!(free.objective_value, base.objective_value);
        let e_cost = ex.emissions_of(&base.values);
        let limited = solve_lp(&attach_epsilon(&lp, &ex, 0.9 * e_cost).unwrap()).unwrap();
        assert!(ex.emissions_of(&limited.values) <= 0.9 * e_cost * (1.0 + 1e-9));
        assert!(limited.objective_value >= base.objective_value);
        assert!(attach_epsilon(&lp, &ex, -1.0).is_err());
    }

    #[test]
    fn commitment_allows_the_unit_off() {
        let mut p = problem(vec![0.0, 0.0], vec![0.0, 0.0], false);
        p.wte.min_load_mode = MinLoadMode::UnitCommitment;
        p.grid.export_price = 0.0;
        let sol = solve(&p, true);
        assert!(sol.flows.fuel(Unit::Wte).iter().all(|&f| f.abs() < 1e-9));
        assert!(sol.flows.commitment[0].iter().all(|&u| u == 0.0));
        assert!(validate_solution(&sol, &p).is_empty());
    }

    #[test]
    fn steam_turbine_row_only_when_reachable() {
        let mut p = problem(vec![30.0], vec![50.0], false);
        p.wood_boiler.thermal_capacity = Some(400.0);
        let (lp, _, _) = build_dispatch(&p).unwrap();
        assert!(find_row(&lp, "steam_turbine_cap(0)").is_some());
    }

    #[test]
    fn missing_required_storage_is_a_config_error() {
        let mut p = problem(vec![30.0], vec![50.0], false);
        p.storage_required = true;
        assert!(matches!(build_dispatch(&p), Err(Error::Config(_))));
        let mut p = problem(vec![f64::NAN], vec![50.0], false);
        p.storage_required = false;
        assert!(matches!(build_dispatch(&p), Err(Error::Data(_))));
    }
}
