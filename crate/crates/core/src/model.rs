//! Plant, fuel and storage descriptions plus the conversion and accounting
//! arithmetic shared by the rest of the crate.
//!
//! Internally everything is MW, MWh, CHF and tonnes CO₂-eq. Rappen and grams
//! only appear in the [`units`] helpers used at the configuration boundary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod units {
    /// Rp/kWh to CHF/MWh.
    pub fn rp_per_kwh_to_chf_per_mwh(x: f64) -> f64 {
        x * 10.0
    }

    pub fn chf_per_mwh_to_rp_per_kwh(x: f64) -> f64 {
        x / 10.0
    }

    /// g/kWh to t/MWh.
    pub fn g_per_kwh_to_t_per_mwh(x: f64) -> f64 {
        x * 1e-3
    }

    pub fn t_per_mwh_to_g_per_kwh(x: f64) -> f64 {
        x * 1e3
    }

    pub fn rp_to_chf(x: f64) -> f64 {
        x / 100.0
    }
}

/// How a fuel is priced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FuelCost {
    /// CHF per kg; needs a lower heating value.
    PerKg(f64),
    /// CHF per kWh of fuel energy.
    PerKwh(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuelSpec {
    pub name: String,
    /// kWh per kg.
    pub lower_heating_value: Option<f64>,
    pub cost: FuelCost,
    /// Tonnes per year; `None` is unbounded.
    pub annual_mass_cap: Option<f64>,
}

impl FuelSpec {
    /// Annual fuel energy available in MWh, derived from the mass cap.
    pub fn annual_energy_cap(&self) -> Option<f64> {
        // t * 1000 kg/t * LHV kWh/kg / 1000 kWh/MWh
        match (self.annual_mass_cap, self.lower_heating_value) {
            (Some(mass), Some(lhv)) => Some(mass * lhv),
            _ => None,
        }
    }

    /// Fuel cost per MWh of fuel energy.
    pub fn cost_per_mwh(&self) -> Result<f64> {
        match self.cost {
            FuelCost::PerKwh(chf) => Ok(chf * 1000.0),
            FuelCost::PerKg(chf) => match self.lower_heating_value {
                Some(lhv) if lhv > 0.0 => Ok(chf * 1000.0 / lhv),
                _ => Err(Error::Config(format!(
                    "fuel '{}' is priced per kg but has no positive lower heating value",
                    self.name
                ))),
            },
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let cost = match self.cost {
            FuelCost::PerKg(c) | FuelCost::PerKwh(c) => c,
        };
        if !cost.is_finite() {
            out.push(format!("fuel '{}': cost is not finite", self.name));
        }
        let mass_based = matches!(self.cost, FuelCost::PerKg(_)) || self.annual_mass_cap.is_some();
        match self.lower_heating_value {
            Some(lhv) if !(lhv > 0.0 && lhv.is_finite()) => {
                out.push(format!("fuel '{}': lower heating value must be positive", self.name))
            }
            None if mass_based => out.push(format!(
                "fuel '{}': mass-based cost or cap requires a lower heating value",
                self.name
            )),
            _ => {}
        }
        if let Some(cap) = self.annual_mass_cap {
            if !(cap >= 0.0 && cap.is_finite()) {
                out.push(format!("fuel '{}': annual mass cap must be a nonnegative number", self.name));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmissionBasis {
    ElectricOutput,
    ThermalOutput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinLoadMode {
    /// Lower bound on output at every timestep.
    AlwaysOn,
    /// Binary on/off with the minimum applying only while on.
    UnitCommitment,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermalCarrier {
    /// Delivered straight to the network.
    Heat,
    /// Routed through the steam turbine.
    Steam,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TechnologySpec {
    pub name: String,
    pub fuel: FuelSpec,
    /// MW electric; absent for heat-only units.
    pub electric_capacity: Option<f64>,
    /// MW of thermal output; used to size units without an electric rating.
    pub thermal_capacity: Option<f64>,
    pub eta_el: f64,
    pub eta_th: f64,
    /// g CO₂-eq per kWh of the basis output.
    pub emission_intensity: f64,
    pub emission_basis: EmissionBasis,
    /// Fraction of electric capacity.
    pub min_load_fraction: f64,
    pub min_load_mode: MinLoadMode,
    pub thermal_output_carrier: ThermalCarrier,
}

impl TechnologySpec {
    /// Largest admissible fuel input in MW, if any capacity applies.
    pub fn max_fuel_power(&self) -> Option<f64> {
        let by_el = self
            .electric_capacity
            .filter(|_| self.eta_el > 0.0)
            .map(|p| p / self.eta_el);
        let by_th = self
            .thermal_capacity
            .filter(|_| self.eta_th > 0.0)
            .map(|q| q / self.eta_th);
        match (by_el, by_th) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Fuel input at minimum load in MW.
    pub fn min_fuel_power(&self) -> f64 {
        match (self.min_load_mode, self.max_fuel_power()) {
            (MinLoadMode::None, _) | (_, None) => 0.0,
            (_, Some(max)) => self.min_load_fraction * max,
        }
    }

    /// Emissions per MWh of fuel in t.
    pub fn emission_per_fuel_mwh(&self) -> f64 {
        let eta = match self.emission_basis {
            EmissionBasis::ElectricOutput => self.eta_el,
            EmissionBasis::ThermalOutput => self.eta_th,
        };
        units::g_per_kwh_to_t_per_mwh(self.emission_intensity) * eta
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = &self.name;
        for (label, eta) in [("eta_el", self.eta_el), ("eta_th", self.eta_th)] {
            if !(0.0..=1.0).contains(&eta) {
                out.push(format!("technology '{n}': {label} = {eta} is outside [0, 1]"));
            }
        }
        if self.eta_el + self.eta_th > 1.0 + 1e-12 {
            out.push(format!(
                "technology '{n}': eta_el + eta_th = {} exceeds 1",
                self.eta_el + self.eta_th
            ));
        }
        if !(0.0..=1.0).contains(&self.min_load_fraction) {
            out.push(format!("technology '{n}': min_load_fraction is outside [0, 1]"));
        }
        if self.eta_el > 0.0 && !self.electric_capacity.is_some_and(|p| p > 0.0) {
            out.push(format!(
                "technology '{n}': electric capacity must be positive when eta_el > 0"
            ));
        }
        for (label, cap) in [
            ("electric_capacity", self.electric_capacity),
            ("thermal_capacity", self.thermal_capacity),
        ] {
            if let Some(c) = cap {
                if !(c >= 0.0 && c.is_finite()) {
                    out.push(format!("technology '{n}': {label} must be a nonnegative number"));
                }
            }
        }
        if !(self.emission_intensity >= 0.0 && self.emission_intensity.is_finite()) {
            out.push(format!("technology '{n}': emission intensity must be a nonnegative number"));
        }
        if self.min_load_mode != MinLoadMode::None
            && self.min_load_fraction > 0.0
            && self.max_fuel_power().is_none()
        {
            out.push(format!("technology '{n}': a minimum load needs a capacity"));
        }
        out.extend(self.fuel.violations());
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteamTurbineSpec {
    pub electric_capacity: f64,
    pub eta_el: f64,
    pub eta_th: f64,
}

impl SteamTurbineSpec {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.eta_el < 0.0 || self.eta_th < 0.0 || self.eta_el + self.eta_th > 1.0 + 1e-12 {
            out.push(format!(
                "steam turbine: efficiencies {} + {} must be nonnegative and sum to at most 1",
                self.eta_el, self.eta_th
            ));
        }
        if !(self.electric_capacity >= 0.0 && self.electric_capacity.is_finite()) {
            out.push("steam turbine: electric capacity must be a nonnegative number".into());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageSpec {
    /// MWh.
    pub energy_capacity: f64,
    /// MW.
    pub charge_power_cap: f64,
    /// MW.
    pub discharge_power_cap: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    /// Fraction of the state of charge lost per hour.
    pub standing_loss_rate: f64,
    pub cyclic: bool,
    /// MWh at the first timestep when not cyclic.
    pub initial_soc: f64,
}

impl StorageSpec {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (label, eta) in [
            ("charge_efficiency", self.charge_efficiency),
            ("discharge_efficiency", self.discharge_efficiency),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                out.push(format!("storage: {label} = {eta} is outside (0, 1]"));
            }
        }
        if !(0.0..1.0).contains(&self.standing_loss_rate) {
            out.push("storage: standing_loss_rate is outside [0, 1)".into());
        }
        for (label, v) in [
            ("energy_capacity", self.energy_capacity),
            ("charge_power_cap", self.charge_power_cap),
            ("discharge_power_cap", self.discharge_power_cap),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                out.push(format!("storage: {label} must be a nonnegative number"));
            }
        }
        if !self.cyclic && !(0.0..=self.energy_capacity).contains(&self.initial_soc) {
            out.push("storage: initial_soc must lie within [0, energy_capacity]".into());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Carrier {
    Waste,
    Gas,
    Wood,
    Steam,
    Heat,
    Electricity,
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Carrier::Waste => "waste",
            Carrier::Gas => "gas",
            Carrier::Wood => "wood",
            Carrier::Steam => "steam",
            Carrier::Heat => "heat",
            Carrier::Electricity => "electricity",
        })
    }
}

/// One directed flow at one timestep, in MW.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierFlow {
    pub timestep: usize,
    pub carrier: Carrier,
    pub technology: String,
    pub value: f64,
}

/// Electric and thermal output for a given fuel input, both in MW.
pub fn convert(tech: &TechnologySpec, fuel_power: f64) -> Result<(f64, f64)> {
    if !(fuel_power >= 0.0) {
        return Err(Error::Domain(format!(
            "fuel input to '{}' must be nonnegative, got {fuel_power}",
            tech.name
        )));
    }
    Ok((tech.eta_el * fuel_power, tech.eta_th * fuel_power))
}

/// Emissions in t/h for an output pair produced from a single fuel input.
pub fn emission_rate(tech: &TechnologySpec, electric: f64, thermal: f64) -> Result<f64> {
    if !(electric >= 0.0 && thermal >= 0.0) {
        return Err(Error::Domain(format!(
            "outputs of '{}' must be nonnegative, got ({electric}, {thermal})",
            tech.name
        )));
    }
    let tol = 1e-9 * (1.0 + electric.max(thermal));
    let consistent = match (tech.eta_el > 0.0, tech.eta_th > 0.0) {
        (true, true) => (electric / tech.eta_el - thermal / tech.eta_th).abs() * tech.eta_el.min(tech.eta_th) <= tol,
        (true, false) => thermal <= tol,
        (false, true) => electric <= tol,
        (false, false) => electric <= tol && thermal <= tol,
    };
    if !consistent {
        return Err(Error::Domain(format!(
            "outputs ({electric} MW el, {thermal} MW th) of '{}' do not come from one fuel input",
            tech.name
        )));
    }
    let basis = match tech.emission_basis {
        EmissionBasis::ElectricOutput => electric,
        EmissionBasis::ThermalOutput => thermal,
    };
    // g/kWh * MW * 1000 kWh/MWh * 1e-6 t/g
    Ok(tech.emission_intensity * basis * 1e-3)
}

/// Fuel cost in CHF/h; negative for gate-fee fuels.
pub fn fuel_cost_rate(fuel: &FuelSpec, fuel_power: f64) -> Result<f64> {
    if !(fuel_power >= 0.0) {
        return Err(Error::Domain(format!(
            "fuel power for '{}' must be nonnegative, got {fuel_power}",
            fuel.name
        )));
    }
    match fuel.cost {
        FuelCost::PerKwh(chf) => Ok(chf * fuel_power * 1000.0),
        FuelCost::PerKg(chf) => match fuel.lower_heating_value {
            Some(lhv) if lhv > 0.0 => Ok(chf * fuel_power * 1000.0 / lhv),
            _ => Err(Error::Config(format!(
                "fuel '{}' is priced per kg but has no lower heating value",
                fuel.name
            ))),
        },
    }
}

/// State of charge after one step. Not clamped.
pub fn storage_step(soc: f64, charge: f64, discharge: f64, spec: &StorageSpec, dt: f64) -> f64 {
    (1.0 - spec.standing_loss_rate * dt) * soc
        + dt * (spec.charge_efficiency * charge - discharge / spec.discharge_efficiency)
}

/// Waste-to-energy CHP, gas turbine, wood boiler and steam turbine with the
/// reference parameter set.
pub mod reference {
    use super::*;

    pub fn waste() -> FuelSpec {
        FuelSpec {
            name: "waste".into(),
            lower_heating_value: Some(3.3),
            cost: FuelCost::PerKg(units::rp_to_chf(-30.0)),
            annual_mass_cap: Some(110_000.0),
        }
    }

    pub fn natural_gas() -> FuelSpec {
        FuelSpec {
            name: "natural_gas".into(),
            lower_heating_value: None,
            cost: FuelCost::PerKwh(units::rp_to_chf(10.0)),
            annual_mass_cap: None,
        }
    }

    pub fn wood() -> FuelSpec {
        FuelSpec {
            name: "wood".into(),
            lower_heating_value: Some(4.0),
            cost: FuelCost::PerKg(units::rp_to_chf(24.0)),
            annual_mass_cap: Some(12_000.0),
        }
    }

    pub fn wte_chp() -> TechnologySpec {
        TechnologySpec {
            name: "wte_chp".into(),
            fuel: waste(),
            electric_capacity: Some(16.0),
            thermal_capacity: None,
            eta_el: 0.20,
            eta_th: 0.45,
            emission_intensity: 775.0,
            emission_basis: EmissionBasis::ElectricOutput,
            min_load_fraction: 0.5,
            min_load_mode: MinLoadMode::AlwaysOn,
            thermal_output_carrier: ThermalCarrier::Heat,
        }
    }

    pub fn gas_turbine() -> TechnologySpec {
        TechnologySpec {
            name: "gas_turbine".into(),
            fuel: natural_gas(),
            electric_capacity: Some(46.0),
            thermal_capacity: None,
            eta_el: 0.35,
            eta_th: 0.53,
            emission_intensity: 760.0,
            emission_basis: EmissionBasis::ElectricOutput,
            min_load_fraction: 0.0,
            min_load_mode: MinLoadMode::None,
            thermal_output_carrier: ThermalCarrier::Steam,
        }
    }

    pub fn wood_boiler(thermal_capacity: f64) -> TechnologySpec {
        TechnologySpec {
            name: "wood_boiler".into(),
            fuel: wood(),
            electric_capacity: None,
            thermal_capacity: Some(thermal_capacity),
            eta_el: 0.0,
            eta_th: 0.86,
            emission_intensity: 27.0,
            emission_basis: EmissionBasis::ThermalOutput,
            min_load_fraction: 0.0,
            min_load_mode: MinLoadMode::None,
            thermal_output_carrier: ThermalCarrier::Steam,
        }
    }

    pub fn steam_turbine() -> SteamTurbineSpec {
        SteamTurbineSpec {
            electric_capacity: 27.0,
            eta_el: 0.07,
            eta_th: 0.70,
        }
    }

    pub fn seasonal_storage() -> StorageSpec {
        StorageSpec {
            energy_capacity: 15_000.0,
            charge_power_cap: 50.0,
            discharge_power_cap: 50.0,
            charge_efficiency: 0.93,
            discharge_efficiency: 0.93,
            standing_loss_rate: 2e-5,
            cyclic: true,
            initial_soc: 0.0,
        }
    }
}
