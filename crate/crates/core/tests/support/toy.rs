//! Small plants whose optima can be worked out by hand.

#![allow(dead_code)]

use heatdispatch_core::demand::DemandProfile;
use heatdispatch_core::formulation::{DispatchProblem, Grid};
use heatdispatch_core::model::{
    reference, Carrier, EmissionBasis, FuelCost, FuelSpec, MinLoadMode, SteamTurbineSpec, TechnologySpec,
    ThermalCarrier,
};

/// Gas cost per MWh of heat.
pub const GAS_COST: f64 = 50.0;
/// Gas emissions per MWh of heat.
pub const GAS_EM: f64 = 0.2;
pub const WOOD_COST: f64 = 80.0;
pub const WOOD_EM: f64 = 0.02;

fn heat_unit(name: &str, chf_per_kwh: f64, g_per_kwh: f64, capacity: f64) -> TechnologySpec {
    TechnologySpec {
        name: name.into(),
        fuel: FuelSpec {
            name: format!("{name}_fuel"),
            lower_heating_value: None,
            cost: FuelCost::PerKwh(chf_per_kwh),
            annual_mass_cap: None,
        },
        electric_capacity: None,
        thermal_capacity: Some(capacity),
        eta_el: 0.0,
        eta_th: 1.0,
        emission_intensity: g_per_kwh,
        emission_basis: EmissionBasis::ThermalOutput,
        min_load_fraction: 0.0,
        min_load_mode: MinLoadMode::None,
        thermal_output_carrier: ThermalCarrier::Steam,
    }
}

/// Heat-only plant: cheap dirty gas and expensive clean wood, both through a
/// lossless steam turbine without electricity. The waste unit is switched off.
pub fn two_tech(heat: &[f64]) -> DispatchProblem {
    let mut wte = reference::wte_chp();
    wte.thermal_capacity = Some(0.0);
    wte.min_load_mode = MinLoadMode::None;
    DispatchProblem {
        step: 1.0,
        wte,
        gas_turbine: heat_unit("gas", GAS_COST / 1000.0, GAS_EM * 1000.0, 100.0),
        wood_boiler: heat_unit("wood", WOOD_COST / 1000.0, WOOD_EM * 1000.0, 100.0),
        steam_turbine: SteamTurbineSpec {
            electric_capacity: 0.0,
            eta_el: 0.0,
            eta_th: 1.0,
        },
        storage: None,
        storage_required: false,
        heat_demand: DemandProfile::new(Carrier::Heat, 1.0, heat.to_vec()),
        electricity_demand: DemandProfile::new(Carrier::Electricity, 1.0, vec![0.0; heat.len()]),
        grid: Grid::default(),
        fuel_caps_active: [false; 3],
        allow_steam_dump: true,
    }
}

/// The reference plant with the given hourly demands.
pub fn reference_plant(heat: &[f64], elec: &[f64], storage: bool) -> DispatchProblem {
    DispatchProblem {
        step: 1.0,
        wte: reference::wte_chp(),
        gas_turbine: reference::gas_turbine(),
        wood_boiler: reference::wood_boiler(30.0),
        steam_turbine: reference::steam_turbine(),
        storage: storage.then(reference::seasonal_storage),
        storage_required: false,
        heat_demand: DemandProfile::new(Carrier::Heat, 1.0, heat.to_vec()),
        electricity_demand: DemandProfile::new(Carrier::Electricity, 1.0, elec.to_vec()),
        grid: Grid::default(),
        fuel_caps_active: [false; 3],
        allow_steam_dump: true,
    }
}
