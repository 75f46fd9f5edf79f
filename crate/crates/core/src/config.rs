//! TOML scenario files.
//!
//! Every section except `[scenario]`, `[demand]` and `[run]` is optional and
//! falls back to the reference plant. Fuel costs are given in Rp, grid prices
//! in CHF/MWh, emission intensities of plants in g/kWh and of the grid and
//! background heaters in t/MWh.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::demand::{ElectricityShape, SyntheticWeather};
use crate::error::{Error, Result};
use crate::formulation::{Grid, Unit};
use crate::model::{
    reference, units, FuelCost, FuelSpec, MinLoadMode, SteamTurbineSpec, StorageSpec,
    TechnologySpec,
};

/// Keys without a default.
pub const REQUIRED_KEYS: [&str; 4] = ["scenario.id", "scenario.name", "demand.dhn_share", "run.output_dir"];

pub const DEFAULT_WOOD_THERMAL_CAPACITY: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioInfo,
    pub demand: DemandSection,
    #[serde(default)]
    pub weather: WeatherSection,
    #[serde(default)]
    pub fuels: BTreeMap<String, FuelEntry>,
    #[serde(default)]
    pub technologies: TechnologiesSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storage: Option<StorageSection>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub background: BackgroundSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInfo {
    /// 1, 2 and 3 are the reference scenarios; anything else is custom.
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    /// MWh of network heat per year at `share`.
    pub target_dhn_annual: f64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    pub dhn_share: f64,
    /// City heat demand in MWh per year; alternative to `calibration`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city_annual_heat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
    #[serde(default = "default_space_heating_fraction")]
    pub space_heating_fraction: f64,
    /// MWh per year.
    #[serde(default = "default_annual_electricity")]
    pub annual_electricity: f64,
    #[serde(default = "default_base_temperature")]
    pub base_temperature: f64,
    #[serde(default)]
    pub network_loss_factor: f64,
    #[serde(default)]
    pub electricity_shape: ElectricityShape,
}

fn default_space_heating_fraction() -> f64 {
    0.85
}

fn default_annual_electricity() -> f64 {
    1_000_000.0
}

fn default_base_temperature() -> f64 {
    15.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeatherSection {
    /// Hourly CSV with `timestamp,temperature_c`; synthetic weather when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    pub seed: u64,
    /// Start of the synthetic series, `YYYY-MM-DDTHH:MM:SS`.
    pub start: String,
    /// Length of the synthetic series.
    pub hours: usize,
    pub synthetic: SyntheticWeather,
}

impl Default for WeatherSection {
    fn default() -> Self {
        Self {
            csv: None,
            seed: 1,
            start: "2023-01-01T00:00:00".into(),
            hours: 8760,
            synthetic: SyntheticWeather::default(),
        }
    }
}

impl WeatherSection {
    pub fn start_time(&self) -> Result<NaiveDateTime> {
        NaiveDateTime::parse_from_str(&self.start, "%Y-%m-%dT%H:%M:%S")
            .map_err(|e| Error::Config(format!("weather.start `{}`: {e}", self.start)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuelEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_heating_value_kwh_per_kg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_rp_per_kg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_rp_per_kwh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annual_mass_cap_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TechEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub electric_capacity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thermal_capacity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_el: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_th: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emission_intensity_g_per_kwh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_load_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_load_mode: Option<MinLoadMode>,
    /// Scales both capacities.
    pub capacity_multiplier: f64,
    /// Scales the fuel's annual mass cap.
    pub fuel_cap_multiplier: f64,
    /// Whether the annual fuel cap is enforced.
    pub fuel_cap: bool,
}

impl Default for TechEntry {
    fn default() -> Self {
        Self {
            fuel: None,
            electric_capacity: None,
            thermal_capacity: None,
            eta_el: None,
            eta_th: None,
            emission_intensity_g_per_kwh: None,
            min_load_fraction: None,
            min_load_mode: None,
            capacity_multiplier: 1.0,
            fuel_cap_multiplier: 1.0,
            fuel_cap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteamTurbineEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub electric_capacity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_el: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_th: Option<f64>,
    pub capacity_multiplier: f64,
}

impl Default for SteamTurbineEntry {
    fn default() -> Self {
        Self {
            electric_capacity: None,
            eta_el: None,
            eta_th: None,
            capacity_multiplier: 1.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TechnologiesSection {
    pub wte: TechEntry,
    pub gas_turbine: TechEntry,
    pub wood_boiler: TechEntry,
    pub steam_turbine: SteamTurbineEntry,
}

impl TechnologiesSection {
    fn entry(&self, unit: Unit) -> &TechEntry {
        match unit {
            Unit::Wte => &self.wte,
            Unit::GasTurbine => &self.gas_turbine,
            Unit::WoodBoiler => &self.wood_boiler,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StorageSection {
    pub energy_capacity_mwh: f64,
    pub charge_power_cap_mw: f64,
    pub discharge_power_cap_mw: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    /// Fraction of the content lost per hour.
    pub standing_loss_per_hour: f64,
    pub cyclic: bool,
    /// Used when not cyclic.
    pub initial_soc_mwh: f64,
}

impl Default for StorageSection {
    fn default() -> Self {
        let s = reference::seasonal_storage();
        Self {
            energy_capacity_mwh: s.energy_capacity,
            charge_power_cap_mw: s.charge_power_cap,
            discharge_power_cap_mw: s.discharge_power_cap,
            charge_efficiency: s.charge_efficiency,
            discharge_efficiency: s.discharge_efficiency,
            standing_loss_per_hour: s.standing_loss_rate,
            cyclic: s.cyclic,
            initial_soc_mwh: s.initial_soc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub import_price_chf_per_mwh: f64,
    pub export_price_chf_per_mwh: f64,
    pub import_intensity_t_per_mwh: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub import_cap_mw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub export_cap_mw: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = Grid::default();
        Self {
            import_price_chf_per_mwh: g.import_price,
            export_price_chf_per_mwh: g.export_price,
            import_intensity_t_per_mwh: g.import_intensity,
            import_cap_mw: None,
            export_cap_mw: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeaterEntry {
    /// Share of the heat not served by the network.
    pub fraction: f64,
    /// t CO₂-eq per MWh of input energy (fuel or electricity).
    pub intensity_t_per_mwh: f64,
    /// Heat out per input energy; a coefficient of performance for heat pumps.
    pub efficiency: f64,
}

impl HeaterEntry {
    const fn new(fraction: f64, intensity_t_per_mwh: f64, efficiency: f64) -> Self {
        Self {
            fraction,
            intensity_t_per_mwh,
            efficiency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundSection {
    pub oil: HeaterEntry,
    pub gas: HeaterEntry,
    pub wood: HeaterEntry,
    pub electric: HeaterEntry,
    pub heat_pump: HeaterEntry,
}

impl Default for BackgroundSection {
    fn default() -> Self {
        Self {
            oil: HeaterEntry::new(0.35, 0.266, 0.85),
            gas: HeaterEntry::new(0.35, 0.202, 0.90),
            wood: HeaterEntry::new(0.05, 0.027, 0.80),
            electric: HeaterEntry::new(0.07, 0.128, 1.0),
            heat_pump: HeaterEntry::new(0.18, 0.128, 3.0),
        }
    }
}

impl BackgroundSection {
    pub fn heaters(&self) -> [(&'static str, &HeaterEntry); 5] {
        [
            ("oil", &self.oil),
            ("gas", &self.gas),
            ("wood", &self.wood),
            ("electric", &self.electric),
            ("heat_pump", &self.heat_pump),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunObjective {
    Cost,
    Emissions,
    Pareto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_objective")]
    pub objective: RunObjective,
    #[serde(default = "default_points")]
    pub n_pareto_points: usize,
    /// Hours per timestep; hourly demand is block-averaged.
    #[serde(default = "default_step")]
    pub step_hours: u32,
    /// Hours to optimise from the start of the weather series; all of it when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_hours: Option<usize>,
    pub output_dir: PathBuf,
    #[serde(default = "yes")]
    pub warm_start: bool,
    #[serde(default = "yes")]
    pub allow_steam_dump: bool,
}

fn default_objective() -> RunObjective {
    RunObjective::Emissions
}

fn default_points() -> usize {
    11
}

fn default_step() -> u32 {
    1
}

fn yes() -> bool {
    true
}

fn lookup<'a>(table: &'a toml::Table, path: &str) -> Option<&'a toml::Value> {
    let mut parts = path.split('.');
    let mut value = table.get(parts.next()?)?;
    for p in parts {
        value = value.as_table()?.get(p)?;
    }
    Some(value)
}

/// Parses and validates a scenario file.
pub fn parse_config(source: &[u8]) -> Result<ScenarioConfig> {
    let text = std::str::from_utf8(source).map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))?;
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let missing: Vec<&str> = REQUIRED_KEYS.iter().copied().filter(|k| lookup(&table, k).is_none()).collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!("missing required keys: {}", missing.join(", "))));
    }
    let config: ScenarioConfig = serde_path_to_error::deserialize(table).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("at `{path}`: {}", e.into_inner()))
    })?;
    let violations = validate_scenario(&config);
    if !violations.is_empty() {
        return Err(Error::Config(violations.join("; ")));
    }
    Ok(config)
}

/// Reads a scenario file; a relative weather CSV path is resolved against the
/// file's directory.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut config = parse_config(&bytes).map_err(|e| e.context(&path.display().to_string()))?;
    if let (Some(csv), Some(dir)) = (&config.weather.csv, path.parent()) {
        if csv.is_relative() {
            config.weather.csv = Some(dir.join(csv));
        }
    }
    Ok(config)
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialise config: {e}")))
    }

    fn fuel(&self, name: &str) -> Result<FuelSpec> {
        let base = match name {
            "waste" => Some(reference::waste()),
            "natural_gas" => Some(reference::natural_gas()),
            "wood" => Some(reference::wood()),
            _ => None,
        };
        let entry = self.fuels.get(name);
        let (mut spec, entry) = match (base, entry) {
            (Some(b), e) => (b, e.cloned().unwrap_or_default()),
            (None, Some(e)) => (
                FuelSpec {
                    name: name.to_string(),
                    lower_heating_value: None,
                    cost: FuelCost::PerKwh(0.0),
                    annual_mass_cap: None,
                },
                e.clone(),
            ),
            (None, None) => return Err(Error::Config(format!("fuel `{name}` is not defined"))),
        };
        if entry.cost_rp_per_kg.is_some() && entry.cost_rp_per_kwh.is_some() {
            return Err(Error::Config(format!("fuel `{name}` has both a per-kg and a per-kWh cost")));
        }
        if let Some(v) = entry.lower_heating_value_kwh_per_kg {
            spec.lower_heating_value = Some(v);
        }
        if let Some(v) = entry.cost_rp_per_kg {
            spec.cost = FuelCost::PerKg(units::rp_to_chf(v));
        }
        if let Some(v) = entry.cost_rp_per_kwh {
            spec.cost = FuelCost::PerKwh(units::rp_to_chf(v));
        }
        if let Some(v) = entry.annual_mass_cap_t {
            spec.annual_mass_cap = Some(v);
        }
        Ok(spec)
    }

    pub fn technology(&self, unit: Unit) -> Result<TechnologySpec> {
        let e = self.technologies.entry(unit);
        let mut t = match unit {
            Unit::Wte => reference::wte_chp(),
            Unit::GasTurbine => reference::gas_turbine(),
            Unit::WoodBoiler => reference::wood_boiler(DEFAULT_WOOD_THERMAL_CAPACITY),
        };
        if let Some(f) = &e.fuel {
            t.fuel = self.fuel(f)?;
        } else {
            t.fuel = self.fuel(&t.fuel.name.clone())?;
        }
        if let Some(v) = e.electric_capacity {
            t.electric_capacity = Some(v);
        }
        if let Some(v) = e.thermal_capacity {
            t.thermal_capacity = Some(v);
        }
        t.electric_capacity = t.electric_capacity.map(|c| c * e.capacity_multiplier);
        t.thermal_capacity = t.thermal_capacity.map(|c| c * e.capacity_multiplier);
        t.fuel.annual_mass_cap = t.fuel.annual_mass_cap.map(|c| c * e.fuel_cap_multiplier);
        if let Some(v) = e.eta_el {
            t.eta_el = v;
        }
        if let Some(v) = e.eta_th {
            t.eta_th = v;
        }
        if let Some(v) = e.emission_intensity_g_per_kwh {
            t.emission_intensity = v;
        }
        if let Some(v) = e.min_load_fraction {
            t.min_load_fraction = v;
        }
        if let Some(v) = e.min_load_mode {
            t.min_load_mode = v;
        }
        Ok(t)
    }

    pub fn steam_turbine(&self) -> SteamTurbineSpec {
        let e = &self.technologies.steam_turbine;
        let r = reference::steam_turbine();
        SteamTurbineSpec {
            electric_capacity: e.electric_capacity.unwrap_or(r.electric_capacity) * e.capacity_multiplier,
            eta_el: e.eta_el.unwrap_or(r.eta_el),
            eta_th: e.eta_th.unwrap_or(r.eta_th),
        }
    }

    pub fn storage_spec(&self) -> Option<StorageSpec> {
        self.storage.as_ref().map(|s| StorageSpec {
            energy_capacity: s.energy_capacity_mwh,
            charge_power_cap: s.charge_power_cap_mw,
            discharge_power_cap: s.discharge_power_cap_mw,
            charge_efficiency: s.charge_efficiency,
            discharge_efficiency: s.discharge_efficiency,
            standing_loss_rate: s.standing_loss_per_hour,
            cyclic: s.cyclic,
            initial_soc: s.initial_soc_mwh,
        })
    }

    pub fn grid(&self) -> Grid {
        let g = &self.grid;
        Grid {
            import_price: g.import_price_chf_per_mwh,
            export_price: g.export_price_chf_per_mwh,
            import_intensity: g.import_intensity_t_per_mwh,
            import_cap: g.import_cap_mw,
            export_cap: g.export_cap_mw,
        }
    }

    pub fn fuel_caps_active(&self) -> [bool; 3] {
        Unit::ALL.map(|u| self.technologies.entry(u).fuel_cap)
    }

    /// Scenarios 2 and 3 are defined by their storage.
    pub fn requires_storage(&self) -> bool {
        matches!(self.scenario.id, 2 | 3)
    }
}

/// Every violated rule, empty for a usable configuration.
pub fn validate_scenario(config: &ScenarioConfig) -> Vec<String> {
    let mut out = Vec::new();
    let d = &config.demand;
    let finite_pos = |v: f64| v.is_finite() && v > 0.0;
    if !(d.dhn_share > 0.0 && d.dhn_share <= 1.0) {
        out.push(format!("demand.dhn_share = {} must lie in (0, 1]", d.dhn_share));
    }
    match (&d.city_annual_heat, &d.calibration) {
        (Some(_), Some(_)) => out.push("give either demand.city_annual_heat or demand.calibration, not both".into()),
        (None, None) => out.push("demand needs city_annual_heat or a calibration section".into()),
        (Some(v), None) if !finite_pos(*v) => out.push(format!("demand.city_annual_heat = {v} must be positive")),
        (None, Some(c)) => {
            if !finite_pos(c.target_dhn_annual) {
                out.push(format!("demand.calibration.target_dhn_annual = {} must be positive", c.target_dhn_annual));
            }
            if !(c.share > 0.0 && c.share <= 1.0) {
                out.push(format!("demand.calibration.share = {} must lie in (0, 1]", c.share));
            }
        }
        _ => {}
    }
    if !(0.0..=1.0).contains(&d.space_heating_fraction) {
        out.push(format!("demand.space_heating_fraction = {} must lie in [0, 1]", d.space_heating_fraction));
    }
    if !(d.annual_electricity.is_finite() && d.annual_electricity >= 0.0) {
        out.push(format!("demand.annual_electricity = {} must be nonnegative", d.annual_electricity));
    }
    if !d.base_temperature.is_finite() {
        out.push("demand.base_temperature must be finite".into());
    }
    if !(d.network_loss_factor.is_finite() && d.network_loss_factor >= 0.0) {
        out.push(format!("demand.network_loss_factor = {} must be nonnegative", d.network_loss_factor));
    }

    let w = &config.weather;
    if let Err(e) = w.start_time() {
        out.push(e.to_string());
    }
    if w.csv.is_none() && w.hours == 0 {
        out.push("weather.hours must be positive".into());
    }

    for u in Unit::ALL {
        let e = config.technologies.entry(u);
        for (label, v) in [("capacity_multiplier", e.capacity_multiplier), ("fuel_cap_multiplier", e.fuel_cap_multiplier)] {
            if !finite_pos(v) {
                out.push(format!("technologies.{}.{label} = {v} must be positive", u.tag()));
            }
        }
        match config.technology(u) {
            Ok(t) => out.extend(t.violations().into_iter().map(|v| format!("{}: {v}", t.name))),
            Err(e) => out.push(e.to_string()),
        }
    }
    out.extend(config.steam_turbine().violations().into_iter().map(|v| format!("steam turbine: {v}")));
    if let Some(s) = config.storage_spec() {
        out.extend(s.violations().into_iter().map(|v| format!("storage: {v}")));
    }

    let g = &config.grid;
    for (label, v) in [
        ("import_price_chf_per_mwh", g.import_price_chf_per_mwh),
        ("export_price_chf_per_mwh", g.export_price_chf_per_mwh),
        ("import_intensity_t_per_mwh", g.import_intensity_t_per_mwh),
    ] {
        if !v.is_finite() {
            out.push(format!("grid.{label} must be finite"));
        }
    }
    if g.import_intensity_t_per_mwh < 0.0 {
        out.push("grid.import_intensity_t_per_mwh must be nonnegative".into());
    }
    for (label, cap) in [("import_cap_mw", g.import_cap_mw), ("export_cap_mw", g.export_cap_mw)] {
        if cap.is_some_and(|c| !(c >= 0.0)) {
            out.push(format!("grid.{label} must be nonnegative"));
        }
    }

    let total: f64 = config.background.heaters().iter().map(|(_, h)| h.fraction).sum();
    if (total - 1.0).abs() > 1e-9 {
        out.push(format!("background fractions sum to {total}, not 1"));
    }
    for (name, h) in config.background.heaters() {
        if !(h.fraction >= 0.0 && h.intensity_t_per_mwh >= 0.0 && finite_pos(h.efficiency)) {
            out.push(format!("background.{name} needs a nonnegative fraction and intensity and a positive efficiency"));
        }
    }

    let r = &config.run;
    if r.step_hours == 0 || 24 % r.step_hours != 0 {
        out.push(format!("run.step_hours = {} must divide 24", r.step_hours));
    }
    if let Some(h) = r.horizon_hours {
        if h == 0 || (r.step_hours > 0 && h % r.step_hours as usize != 0) {
            out.push(format!("run.horizon_hours = {h} is not a positive multiple of the step"));
        }
        if config.weather.csv.is_none() && h > w.hours {
            out.push(format!("run.horizon_hours = {h} exceeds the {} weather hours", w.hours));
        }
    } else if config.weather.csv.is_none() && r.step_hours > 0 && w.hours % r.step_hours as usize != 0 {
        out.push(format!("weather.hours = {} is not a multiple of the step", w.hours));
    }
    if r.n_pareto_points < 2 {
        out.push(format!("run.n_pareto_points = {} must be at least 2", r.n_pareto_points));
    }

    if config.requires_storage() && config.storage.is_none() {
        out.push(format!("scenario {} requires a storage section", config.scenario.id));
    }
    if config.scenario.id == 3 && (d.dhn_share - 0.5).abs() > 1e-12 {
        out.push("scenario 3 requires demand.dhn_share = 0.5".into());
    }
    out
}
