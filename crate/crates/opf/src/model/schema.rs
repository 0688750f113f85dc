//! Serde mirror of the `acdc-opf-case/1` TOML case format.
//!
//! These structs reflect the file layout one-to-one and perform no
//! validation beyond what serde enforces (types, required fields, unknown
//! keys). [`super::load_case`] converts them into the checked [`super::Network`]
//! representation with dense indices.

use serde::Deserialize;

pub const SCHEMA_ID: &str = "acdc-opf-case/1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub base: BaseFile,
    #[serde(default)]
    pub ac_region: Vec<AcRegionFile>,
    #[serde(default)]
    pub mtdc: Option<MtdcFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseFile {
    /// Power base in MVA.
    pub s_mva: f64,
    /// AC voltage base in kV (informational).
    pub v_kv: f64,
    /// Weight of the network-loss term in the combined objective.
    pub eta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcRegionFile {
    pub id: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub bus: Vec<BusFile>,
    pub branch: Vec<BranchFile>,
    pub gen: Vec<GenFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusFile {
    pub id: u32,
    pub vmin: f64,
    pub vmax: f64,
    /// Active / reactive load in per unit.
    #[serde(default)]
    pub pd: f64,
    #[serde(default)]
    pub qd: f64,
    /// Shunt conductance / susceptance in per unit.
    #[serde(default)]
    pub gs: f64,
    #[serde(default)]
    pub bs: f64,
    /// Angle-reference bus of its region (exactly one per region).
    #[serde(default)]
    pub slack: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchFile {
    pub from: u32,
    pub to: u32,
    /// Series impedance in per unit.
    pub r: f64,
    pub x: f64,
    /// Total line-charging susceptance in per unit.
    #[serde(default)]
    pub b: f64,
    /// Apparent-power rating in per unit; absent = unlimited.
    #[serde(default)]
    pub smax: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenFile {
    pub bus: u32,
    /// Active / reactive dispatch window in per unit.
    pub pmin: f64,
    pub pmax: f64,
    pub qmin: f64,
    pub qmax: f64,
    /// Cost c₂·P² + c₁·P + c₀ in $/h with P in MW.
    pub cost_quad: f64,
    pub cost_lin: f64,
    pub cost_const: f64,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MtdcFile {
    #[serde(default)]
    pub dc_bus: Vec<DcBusFile>,
    #[serde(default)]
    pub dc_branch: Vec<DcBranchFile>,
    #[serde(default)]
    pub converter: Vec<ConverterFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcBusFile {
    pub id: u32,
    pub vmin: f64,
    pub vmax: f64,
    /// DC voltage reference (master station bus; exactly one).
    #[serde(default)]
    pub reference: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcBranchFile {
    pub from: u32,
    pub to: u32,
    /// DC cable resistance in per unit.
    pub r: f64,
    /// Transfer limit in per unit.
    pub pmax: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConverterFile {
    pub id: u32,
    /// Owning AC region and the PCC bus inside it.
    pub ac_region: u32,
    pub ac_bus: u32,
    pub dc_bus: u32,
    /// Voltage window applied to the converter-side buses.
    pub v_ac_min: f64,
    pub v_ac_max: f64,
    /// Tie line between the region bus and the station PCC.
    pub tie_r: f64,
    pub tie_x: f64,
    /// Interface transformer impedance.
    pub r_tf: f64,
    pub x_tf: f64,
    /// Filter shunt susceptance at the midpoint bus.
    pub b_filter: f64,
    /// Phase-reactor impedance between filter and converter terminal.
    pub r_phase: f64,
    pub x_phase: f64,
    /// Loss polynomial a₁·I² + a₂·I + a₃ added to the DC-side balance.
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Converter/DC voltage ratio limit.
    pub delta: f64,
    /// Reactive under-excitation fraction of the nominal rating.
    pub gamma: f64,
    /// Nominal apparent-power rating in per unit.
    pub s_nom: f64,
    /// Converter current limit in per unit.
    pub i_max: f64,
    /// Maximum converter terminal voltage in per unit.
    pub v_m_max: f64,
}
