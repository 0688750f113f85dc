//! Validated in-memory network model.
//!
//! [`load_case`] reads a TOML case file (schema `acdc-opf-case/1`, see
//! `cases/SCHEMA.md`), checks structural consistency — unique identifiers,
//! resolvable references, exactly one angle reference per AC region and one
//! DC voltage reference, physical parameter signs — and produces a
//! [`Network`] in which every cross-reference is a dense 0-based index.
//! All quantities are in per unit on the system MVA base unless a field
//! says otherwise.

pub mod schema;

use std::collections::HashMap;
use std::path::Path;

use schema::{CaseFile, SCHEMA_ID};

/// Structural problems in a case file.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("failed to read case file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse case file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported schema {found:?}, expected {SCHEMA_ID:?}")]
    Schema { found: String },
    #[error("base values must be positive and finite")]
    BadBase,
    #[error("duplicate AC region id {0}")]
    DuplicateRegion(u32),
    #[error("region {region}: duplicate bus id {bus}")]
    DuplicateBus { region: u32, bus: u32 },
    #[error("region {region}: expected exactly one slack bus, found {count}")]
    SlackCount { region: u32, count: usize },
    #[error("region {region}: branch references unknown bus {bus}")]
    BranchBus { region: u32, bus: u32 },
    #[error("region {region}: generator references unknown bus {bus}")]
    GenBus { region: u32, bus: u32 },
    #[error("region {region}, bus {bus}: invalid voltage window")]
    VoltageWindow { region: u32, bus: u32 },
    #[error("region {region}: branch {from}-{to} has invalid parameters")]
    BranchParams { region: u32, from: u32, to: u32 },
    #[error("region {region}: generator at bus {bus} has an empty or invalid window")]
    GenWindow { region: u32, bus: u32 },
    #[error("duplicate DC bus id {0}")]
    DuplicateDcBus(u32),
    #[error("expected exactly one DC reference bus, found {0}")]
    DcRefCount(usize),
    #[error("DC branch references unknown bus {0}")]
    DcBranchBus(u32),
    #[error("DC branch {from}-{to} has invalid parameters")]
    DcBranchParams { from: u32, to: u32 },
    #[error("converter {0}: duplicate converter id")]
    DuplicateConverter(u32),
    #[error("converter {id}: unknown AC region {region}")]
    ConverterRegion { id: u32, region: u32 },
    #[error("converter {id}: unknown bus {bus} in region {region}")]
    ConverterAcBus { id: u32, region: u32, bus: u32 },
    #[error("converter {id}: unknown DC bus {bus}")]
    ConverterDcBus { id: u32, bus: u32 },
    #[error("converter {id}: DC bus {bus} already has a converter")]
    ConverterDcBusTaken { id: u32, bus: u32 },
    #[error("converter {0}: invalid parameters")]
    ConverterParams(u32),
    #[error("MTDC grid has converters or branches but no buses")]
    EmptyMtdc,
}

/// Series admittance `1/(r + jx)` of a branch, as `(g, b)`.
pub fn series_admittance(r: f64, x: f64) -> (f64, f64) {
    let d = r * r + x * x;
    (r / d, -x / d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: u32,
    pub vmin: f64,
    pub vmax: f64,
    pub pd: f64,
    pub qd: f64,
    pub gs: f64,
    pub bs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Dense endpoint indices into `AcRegion::buses`.
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    /// Total charging susceptance (half at each end).
    pub b_charge: f64,
    pub smax: Option<f64>,
    /// Series admittance of `r + jx`.
    pub g: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gen {
    /// Dense bus index.
    pub bus: usize,
    pub pmin: f64,
    pub pmax: f64,
    pub qmin: f64,
    pub qmax: f64,
    /// `[quadratic, linear, constant]` in $/h with P in MW.
    pub cost: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcRegion {
    pub id: u32,
    pub name: String,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub gens: Vec<Gen>,
    /// Dense index of the angle-reference bus.
    pub slack: usize,
    id_to_idx: HashMap<u32, usize>,
}

impl AcRegion {
    /// Dense index of a bus by its file id.
    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.id_to_idx.get(&id).copied()
    }

    /// Total active / reactive load in per unit.
    pub fn total_load(&self) -> (f64, f64) {
        self.buses
            .iter()
            .fold((0.0, 0.0), |(p, q), b| (p + b.pd, q + b.qd))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcBus {
    pub id: u32,
    pub vmin: f64,
    pub vmax: f64,
    pub reference: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcBranch {
    /// Dense endpoint indices into `Mtdc::buses`.
    pub from: usize,
    pub to: usize,
    pub r: f64,
    /// Conductance `1/r`.
    pub g: f64,
    pub pmax: f64,
}

/// One VSC converter station: the chain
/// `region bus k′ — tie line — PCC k — transformer — filter bus f — phase
/// reactor — converter terminal m`, with the DC side joined at `P_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: u32,
    /// Dense index of the owning AC region.
    pub region: usize,
    /// Dense index (within the region) of the grid-side bus k′.
    pub ac_bus: usize,
    /// Dense index of the DC terminal bus.
    pub dc_bus: usize,
    pub v_ac_min: f64,
    pub v_ac_max: f64,
    /// Series admittances of tie line, transformer, and phase reactor.
    pub tie: (f64, f64),
    pub tf: (f64, f64),
    pub phase: (f64, f64),
    /// Filter shunt susceptance at bus f.
    pub b_filter: f64,
    /// Loss polynomial coefficients (I², I, 1).
    pub a: [f64; 3],
    pub delta: f64,
    pub gamma: f64,
    pub s_nom: f64,
    pub i_max: f64,
    pub v_m_max: f64,
}

impl Station {
    /// Series susceptance of the phase reactor (negative for an inductive
    /// reactor); appears in the converter voltage-modulation limit.
    pub fn b_m(&self) -> f64 {
        self.phase.1
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mtdc {
    pub buses: Vec<DcBus>,
    pub branches: Vec<DcBranch>,
    pub stations: Vec<Station>,
    /// Dense index of the voltage-reference bus (master station).
    pub reference: usize,
}

impl Mtdc {
    pub fn is_empty(&self) -> bool {
        self.buses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub name: String,
    pub description: String,
    pub base_mva: f64,
    pub base_kv: f64,
    /// Loss-term weight in the combined objective.
    pub eta: f64,
    pub regions: Vec<AcRegion>,
    pub mtdc: Mtdc,
}

impl Network {
    /// Dense index of a region by its file id.
    pub fn region_index(&self, id: u32) -> Option<usize> {
        self.regions.iter().position(|r| r.id == id)
    }
}

/// Parse and validate a case file from a string.
pub fn parse_case(text: &str) -> Result<Network, ModelError> {
    let file: CaseFile = toml::from_str(text)?;
    validate(file)
}

/// Read, parse, and validate a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<Network, ModelError> {
    parse_case(&std::fs::read_to_string(path)?)
}

fn validate(file: CaseFile) -> Result<Network, ModelError> {
    if file.schema != SCHEMA_ID {
        return Err(ModelError::Schema { found: file.schema });
    }
    let b = &file.base;
    if !(b.s_mva > 0.0 && b.v_kv > 0.0 && b.eta.is_finite() && b.eta >= 0.0)
        || !b.s_mva.is_finite()
        || !b.v_kv.is_finite()
    {
        return Err(ModelError::BadBase);
    }

    let mut regions = Vec::with_capacity(file.ac_region.len());
    let mut region_ids = HashMap::new();
    for (ri, rf) in file.ac_region.iter().enumerate() {
        if region_ids.insert(rf.id, ri).is_some() {
            return Err(ModelError::DuplicateRegion(rf.id));
        }
        let mut id_to_idx = HashMap::new();
        let mut slack = Vec::new();
        let mut buses = Vec::with_capacity(rf.bus.len());
        for (bi, bf) in rf.bus.iter().enumerate() {
            if id_to_idx.insert(bf.id, bi).is_some() {
                return Err(ModelError::DuplicateBus {
                    region: rf.id,
                    bus: bf.id,
                });
            }
            if !(bf.vmin > 0.0 && bf.vmax >= bf.vmin) || !bf.vmax.is_finite() {
                return Err(ModelError::VoltageWindow {
                    region: rf.id,
                    bus: bf.id,
                });
            }
            if bf.slack {
                slack.push(bi);
            }
            buses.push(Bus {
                id: bf.id,
                vmin: bf.vmin,
                vmax: bf.vmax,
                pd: bf.pd,
                qd: bf.qd,
                gs: bf.gs,
                bs: bf.bs,
            });
        }
        if slack.len() != 1 {
            return Err(ModelError::SlackCount {
                region: rf.id,
                count: slack.len(),
            });
        }

        let mut branches = Vec::with_capacity(rf.branch.len());
        for bf in &rf.branch {
            let from = *id_to_idx.get(&bf.from).ok_or(ModelError::BranchBus {
                region: rf.id,
                bus: bf.from,
            })?;
            let to = *id_to_idx.get(&bf.to).ok_or(ModelError::BranchBus {
                region: rf.id,
                bus: bf.to,
            })?;
            let ok = bf.r >= 0.0
                && bf.x != 0.0
                && bf.x.is_finite()
                && bf.b.is_finite()
                && bf.smax.map_or(true, |s| s > 0.0)
                && from != to;
            if !ok {
                return Err(ModelError::BranchParams {
                    region: rf.id,
                    from: bf.from,
                    to: bf.to,
                });
            }
            let (g, b) = series_admittance(bf.r, bf.x);
            branches.push(Branch {
                from,
                to,
                r: bf.r,
                x: bf.x,
                b_charge: bf.b,
                smax: bf.smax,
                g,
                b,
            });
        }

        let mut gens = Vec::with_capacity(rf.gen.len());
        for gf in &rf.gen {
            let bus = *id_to_idx.get(&gf.bus).ok_or(ModelError::GenBus {
                region: rf.id,
                bus: gf.bus,
            })?;
            if !(gf.pmin <= gf.pmax && gf.qmin <= gf.qmax && gf.cost_quad >= 0.0) {
                return Err(ModelError::GenWindow {
                    region: rf.id,
                    bus: gf.bus,
                });
            }
            gens.push(Gen {
                bus,
                pmin: gf.pmin,
                pmax: gf.pmax,
                qmin: gf.qmin,
                qmax: gf.qmax,
                cost: [gf.cost_quad, gf.cost_lin, gf.cost_const],
            });
        }

        regions.push(AcRegion {
            id: rf.id,
            name: rf.name.clone().unwrap_or_else(|| format!("region{}", rf.id)),
            buses,
            branches,
            gens,
            slack: slack[0],
            id_to_idx,
        });
    }

    let mtdc = match &file.mtdc {
        None => Mtdc::default(),
        Some(mf) => {
            if mf.dc_bus.is_empty() {
                if !mf.dc_branch.is_empty() || !mf.converter.is_empty() {
                    return Err(ModelError::EmptyMtdc);
                }
                Mtdc::default()
            } else {
                let mut id_to_idx = HashMap::new();
                let mut reference = Vec::new();
                let mut buses = Vec::with_capacity(mf.dc_bus.len());
                for (bi, bf) in mf.dc_bus.iter().enumerate() {
                    if id_to_idx.insert(bf.id, bi).is_some() {
                        return Err(ModelError::DuplicateDcBus(bf.id));
                    }
                    if !(bf.vmin > 0.0 && bf.vmax >= bf.vmin) || !bf.vmax.is_finite() {
                        return Err(ModelError::VoltageWindow {
                            region: 0,
                            bus: bf.id,
                        });
                    }
                    if bf.reference {
                        reference.push(bi);
                    }
                    buses.push(DcBus {
                        id: bf.id,
                        vmin: bf.vmin,
                        vmax: bf.vmax,
                        reference: bf.reference,
                    });
                }
                if reference.len() != 1 {
                    return Err(ModelError::DcRefCount(reference.len()));
                }

                let mut branches = Vec::with_capacity(mf.dc_branch.len());
                for bf in &mf.dc_branch {
                    let from = *id_to_idx
                        .get(&bf.from)
                        .ok_or(ModelError::DcBranchBus(bf.from))?;
                    let to = *id_to_idx.get(&bf.to).ok_or(ModelError::DcBranchBus(bf.to))?;
                    if !(bf.r > 0.0 && bf.pmax > 0.0 && from != to) {
                        return Err(ModelError::DcBranchParams {
                            from: bf.from,
                            to: bf.to,
                        });
                    }
                    branches.push(DcBranch {
                        from,
                        to,
                        r: bf.r,
                        g: 1.0 / bf.r,
                        pmax: bf.pmax,
                    });
                }

                let mut stations = Vec::with_capacity(mf.converter.len());
                let mut converter_ids = HashMap::new();
                let mut dc_taken = vec![false; buses.len()];
                for cf in &mf.converter {
                    if converter_ids.insert(cf.id, ()).is_some() {
                        return Err(ModelError::DuplicateConverter(cf.id));
                    }
                    let region =
                        *region_ids
                            .get(&cf.ac_region)
                            .ok_or(ModelError::ConverterRegion {
                                id: cf.id,
                                region: cf.ac_region,
                            })?;
                    let ac_bus =
                        regions[region]
                            .bus_index(cf.ac_bus)
                            .ok_or(ModelError::ConverterAcBus {
                                id: cf.id,
                                region: cf.ac_region,
                                bus: cf.ac_bus,
                            })?;
                    let dc_bus = *id_to_idx.get(&cf.dc_bus).ok_or(ModelError::ConverterDcBus {
                        id: cf.id,
                        bus: cf.dc_bus,
                    })?;
                    if dc_taken[dc_bus] {
                        return Err(ModelError::ConverterDcBusTaken {
                            id: cf.id,
                            bus: cf.dc_bus,
                        });
                    }
                    dc_taken[dc_bus] = true;
                    let ok = cf.v_ac_min > 0.0
                        && cf.v_ac_max >= cf.v_ac_min
                        && cf.tie_x != 0.0
                        && cf.x_tf != 0.0
                        && cf.x_phase != 0.0
                        && cf.tie_r >= 0.0
                        && cf.r_tf >= 0.0
                        && cf.r_phase >= 0.0
                        && cf.s_nom > 0.0
                        && cf.i_max > 0.0
                        && cf.delta > 0.0
                        && cf.gamma >= 0.0
                        && cf.v_m_max > 0.0
                        && [cf.a1, cf.a2, cf.a3].iter().all(|a| a.is_finite() && *a >= 0.0);
                    if !ok {
                        return Err(ModelError::ConverterParams(cf.id));
                    }
                    stations.push(Station {
                        id: cf.id,
                        region,
                        ac_bus,
                        dc_bus,
                        v_ac_min: cf.v_ac_min,
                        v_ac_max: cf.v_ac_max,
                        tie: series_admittance(cf.tie_r, cf.tie_x),
                        tf: series_admittance(cf.r_tf, cf.x_tf),
                        phase: series_admittance(cf.r_phase, cf.x_phase),
                        b_filter: cf.b_filter,
                        a: [cf.a1, cf.a2, cf.a3],
                        delta: cf.delta,
                        gamma: cf.gamma,
                        s_nom: cf.s_nom,
                        i_max: cf.i_max,
                        v_m_max: cf.v_m_max,
                    });
                }

                Mtdc {
                    buses,
                    branches,
                    stations,
                    reference: reference[0],
                }
            }
        }
    };

    Ok(Network {
        name: file.name,
        description: file.description.unwrap_or_default(),
        base_mva: file.base.s_mva,
        base_kv: file.base.v_kv,
        eta: file.base.eta,
        regions,
        mtdc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cases_dir() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases")
    }

    #[test]
    fn case1_loads_with_expected_shape() {
        let net = load_case(cases_dir().join("case1.toml")).unwrap();
        assert_eq!(net.regions.len(), 4);
        assert_relative_eq!(net.eta, 10.0);
        assert_relative_eq!(net.base_mva, 100.0);
        for region in &net.regions {
            assert_eq!(region.buses.len(), 9);
            assert_eq!(region.branches.len(), 9);
            assert_eq!(region.gens.len(), 3);
        }
        let loads: Vec<f64> = net.regions.iter().map(|r| r.total_load().0).collect();
        for (have, want) in loads.iter().zip([3.15, 3.18, 3.21, 3.24]) {
            assert_relative_eq!(*have, want, epsilon = 1e-9);
        }
        assert_eq!(net.mtdc.buses.len(), 4);
        assert_eq!(net.mtdc.branches.len(), 4);
        assert_eq!(net.mtdc.stations.len(), 4);
        assert_eq!(net.mtdc.buses[net.mtdc.reference].id, 3);
        for st in &net.mtdc.stations {
            // Stations sit at bus 2 of their region, one per region/DC bus.
            assert_eq!(net.regions[st.region].buses[st.ac_bus].id, 2);
            assert!(st.b_m() < 0.0, "phase reactor must be inductive");
        }
    }

    #[test]
    fn case2_loads_with_expected_shape() {
        let net = load_case(cases_dir().join("case2.toml")).unwrap();
        assert_eq!(net.regions.len(), 4);
        for region in &net.regions {
            assert_eq!(region.buses.len(), 118);
            assert_eq!(region.branches.len(), 186);
            assert_eq!(region.gens.len(), 54);
        }
        let loads: Vec<f64> = net.regions.iter().map(|r| r.total_load().0).collect();
        for (have, want) in loads.iter().zip([42.42, 46.66, 50.90, 55.15]) {
            assert_relative_eq!(*have, want, epsilon = 1e-9);
        }
        assert_eq!(net.mtdc.stations.len(), 4);
        for st in &net.mtdc.stations {
            assert_eq!(net.regions[st.region].buses[st.ac_bus].id, 8);
        }
    }

    #[test]
    fn parsing_is_deterministic() {
        let text = std::fs::read_to_string(cases_dir().join("case1.toml")).unwrap();
        assert_eq!(parse_case(&text).unwrap(), parse_case(&text).unwrap());
    }

    const MINI: &str = r#"
schema = "acdc-opf-case/1"
name = "mini"
[base]
s_mva = 100.0
v_kv = 345.0
eta = 10.0
[[ac_region]]
id = 1
[[ac_region.bus]]
id = 1
vmin = 0.95
vmax = 1.05
slack = true
[[ac_region.bus]]
id = 2
vmin = 0.95
vmax = 1.05
pd = 0.5
qd = 0.1
[[ac_region.branch]]
from = 1
to = 2
r = 0.01
x = 0.1
[[ac_region.gen]]
bus = 1
pmin = 0.0
pmax = 2.0
qmin = -1.0
qmax = 1.0
cost_quad = 0.1
cost_lin = 5.0
cost_const = 0.0
"#;

    #[test]
    fn minimal_pure_ac_case_parses() {
        let net = parse_case(MINI).unwrap();
        assert!(net.mtdc.is_empty());
        assert_eq!(net.regions[0].slack, 0);
        assert_eq!(net.regions[0].bus_index(2), Some(1));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let wrong_schema = MINI.replace("acdc-opf-case/1", "acdc-opf-case/999");
        assert!(matches!(
            parse_case(&wrong_schema),
            Err(ModelError::Schema { .. })
        ));

        let dup_bus = MINI.replace("id = 2\nvmin", "id = 1\nvmin");
        assert!(matches!(
            parse_case(&dup_bus),
            Err(ModelError::DuplicateBus { .. })
        ));

        let no_slack = MINI.replace("slack = true\n", "");
        assert!(matches!(
            parse_case(&no_slack),
            Err(ModelError::SlackCount { count: 0, .. })
        ));

        let bad_branch = MINI.replace("from = 1\nto = 2", "from = 1\nto = 7");
        assert!(matches!(
            parse_case(&bad_branch),
            Err(ModelError::BranchBus { bus: 7, .. })
        ));

        let bad_gen = MINI.replace("bus = 1\npmin", "bus = 9\npmin");
        assert!(matches!(
            parse_case(&bad_gen),
            Err(ModelError::GenBus { bus: 9, .. })
        ));

        let unknown_field = format!("{MINI}\n[[ac_region.gen]]\nbus = 1\nmystery = 1.0\n");
        assert!(matches!(
            parse_case(&unknown_field),
            Err(ModelError::Parse(_))
        ));
    }

    proptest! {
        /// (r + jx)(g + jb) = 1 for the series admittance of any passive
        /// branch: checks both the real and imaginary identities.
        #[test]
        fn series_admittance_inverts_impedance(
            r in 0.0f64..0.1,
            x in 1e-3f64..0.5,
        ) {
            let (g, b) = series_admittance(r, x);
            prop_assert!((r * g - x * b - 1.0).abs() < 1e-12);
            prop_assert!((r * b + x * g).abs() < 1e-12);
        }
    }
}
