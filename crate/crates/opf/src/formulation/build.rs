//! Assembly of OPF problems from a validated [`Network`].
//!
//! Three builders share the same row-emission helpers so that a constraint
//! appearing in several problems (centralized and decomposed) is the *same*
//! expression over different variable ids:
//!
//! * [`build_central`] — one NLP over all AC regions, converter stations,
//!   and the DC grid;
//! * [`build_ac_region`] — one AC region with *copies* of the station PCC
//!   voltage/angle at each tie line (the converter chain itself lives in
//!   the MTDC problem);
//! * [`build_mtdc`] — every station chain plus the DC grid, with copies of
//!   the region-side tie bus voltage/angle.
//!
//! Row and variable names are stable and identical across builders (copies
//! aside), so problems can be related by name lookup.
//!
//! Conventions: nodal balance rows are written `injections − flows = 0`;
//! branch flows use the standard from-side expressions
//! `P = V_i²g − V_iV_j(g·cosθ_ij + b·sinθ_ij)` and
//! `Q = −V_i²(b + b_c/2) + V_iV_j(b·cosθ_ij − g·sinθ_ij)`; apparent-power
//! ratings cap `P² + Q²` measured independently at both ends. The flat
//! start is `V = 1, θ = 0`, all injections zero.

use super::expr::{Expr, Ineq, PairTerm};
use crate::model::{Network, Station};
use crate::nlp::Nlp;

/// Incremental [`Nlp`] assembly.
struct Builder {
    lb: Vec<f64>,
    ub: Vec<f64>,
    x0: Vec<f64>,
    var_names: Vec<String>,
    objective: Expr,
    eq: Vec<Expr>,
    eq_names: Vec<String>,
    ineq: Vec<Ineq>,
    ineq_names: Vec<String>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            lb: Vec::new(),
            ub: Vec::new(),
            x0: Vec::new(),
            var_names: Vec::new(),
            objective: Expr::new(),
            eq: Vec::new(),
            eq_names: Vec::new(),
            ineq: Vec::new(),
            ineq_names: Vec::new(),
        }
    }

    fn var(&mut self, name: String, lb: f64, ub: f64, x0: f64) -> usize {
        let i = self.lb.len();
        self.lb.push(lb);
        self.ub.push(ub);
        self.x0.push(x0);
        self.var_names.push(name);
        i
    }

    fn free(&mut self, name: String, x0: f64) -> usize {
        self.var(name, f64::NEG_INFINITY, f64::INFINITY, x0)
    }

    fn fix(&mut self, name: String, v: f64) -> usize {
        self.var(name, v, v, v)
    }

    fn eq(&mut self, name: String, e: Expr) {
        self.eq.push(e);
        self.eq_names.push(name);
    }

    fn ineq(&mut self, name: String, h: Ineq) {
        self.ineq.push(h);
        self.ineq_names.push(name);
    }

    fn finish(self) -> Nlp {
        let nlp = Nlp {
            n: self.lb.len(),
            lb: self.lb,
            ub: self.ub,
            x0: self.x0,
            objective: self.objective,
            eq: self.eq,
            eq_names: self.eq_names,
            ineq: self.ineq,
            ineq_names: self.ineq_names,
            var_names: self.var_names,
        };
        nlp.assert_consistent();
        nlp
    }
}

/// The optimizer's cost unit is 10²$: power-flow residuals are O(1) in per
/// unit, and carrying cost in plain dollars would make the objective four
/// orders of magnitude stiffer than every constraint row. Reports convert
/// solution costs back to dollars independently of this constant.
pub const OBJ_SCALE: f64 = 1e-2;

/// From-side active-power flow `V_i²g − V_iV_j(g·cos + b·sin)`.
fn flow_p(vi: usize, thi: usize, vj: usize, thj: usize, g: f64, b: f64) -> Expr {
    let mut e = Expr::new();
    e.add_quad(vi, vi, g).add_pair(PairTerm {
        vi,
        thi,
        vj,
        thj,
        a: -g,
        b: -b,
    });
    e
}

/// From-side reactive-power flow `−V_i²(b + b_c/2) + V_iV_j(b·cos − g·sin)`.
fn flow_q(vi: usize, thi: usize, vj: usize, thj: usize, g: f64, b: f64, bc_half: f64) -> Expr {
    let mut e = Expr::new();
    e.add_quad(vi, vi, -(b + bc_half)).add_pair(PairTerm {
        vi,
        thi,
        vj,
        thj,
        a: b,
        b: -g,
    });
    e
}

/// Variable ids of one AC region (bus, then gen order).
#[derive(Debug, Clone)]
pub struct RegionVarIds {
    pub v: Vec<usize>,
    pub th: Vec<usize>,
    pub pg: Vec<usize>,
    pub qg: Vec<usize>,
}

/// Variable ids of one converter station chain.
#[derive(Debug, Clone, Copy)]
pub struct StationVarIds {
    pub vk: usize,
    pub thk: usize,
    pub vf: usize,
    pub thf: usize,
    pub vm: usize,
    pub thm: usize,
    pub pm: usize,
    pub qm: usize,
    pub im: usize,
    pub pn: usize,
}

/// A duplicated boundary pair `(V, θ)` belonging to one station's tie line.
#[derive(Debug, Clone, Copy)]
pub struct StationCopy {
    /// Dense station index in `Network::mtdc::stations`.
    pub station: usize,
    pub v: usize,
    pub th: usize,
}

#[derive(Debug, Clone)]
pub struct CentralLayout {
    pub regions: Vec<RegionVarIds>,
    pub stations: Vec<StationVarIds>,
    pub dc_v: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct AcSubLayout {
    /// Dense region index this subproblem models.
    pub region: usize,
    pub vars: RegionVarIds,
    /// Copies of the station-side tie bus (V_k, θ_k), in global station
    /// order restricted to stations attached to this region.
    pub copies: Vec<StationCopy>,
}

#[derive(Debug, Clone)]
pub struct MtdcSubLayout {
    pub stations: Vec<StationVarIds>,
    pub dc_v: Vec<usize>,
    /// Copies of the region-side tie bus (V_k′, θ_k′), one per station.
    pub copies: Vec<StationCopy>,
}

/// One tie-line endpoint seen from the AC-region side: the (possibly
/// copied) station PCC variables the region's balance rows flow into.
struct TieEnd {
    station: usize,
    vk: usize,
    thk: usize,
}

fn region_vars(b: &mut Builder, net: &Network, ridx: usize) -> RegionVarIds {
    let region = &net.regions[ridx];
    let pre = format!("r{}", region.id);
    let v = region
        .buses
        .iter()
        .map(|bus| b.var(format!("{pre}.V{}", bus.id), bus.vmin, bus.vmax, 1.0))
        .collect();
    let th = region
        .buses
        .iter()
        .enumerate()
        .map(|(i, bus)| {
            if i == region.slack {
                b.fix(format!("{pre}.th{}", bus.id), 0.0)
            } else {
                b.free(format!("{pre}.th{}", bus.id), 0.0)
            }
        })
        .collect();
    let pg = region
        .gens
        .iter()
        .enumerate()
        .map(|(gi, g)| b.var(format!("{pre}.Pg{gi}"), g.pmin, g.pmax, 0.0))
        .collect();
    let qg = region
        .gens
        .iter()
        .enumerate()
        .map(|(gi, g)| b.var(format!("{pre}.Qg{gi}"), g.qmin, g.qmax, 0.0))
        .collect();
    RegionVarIds { v, th, pg, qg }
}

fn station_vars(b: &mut Builder, st: &Station) -> StationVarIds {
    let pre = format!("vsc{}", st.id);
    let vlo = st.v_ac_min;
    let vhi = st.v_ac_max;
    StationVarIds {
        vk: b.var(format!("{pre}.vk"), vlo, vhi, 1.0),
        thk: b.free(format!("{pre}.thk"), 0.0),
        vf: b.var(format!("{pre}.vf"), vlo, vhi, 1.0),
        thf: b.free(format!("{pre}.thf"), 0.0),
        vm: b.var(format!("{pre}.vm"), vlo, vhi.min(st.v_m_max), 1.0),
        thm: b.free(format!("{pre}.thm"), 0.0),
        pm: b.free(format!("{pre}.pm"), 0.0),
        qm: b.free(format!("{pre}.qm"), 0.0),
        im: b.var(format!("{pre}.im"), 0.0, st.i_max, 0.0),
        pn: b.free(format!("{pre}.pn"), 0.0),
    }
}

fn dc_vars(b: &mut Builder, net: &Network) -> Vec<usize> {
    net.mtdc
        .buses
        .iter()
        .enumerate()
        .map(|(i, bus)| {
            if i == net.mtdc.reference {
                b.fix(format!("dc.V{}", bus.id), 1.0)
            } else {
                b.var(format!("dc.V{}", bus.id), bus.vmin, bus.vmax, 1.0)
            }
        })
        .collect()
}

/// Balance rows, branch ratings, and the cost/loss objective of one AC
/// region. `ties` lists the station-side tie endpoints whose flow leaves
/// through the region's PCC buses.
fn region_rows(b: &mut Builder, net: &Network, ridx: usize, ids: &RegionVarIds, ties: &[TieEnd]) {
    let region = &net.regions[ridx];
    let pre = format!("r{}", region.id);
    let base = net.base_mva;

    // Start each bus row from its injections: generation minus load minus
    // shunt absorption.
    let mut p_rows: Vec<Expr> = Vec::with_capacity(region.buses.len());
    let mut q_rows: Vec<Expr> = Vec::with_capacity(region.buses.len());
    for (i, bus) in region.buses.iter().enumerate() {
        let mut p = Expr::new();
        p.add_const(-bus.pd).add_quad(ids.v[i], ids.v[i], -bus.gs);
        p_rows.push(p);
        let mut q = Expr::new();
        q.add_const(-bus.qd).add_quad(ids.v[i], ids.v[i], bus.bs);
        q_rows.push(q);
    }
    for (gi, g) in region.gens.iter().enumerate() {
        p_rows[g.bus].add_lin(ids.pg[gi], 1.0);
        q_rows[g.bus].add_lin(ids.qg[gi], 1.0);
    }

    // Subtract branch flows at both endpoints.
    for br in &region.branches {
        let (f, t) = (br.from, br.to);
        let bc = br.b_charge / 2.0;
        p_rows[f].add_scaled(&flow_p(ids.v[f], ids.th[f], ids.v[t], ids.th[t], br.g, br.b), -1.0);
        q_rows[f].add_scaled(
            &flow_q(ids.v[f], ids.th[f], ids.v[t], ids.th[t], br.g, br.b, bc),
            -1.0,
        );
        p_rows[t].add_scaled(&flow_p(ids.v[t], ids.th[t], ids.v[f], ids.th[f], br.g, br.b), -1.0);
        q_rows[t].add_scaled(
            &flow_q(ids.v[t], ids.th[t], ids.v[f], ids.th[f], br.g, br.b, bc),
            -1.0,
        );
    }

    // Subtract the tie-line flow toward each attached converter station.
    for tie in ties {
        let st = &net.mtdc.stations[tie.station];
        let k = st.ac_bus;
        let (g, bb) = st.tie;
        p_rows[k].add_scaled(&flow_p(ids.v[k], ids.th[k], tie.vk, tie.thk, g, bb), -1.0);
        q_rows[k].add_scaled(&flow_q(ids.v[k], ids.th[k], tie.vk, tie.thk, g, bb, 0.0), -1.0);
    }

    for (i, bus) in region.buses.iter().enumerate() {
        b.eq(format!("{pre}.b{}.P", bus.id), p_rows[i].clone());
        b.eq(format!("{pre}.b{}.Q", bus.id), q_rows[i].clone());
    }

    // Apparent-power ratings, enforced at both ends.
    for (li, br) in region.branches.iter().enumerate() {
        let Some(smax) = br.smax else { continue };
        let (f, t) = (br.from, br.to);
        let bc = br.b_charge / 2.0;
        b.ineq(
            format!("{pre}.l{li}.from"),
            Ineq::sum_squares(
                flow_p(ids.v[f], ids.th[f], ids.v[t], ids.th[t], br.g, br.b),
                flow_q(ids.v[f], ids.th[f], ids.v[t], ids.th[t], br.g, br.b, bc),
                smax,
            ),
        );
        b.ineq(
            format!("{pre}.l{li}.to"),
            Ineq::sum_squares(
                flow_p(ids.v[t], ids.th[t], ids.v[f], ids.th[f], br.g, br.b),
                flow_q(ids.v[t], ids.th[t], ids.v[f], ids.th[f], br.g, br.b, bc),
                smax,
            ),
        );
    }

    // Generation cost (quadratic in physical MW) plus the weighted
    // network-loss term η·Σ(P_G − P_D) in MW. The optimizer carries cost in
    // units of 10²$ (see OBJ_SCALE) so that objective curvature, constraint
    // scales, and the distributed penalty weights stay comparable; reports
    // convert back to dollars.
    for (gi, g) in region.gens.iter().enumerate() {
        b.objective
            .add_quad(ids.pg[gi], ids.pg[gi], OBJ_SCALE * g.cost[0] * base * base)
            .add_lin(ids.pg[gi], OBJ_SCALE * g.cost[1] * base)
            .add_const(OBJ_SCALE * g.cost[2]);
        b.objective
            .add_lin(ids.pg[gi], OBJ_SCALE * net.eta * base);
    }
    let (pd_total, _) = region.total_load();
    b.objective.add_const(-OBJ_SCALE * net.eta * base * pd_total);
}

/// All rows of one converter-station chain. `kp` addresses the region-side
/// tie bus (native in the centralized problem, a copy in the MTDC
/// subproblem); `dc_v` is the station's DC terminal voltage variable.
fn station_rows(
    b: &mut Builder,
    st: &Station,
    ids: StationVarIds,
    kp: (usize, usize),
    dc_v: usize,
) {
    let pre = format!("vsc{}", st.id);
    let (g_tie, b_tie) = st.tie;
    let (g_tf, b_tf) = st.tf;
    let (g_ph, b_ph) = st.phase;
    let (kp_v, kp_th) = kp;

    // PCC bus k: tie flow toward the region plus transformer flow toward f.
    let mut kp_row = Expr::new();
    kp_row
        .add_scaled(&flow_p(ids.vk, ids.thk, kp_v, kp_th, g_tie, b_tie), -1.0)
        .add_scaled(&flow_p(ids.vk, ids.thk, ids.vf, ids.thf, g_tf, b_tf), -1.0);
    b.eq(format!("{pre}.kP"), kp_row);
    let mut kq_row = Expr::new();
    kq_row
        .add_scaled(&flow_q(ids.vk, ids.thk, kp_v, kp_th, g_tie, b_tie, 0.0), -1.0)
        .add_scaled(
            &flow_q(ids.vk, ids.thk, ids.vf, ids.thf, g_tf, b_tf, 0.0),
            -1.0,
        );
    b.eq(format!("{pre}.kQ"), kq_row);

    // Filter bus f: transformer and phase-reactor flows; the filter shunt
    // injects b_f·V_f² of reactive power.
    let mut fp_row = Expr::new();
    fp_row
        .add_scaled(&flow_p(ids.vf, ids.thf, ids.vk, ids.thk, g_tf, b_tf), -1.0)
        .add_scaled(&flow_p(ids.vf, ids.thf, ids.vm, ids.thm, g_ph, b_ph), -1.0);
    b.eq(format!("{pre}.fP"), fp_row);
    let mut fq_row = Expr::new();
    fq_row
        .add_quad(ids.vf, ids.vf, st.b_filter)
        .add_scaled(&flow_q(ids.vf, ids.thf, ids.vk, ids.thk, g_tf, b_tf, 0.0), -1.0)
        .add_scaled(
            &flow_q(ids.vf, ids.thf, ids.vm, ids.thm, g_ph, b_ph, 0.0),
            -1.0,
        );
    b.eq(format!("{pre}.fQ"), fq_row);

    // Converter terminal m: the station injection (P_m, Q_m) feeds the
    // phase reactor toward f.
    let mut mp_row = Expr::new();
    mp_row
        .add_lin(ids.pm, 1.0)
        .add_scaled(&flow_p(ids.vm, ids.thm, ids.vf, ids.thf, g_ph, b_ph), -1.0);
    b.eq(format!("{pre}.mP"), mp_row);
    let mut mq_row = Expr::new();
    mq_row
        .add_lin(ids.qm, 1.0)
        .add_scaled(
            &flow_q(ids.vm, ids.thm, ids.vf, ids.thf, g_ph, b_ph, 0.0),
            -1.0,
        );
    b.eq(format!("{pre}.mQ"), mq_row);

    // AC/DC coupling: conversion losses a₁I² + a₂I + a₃ close the power
    // balance, and the converter current is defined by its squared form
    // I²V_m² = P_m² + Q_m² (smooth everywhere, unlike the square root).
    let mut loss_row = Expr::new();
    loss_row
        .add_lin(ids.pm, 1.0)
        .add_lin(ids.pn, 1.0)
        .add_quad(ids.im, ids.im, st.a[0])
        .add_lin(ids.im, st.a[1])
        .add_const(st.a[2]);
    b.eq(format!("{pre}.loss"), loss_row);
    let mut cur_row = Expr::new();
    cur_row
        .add_sqsq(ids.im, ids.vm, 1.0)
        .add_quad(ids.pm, ids.pm, -1.0)
        .add_quad(ids.qm, ids.qm, -1.0);
    b.eq(format!("{pre}.cur"), cur_row);

    // Operating envelope: voltage modulation, apparent-power rating,
    // under-excitation floor, and the reactive capability tied to the
    // phase-reactor susceptance (b_m < 0).
    let mut vmod = Expr::new();
    vmod.add_lin(ids.vm, 1.0).add_lin(dc_v, -st.delta);
    b.ineq(format!("{pre}.vmod"), Ineq::Expr(vmod));

    let mut smax = Expr::new();
    smax.add_quad(ids.pm, ids.pm, 1.0)
        .add_quad(ids.qm, ids.qm, 1.0)
        .add_quad(ids.vm, ids.vm, -st.i_max * st.i_max);
    b.ineq(format!("{pre}.smax"), Ineq::Expr(smax));

    let mut qmin = Expr::new();
    qmin.add_lin(ids.qm, -1.0).add_const(-st.gamma * st.s_nom);
    b.ineq(format!("{pre}.qmin"), Ineq::Expr(qmin));

    let b_m = st.b_m();
    let mut qmax = Expr::new();
    qmax.add_lin(ids.qm, 1.0)
        .add_const(b_m * st.v_m_max * st.v_m_max)
        .add_lin(ids.vf, -b_m * st.v_m_max);
    b.ineq(format!("{pre}.qmax"), Ineq::Expr(qmax));
}

/// DC-grid balance rows and branch transfer limits. `pn_at[i]` is the
/// converter injection variable at DC bus `i`, if that bus has a station.
fn dc_rows(b: &mut Builder, net: &Network, dc_v: &[usize], pn_at: &[Option<usize>]) {
    let mtdc = &net.mtdc;
    let mut rows: Vec<Expr> = mtdc
        .buses
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let mut e = Expr::new();
            if let Some(pn) = pn_at[i] {
                e.add_lin(pn, 1.0);
            }
            e
        })
        .collect();
    // DC branch flow from i to j is g·(V_i² − V_i·V_j); subtract at both
    // ends (a constant-angle pair term expresses V_i·V_j).
    for br in &mtdc.branches {
        let (f, t) = (br.from, br.to);
        for (a, o) in [(f, t), (t, f)] {
            rows[a].add_quad(dc_v[a], dc_v[a], -br.g);
            rows[a].add_pair(PairTerm {
                vi: dc_v[a],
                thi: dc_v[a],
                vj: dc_v[o],
                thj: dc_v[a],
                a: br.g,
                b: 0.0,
            });
        }
    }
    for (i, bus) in mtdc.buses.iter().enumerate() {
        b.eq(format!("dc.b{}.bal", bus.id), std::mem::take(&mut rows[i]));
    }

    for (li, br) in mtdc.branches.iter().enumerate() {
        let (f, t) = (br.from, br.to);
        for (end, a, o) in [("from", f, t), ("to", t, f)] {
            let mut e = Expr::new();
            e.add_quad(dc_v[a], dc_v[a], br.g)
                .add_pair(PairTerm {
                    vi: dc_v[a],
                    thi: dc_v[a],
                    vj: dc_v[o],
                    thj: dc_v[a],
                    a: -br.g,
                    b: 0.0,
                })
                .add_const(-br.pmax);
            b.ineq(format!("dc.l{li}.{end}"), Ineq::Expr(e));
        }
    }
}

/// Map each DC bus to the `pn` variable of its converter, if any.
fn pn_by_dc_bus(net: &Network, stations: &[StationVarIds]) -> Vec<Option<usize>> {
    let mut pn_at = vec![None; net.mtdc.buses.len()];
    for (s, st) in net.mtdc.stations.iter().enumerate() {
        pn_at[st.dc_bus] = Some(stations[s].pn);
    }
    pn_at
}

/// Build the full problem: all regions, stations, and the DC grid in one
/// NLP without duplicated variables.
pub fn build_central(net: &Network) -> (Nlp, CentralLayout) {
    let mut b = Builder::new();
    let regions: Vec<RegionVarIds> = (0..net.regions.len())
        .map(|r| region_vars(&mut b, net, r))
        .collect();
    let stations: Vec<StationVarIds> = net
        .mtdc
        .stations
        .iter()
        .map(|st| station_vars(&mut b, st))
        .collect();
    let dc_v = dc_vars(&mut b, net);

    for r in 0..net.regions.len() {
        let ties: Vec<TieEnd> = net
            .mtdc
            .stations
            .iter()
            .enumerate()
            .filter(|(_, st)| st.region == r)
            .map(|(s, _)| TieEnd {
                station: s,
                vk: stations[s].vk,
                thk: stations[s].thk,
            })
            .collect();
        region_rows(&mut b, net, r, &regions[r], &ties);
    }
    for (s, st) in net.mtdc.stations.iter().enumerate() {
        let ids = &regions[st.region];
        let kp = (ids.v[st.ac_bus], ids.th[st.ac_bus]);
        station_rows(&mut b, st, stations[s], kp, dc_v[st.dc_bus]);
    }
    if !net.mtdc.is_empty() {
        let pn_at = pn_by_dc_bus(net, &stations);
        dc_rows(&mut b, net, &dc_v, &pn_at);
    }

    (
        b.finish(),
        CentralLayout {
            regions,
            stations,
            dc_v,
        },
    )
}

/// Build the subproblem of AC region `ridx`: its own grid plus copies of
/// each attached station's PCC voltage/angle, through which the tie-line
/// flow leaves the region.
pub fn build_ac_region(net: &Network, ridx: usize) -> (Nlp, AcSubLayout) {
    let mut b = Builder::new();
    let vars = region_vars(&mut b, net, ridx);
    let rid = net.regions[ridx].id;
    let mut copies = Vec::new();
    for (s, st) in net.mtdc.stations.iter().enumerate() {
        if st.region != ridx {
            continue;
        }
        let v = b.var(
            format!("r{rid}.cp.vsc{}.vk", st.id),
            st.v_ac_min,
            st.v_ac_max,
            1.0,
        );
        let th = b.free(format!("r{rid}.cp.vsc{}.thk", st.id), 0.0);
        copies.push(StationCopy { station: s, v, th });
    }
    let ties: Vec<TieEnd> = copies
        .iter()
        .map(|c| TieEnd {
            station: c.station,
            vk: c.v,
            thk: c.th,
        })
        .collect();
    region_rows(&mut b, net, ridx, &vars, &ties);
    (
        b.finish(),
        AcSubLayout {
            region: ridx,
            vars,
            copies,
        },
    )
}

/// Build the MTDC subproblem: all converter chains and the DC grid, with
/// copies of each region-side tie bus.
pub fn build_mtdc(net: &Network) -> (Nlp, MtdcSubLayout) {
    let mut b = Builder::new();
    let stations: Vec<StationVarIds> = net
        .mtdc
        .stations
        .iter()
        .map(|st| station_vars(&mut b, st))
        .collect();
    let dc_v = dc_vars(&mut b, net);
    let mut copies = Vec::new();
    for (s, st) in net.mtdc.stations.iter().enumerate() {
        let bus = &net.regions[st.region].buses[st.ac_bus];
        let v = b.var(
            format!("dc.cp.vsc{}.vkp", st.id),
            bus.vmin,
            bus.vmax,
            1.0,
        );
        let th = b.free(format!("dc.cp.vsc{}.thkp", st.id), 0.0);
        copies.push(StationCopy { station: s, v, th });
    }
    for (s, st) in net.mtdc.stations.iter().enumerate() {
        let kp = (copies[s].v, copies[s].th);
        station_rows(&mut b, st, stations[s], kp, dc_v[st.dc_bus]);
    }
    let pn_at = pn_by_dc_bus(net, &stations);
    dc_rows(&mut b, net, &dc_v, &pn_at);
    (
        b.finish(),
        MtdcSubLayout {
            stations,
            dc_v,
            copies,
        },
    )
}
