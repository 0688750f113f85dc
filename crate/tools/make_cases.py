#!/usr/bin/env python3
"""Regenerate the shipped case files in ../cases from the vendored raw tables.

Raw data provenance (tools/rawdata/):
  case9/   -- MATPOWER IEEE 9-bus case tables (bus/branch/gen/gencost CSVs) as
              redistributed in the `caseformat` 0.2.0 crate archive.
  case118/ -- IEEE 118-bus case tables in pandapower column conventions as
              redistributed in the `rustpower` 0.5.0 crate archive
              (including the standard polynomial generator costs). Line and
              transformer parameters are converted back to per-unit on the
              100 MVA / bus-kV base at 60 Hz; transformers with off-nominal
              taps are folded into exact pi-equivalents (series y/t plus
              complex end shunts), which is lossless here because none of the
              118-bus branches carries a flow limit.

The two scenarios couple four replicas of an AC network through a
four-terminal DC grid with one converter station per region. Regions differ
in load level and generator cost scaling so that power flows from the cheap
regions to the expensive ones. All network quantities are stored in per-unit
on the system base; costs are stored in $ per physical MW.

Usage: python3 tools/make_cases.py
"""

import csv
import math
from pathlib import Path

RAW = Path(__file__).resolve().parent / "rawdata"
OUT = Path(__file__).resolve().parent.parent / "cases"

BASE_MVA = 100.0
BASE_KV = 345.0
ETA = 10.0  # $/MW weight on the system-loss term of the objective
VMIN, VMAX = 0.95, 1.05  # scenario-wide voltage band, AC and DC

# Converter station parameters (per-unit on the system base), shared by all
# four stations in both scenarios.
VSC = {
    "tie_r": 0.0,  # tie-line between the regional connecting bus and the PCC
    "tie_x": 0.01,
    "r_tf": 0.0005,  # transformer between PCC bus and filter bus
    "x_tf": 0.0125,
    "b_filter": 0.2,  # filter shunt susceptance at the filter bus
    "r_phase": 0.00025,  # phase reactor between filter bus and converter bus
    "x_phase": 0.04,
    "a1": 0.011,  # converter loss polynomial a1*I^2 + a2*I + a3
    "a2": 0.003,
    "a3": 0.0043,
    "delta": 1.05,  # modulation factor: V_m <= delta * V_n
    "gamma": 0.5,  # reactive absorption limit: -gamma*s_nom <= Q_m
    "s_nom": 11.0,  # nominal apparent power
    "i_max": 11.0,  # valve current limit
    "v_m_max": 1.05,  # converter AC voltage cap in the reactive upper limit
}

# Four-terminal DC mesh: (from, to, resistance); flow limits per scenario.
DC_BRANCHES = [(1, 2, 0.00042), (1, 3, 0.00174), (2, 4, 0.00175), (3, 4, 0.00159)]
DC_REF_BUS = 3  # master station (region 3) holds 1 p.u.

SCENARIOS = [
    {
        "name": "case1",
        "description": "Four IEEE 9-bus AC regions coupled by a four-terminal VSC-HVDC grid",
        "ac": "case9",
        "connect_bus": 2,
        "loads": [(315.0, 115.0), (318.0, 116.0), (321.0, 117.0), (324.0, 118.0)],
        "cost_ratio": [1.0, 1.3, 1.7, 2.2],
        "dc_pmax": 1.5,
    },
    {
        "name": "case2",
        "description": "Four IEEE 118-bus AC regions coupled by a four-terminal VSC-HVDC grid",
        "ac": "case118",
        "connect_bus": 8,
        "loads": [(4242.0, 1438.0), (4666.0, 1582.0), (5090.0, 1726.0), (5515.0, 1869.0)],
        "cost_ratio": [1.0, 1.3, 1.7, 2.2],
        "dc_pmax": 8.0,
    },
]


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def read_case9():
    """MATPOWER-format tables; everything already in per-unit/MW."""
    buses, branches, gens = {}, [], []
    for r in read_rows(RAW / "case9" / "bus.csv"):
        i = int(r["BUS_I"])
        buses[i] = {
            "pd": float(r["PD"]),
            "qd": float(r["QD"]),
            "gs": float(r["GS"]) / BASE_MVA,
            "bs": float(r["BS"]) / BASE_MVA,
            "slack": int(r["BUS_TYPE"]) == 3,
            "vmin": float(r["VMIN"]),
            "vmax": float(r["VMAX"]),
        }
    for r in read_rows(RAW / "case9" / "branch.csv"):
        rate = float(r["RATE_A"])
        branches.append(
            {
                "from": int(r["F_BUS"]),
                "to": int(r["T_BUS"]),
                "r": float(r["BR_R"]),
                "x": float(r["BR_X"]),
                "b": float(r["BR_B"]),
                "smax": rate / BASE_MVA if rate > 0 else None,
            }
        )
    gen_rows = read_rows(RAW / "case9" / "gen.csv")
    cost_rows = read_rows(RAW / "case9" / "gencost.csv")
    for g, c in zip(gen_rows, cost_rows):
        gens.append(
            {
                "bus": int(g["GEN_BUS"]),
                "pmin": float(g["PMIN"]) / BASE_MVA,
                "pmax": float(g["PMAX"]) / BASE_MVA,
                "qmin": float(g["QMIN"]) / BASE_MVA,
                "qmax": float(g["QMAX"]) / BASE_MVA,
                "cost_quad": float(c["C2"]),
                "cost_lin": float(c["C1"]),
                "cost_const": float(c["C0"]),
            }
        )
    return buses, branches, gens


def read_case118():
    """pandapower-format tables; convert back to per-unit on 100 MVA."""
    f_hz = 60.0
    bus_rows = read_rows(RAW / "case118" / "bus.csv")
    vn = {int(r["index"]): float(r["vn_kv"]) for r in bus_rows}
    # pandapower bus indices are 0-based; shift to 1-based ids.
    buses = {
        int(r["index"]) + 1: {"pd": 0.0, "qd": 0.0, "gs": 0.0, "bs": 0.0, "slack": False}
        for r in bus_rows
    }
    for r in read_rows(RAW / "case118" / "load.csv"):
        b = buses[int(r["bus"]) + 1]
        b["pd"] += float(r["p_mw"])
        b["qd"] += float(r["q_mvar"])
    for r in read_rows(RAW / "case118" / "shunt.csv"):
        b = buses[int(r["bus"]) + 1]
        b["gs"] += float(r["p_mw"]) / BASE_MVA
        b["bs"] -= float(r["q_mvar"]) / BASE_MVA

    branches = []
    for r in read_rows(RAW / "case118" / "line.csv"):
        fb, tb = int(r["from_bus"]), int(r["to_bus"])
        zbase = vn[fb] ** 2 / BASE_MVA
        length = float(r["length_km"])
        smax_mva = math.sqrt(3.0) * vn[fb] * float(r["max_i_ka"])
        branches.append(
            {
                "from": fb + 1,
                "to": tb + 1,
                "r": float(r["r_ohm_per_km"]) * length / zbase,
                "x": float(r["x_ohm_per_km"]) * length / zbase,
                "b": 2.0 * math.pi * f_hz * float(r["c_nf_per_km"]) * 1e-9 * length * zbase,
                # 9900 MVA is the converter's placeholder for "no limit"
                "smax": smax_mva / BASE_MVA if smax_mva < 9899.0 else None,
            }
        )
    for r in read_rows(RAW / "case118" / "trafo.csv"):
        fb, tb = int(r["hv_bus"]) + 1, int(r["lv_bus"]) + 1
        sn = float(r["sn_mva"])
        scale = BASE_MVA / sn
        rr = float(r["vkr_percent"]) / 100.0 * scale
        zz = float(r["vk_percent"]) / 100.0 * scale
        xx = math.sqrt(zz * zz - rr * rr)
        if r["tap_pos"]:
            tap = 1.0 + (float(r["tap_pos"]) - float(r["tap_neutral"])) * float(
                r["tap_step_percent"]
            ) / 100.0
        else:
            tap = 1.0
        # negative i0_percent encodes capacitive charging of kV-interface lines
        b_ch = -float(r["i0_percent"]) / 100.0 * sn / BASE_MVA
        if tap == 1.0:
            branches.append({"from": fb, "to": tb, "r": rr, "x": xx, "b": b_ch, "smax": None})
        else:
            # exact pi-equivalent of the ideal-tap transformer: series y/tap
            # plus complex shunts y*(1-tap)/tap^2 (from side) and
            # y*(tap-1)/tap (to side); lossless because flow is unlimited.
            y = 1.0 / complex(rr, xx)
            ysh_f = (y + 1j * b_ch / 2.0) / tap**2 - y / tap
            ysh_t = (y + 1j * b_ch / 2.0) - y / tap
            branches.append(
                {"from": fb, "to": tb, "r": tap * rr, "x": tap * xx, "b": 0.0, "smax": None}
            )
            buses[fb]["gs"] += ysh_f.real
            buses[fb]["bs"] += ysh_f.imag
            buses[tb]["gs"] += ysh_t.real
            buses[tb]["bs"] += ysh_t.imag

    costs = {}
    for r in read_rows(RAW / "case118" / "poly_cost.csv"):
        costs[(r["et"], int(r["element"]))] = (
            float(r["cp2_eur_per_mw2"]),
            float(r["cp1_eur_per_mw"]),
            float(r["cp0_eur"]),
        )
    gens = []
    for r in read_rows(RAW / "case118" / "gen.csv"):
        cq, cl, cc = costs[("gen", int(r["index"]))]
        gens.append(
            {
                "bus": int(r["bus"]) + 1,
                "pmin": float(r["min_p_mw"]) / BASE_MVA,
                "pmax": float(r["max_p_mw"]) / BASE_MVA,
                "qmin": float(r["min_q_mvar"]) / BASE_MVA,
                "qmax": float(r["max_q_mvar"]) / BASE_MVA,
                "cost_quad": cq,
                "cost_lin": cl,
                "cost_const": cc,
            }
        )
    for r in read_rows(RAW / "case118" / "ext_grid.csv"):
        cq, cl, cc = costs[("ext_grid", int(r["index"]) if "index" in r else 0)]
        sb = int(r["bus"]) + 1
        buses[sb]["slack"] = True
        gens.append(
            {
                "bus": sb,
                "pmin": float(r["min_p_mw"]) / BASE_MVA,
                "pmax": float(r["max_p_mw"]) / BASE_MVA,
                "qmin": float(r["min_q_mvar"]) / BASE_MVA,
                "qmax": float(r["max_q_mvar"]) / BASE_MVA,
                "cost_quad": cq,
                "cost_lin": cl,
                "cost_const": cc,
            }
        )
    gens.sort(key=lambda g: g["bus"])
    return buses, branches, gens


def fnum(v):
    """TOML float literal with full precision."""
    if v == int(v) and abs(v) < 1e15:
        return f"{v:.1f}"
    return repr(v)


def emit_case(scn, buses, branches, gens):
    lines = []
    w = lines.append
    w(f'schema = "acdc-opf-case/1"')
    w(f'name = "{scn["name"]}"')
    w(f'description = "{scn["description"]}"')
    w("")
    w("[base]")
    w(f"s_mva = {fnum(BASE_MVA)}")
    w(f"v_kv = {fnum(BASE_KV)}")
    w(f"eta = {fnum(ETA)}")

    pd_total = sum(b["pd"] for b in buses.values())
    qd_total = sum(b["qd"] for b in buses.values())
    for region, ((pd_mw, qd_mvar), ratio) in enumerate(
        zip(scn["loads"], scn["cost_ratio"]), start=1
    ):
        p_scale = pd_mw / pd_total
        q_scale = qd_mvar / qd_total
        w("")
        w(f"[[ac_region]]")
        w(f"id = {region}")
        w(f'name = "grid{region}"')
        for bid in sorted(buses):
            b = buses[bid]
            w("")
            w(f"[[ac_region.bus]]")
            w(f"id = {bid}")
            w(f"vmin = {fnum(VMIN)}")
            w(f"vmax = {fnum(VMAX)}")
            w(f"pd = {fnum(b['pd'] * p_scale / BASE_MVA)}")
            w(f"qd = {fnum(b['qd'] * q_scale / BASE_MVA)}")
            if b["gs"] != 0.0:
                w(f"gs = {fnum(b['gs'])}")
            if b["bs"] != 0.0:
                w(f"bs = {fnum(b['bs'])}")
            if b["slack"]:
                w(f"slack = true")
        for br in branches:
            w("")
            w(f"[[ac_region.branch]]")
            w(f"from = {br['from']}")
            w(f"to = {br['to']}")
            w(f"r = {fnum(br['r'])}")
            w(f"x = {fnum(br['x'])}")
            if br["b"] != 0.0:
                w(f"b = {fnum(br['b'])}")
            if br["smax"] is not None:
                w(f"smax = {fnum(br['smax'])}")
        for g in gens:
            w("")
            w(f"[[ac_region.gen]]")
            w(f"bus = {g['bus']}")
            w(f"pmin = {fnum(g['pmin'])}")
            w(f"pmax = {fnum(g['pmax'])}")
            w(f"qmin = {fnum(g['qmin'])}")
            w(f"qmax = {fnum(g['qmax'])}")
            # Hybrid scenarios price only the variable part of generation;
            # constant offsets would just shift every comparison metric.
            w(f"cost_quad = {fnum(g['cost_quad'] * ratio)}")
            w(f"cost_lin = {fnum(g['cost_lin'] * ratio)}")
            w("cost_const = 0.0")

    w("")
    w("[mtdc]")
    for i in range(1, 5):
        w("")
        w(f"[[mtdc.dc_bus]]")
        w(f"id = {i}")
        w(f"vmin = {fnum(VMIN)}")
        w(f"vmax = {fnum(VMAX)}")
        if i == DC_REF_BUS:
            w(f"reference = true")
    for fb, tb, rr in DC_BRANCHES:
        w("")
        w(f"[[mtdc.dc_branch]]")
        w(f"from = {fb}")
        w(f"to = {tb}")
        w(f"r = {fnum(rr)}")
        w(f"pmax = {fnum(scn['dc_pmax'])}")
    for i in range(1, 5):
        w("")
        w(f"[[mtdc.converter]]")
        w(f"id = {i}")
        w(f"ac_region = {i}")
        w(f"ac_bus = {scn['connect_bus']}")
        w(f"dc_bus = {i}")
        w(f"v_ac_min = {fnum(VMIN)}")
        w(f"v_ac_max = {fnum(VMAX)}")
        for key in (
            "tie_r",
            "tie_x",
            "r_tf",
            "x_tf",
            "b_filter",
            "r_phase",
            "x_phase",
            "a1",
            "a2",
            "a3",
            "delta",
            "gamma",
            "s_nom",
            "i_max",
            "v_m_max",
        ):
            w(f"{key} = {fnum(VSC[key])}")
    w("")
    return "\n".join(lines)


def emit_plain_case9(buses, branches, gens):
    """Single-region case9 with its native voltage band, loads, and costs —
    a cross-check case whose optimum is widely published."""
    lines = []
    w = lines.append
    w('schema = "acdc-opf-case/1"')
    w('name = "case9"')
    w('description = "Single IEEE 9-bus region with native limits (no DC grid)"')
    w("")
    w("[base]")
    w(f"s_mva = {fnum(BASE_MVA)}")
    w(f"v_kv = {fnum(BASE_KV)}")
    w("eta = 0.0")
    w("")
    w("[[ac_region]]")
    w("id = 1")
    w('name = "grid1"')
    for bid in sorted(buses):
        b = buses[bid]
        w("")
        w("[[ac_region.bus]]")
        w(f"id = {bid}")
        w(f"vmin = {fnum(b['vmin'])}")
        w(f"vmax = {fnum(b['vmax'])}")
        w(f"pd = {fnum(b['pd'] / BASE_MVA)}")
        w(f"qd = {fnum(b['qd'] / BASE_MVA)}")
        if b["gs"] != 0.0:
            w(f"gs = {fnum(b['gs'])}")
        if b["bs"] != 0.0:
            w(f"bs = {fnum(b['bs'])}")
        if b["slack"]:
            w("slack = true")
    for br in branches:
        w("")
        w("[[ac_region.branch]]")
        w(f"from = {br['from']}")
        w(f"to = {br['to']}")
        w(f"r = {fnum(br['r'])}")
        w(f"x = {fnum(br['x'])}")
        if br["b"] != 0.0:
            w(f"b = {fnum(br['b'])}")
        if br["smax"] is not None:
            w(f"smax = {fnum(br['smax'])}")
    for g in gens:
        w("")
        w("[[ac_region.gen]]")
        w(f"bus = {g['bus']}")
        w(f"pmin = {fnum(g['pmin'])}")
        w(f"pmax = {fnum(g['pmax'])}")
        w(f"qmin = {fnum(g['qmin'])}")
        w(f"qmax = {fnum(g['qmax'])}")
        w(f"cost_quad = {fnum(g['cost_quad'])}")
        w(f"cost_lin = {fnum(g['cost_lin'])}")
        w(f"cost_const = {fnum(g['cost_const'])}")
    w("")
    return "\n".join(lines)


def main():
    OUT.mkdir(exist_ok=True)
    nets = {"case9": read_case9(), "case118": read_case118()}
    for scn in SCENARIOS:
        buses, branches, gens = nets[scn["ac"]]
        text = emit_case(scn, buses, branches, gens)
        path = OUT / f"{scn['name']}.toml"
        path.write_text(text)
        print(f"wrote {path} ({len(text)} bytes)")
    text = emit_plain_case9(*nets["case9"])
    path = OUT / "case9.toml"
    path.write_text(text)
    print(f"wrote {path} ({len(text)} bytes)")


if __name__ == "__main__":
    main()
