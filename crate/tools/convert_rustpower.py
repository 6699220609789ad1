"""Convert the pandapower-format networks embedded in the `rustpower` crate
(cargo registry cache) into MATPOWER case files: the 39-bus New England
system (JSON, costs included) and the IEEE 118-bus system (CSV, costs
assigned; see fixtures/README)."""

import csv
import glob
import json
import math
import os
import re
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from common import write_case, parse_case, newton_pf, losses_mw

HERE = os.path.dirname(os.path.abspath(__file__))
CASES = os.path.join(HERE, "..", "fixtures", "cases")
SN = 100.0


def find_rustpower():
    hits = glob.glob("/opt/cargo/registry/src/*/rustpower-*")
    if not hits:
        raise SystemExit("rustpower crate sources not found; run `cargo fetch` with rustpower in a manifest")
    return sorted(hits)[-1]


def line_to_branch(row, vn_kv, f_bus, t_bus):
    zb = vn_kv * vn_kv / SN
    length = float(row["length_km"])
    r = float(row["r_ohm_per_km"]) * length / zb
    x = float(row["x_ohm_per_km"]) * length / zb
    b = 2 * math.pi * 60.0 * float(row["c_nf_per_km"]) * 1e-9 * length * zb
    rate = math.sqrt(3) * vn_kv * float(row["max_i_ka"])
    if rate > 5000:
        rate = 0.0  # "unlimited" sentinel currents
    return [f_bus, t_bus, r, x, b, rate, rate, rate, 0, 0, 1, -360, 360]


def trafo_to_branch(row, f_bus, t_bus):
    sn = float(row["sn_mva"])
    vk = float(row["vk_percent"]) / 100.0 * SN / sn
    vkr = float(row["vkr_percent"]) / 100.0 * SN / sn
    x = math.sqrt(max(vk * vk - vkr * vkr, 0.0))
    tap = 1.0
    if row.get("tap_pos") not in (None, "", "nan"):
        pos = float(row["tap_pos"])
        neutral = float(row.get("tap_neutral") or 0.0)
        step = float(row.get("tap_step_percent") or 0.0)
        tap = 1.0 + (pos - neutral) * step / 100.0
        if row.get("tap_side") == "lv" and tap != 0:
            tap = 1.0 / tap
    rate = sn if sn < 5000 else 0.0
    shift = float(row.get("shift_degree") or 0.0)
    return [f_bus, t_bus, vkr, x, 0.0, rate, rate, rate, tap, shift, 1, -360, 360]


def convert_39(root):
    src = open(os.path.join(root, "src", "testcases", "case_ieee39.rs")).read()
    blob = re.search(r'IEEE_39: &str = "(.*)";', src, re.S).group(1)
    blob = blob.encode().decode("unicode_escape")
    net = json.loads(blob)
    nb = len(net["bus"])
    bus = []
    for b in net["bus"]:
        bus.append([b["name"], 1, 0.0, 0.0, 0, 0, 1, 1, 0, b["vn_kv"], 1, b["max_vm_pu"], b["min_vm_pu"]])
    for ld in net["load"]:
        bus[ld["bus"]][2] += ld["p_mw"]
        bus[ld["bus"]][3] += ld["q_mvar"]
    gens = []
    costs = []
    cost_by = {(pc["et"], pc["element"]): pc for pc in net["poly_cost"]}
    for g, row in enumerate(net["gen"]):
        bus[row["bus"]][1] = 2
        gens.append([bus[row["bus"]][0], row["p_mw"], 0, row["max_q_mvar"], row["min_q_mvar"], row["vm_pu"], SN, 1,
                     row["max_p_mw"], row["min_p_mw"]])
        pc = cost_by[("gen", g)]
        costs.append([2, 0, 0, 3, pc["cp2_eur_per_mw2"], pc["cp1_eur_per_mw"], pc["cp0_eur"]])
    for e, row in enumerate(net["ext_grid"]):
        bus[row["bus"]][1] = 3
        gens.append([bus[row["bus"]][0], 0, 0, row["max_q_mvar"], row["min_q_mvar"], row["vm_pu"], SN, 1,
                     row["max_p_mw"], row["min_p_mw"]])
        pc = cost_by[("ext_grid", e)]
        costs.append([2, 0, 0, 3, pc["cp2_eur_per_mw2"], pc["cp1_eur_per_mw"], pc["cp0_eur"]])
    branch = []
    for row in net["line"]:
        vn = bus[row["from_bus"]][9]
        branch.append(line_to_branch(
            {k: row[k] for k in row}, vn, bus[row["from_bus"]][0], bus[row["to_bus"]][0]))
    for row in net["trafo"]:
        branch.append(trafo_to_branch({k: str(v) for k, v in row.items()},
                                      bus[row["hv_bus"]][0], bus[row["lv_bus"]][0]))
    write_case(os.path.join(CASES, "case39.m"), "case39", SN,
               np.array(bus, float), np.array(branch, float), np.array(gens, float), np.array(costs, float),
               comment="39-bus New England system, converted from embedded network data.")
    print(f"case39: {nb} buses, {len(branch)} branches, {len(gens)} gens")


def read_csv(path):
    with open(path) as f:
        return list(csv.DictReader(f))


def convert_118(root):
    d = os.path.join(root, "cases", "IEEE118")
    buses = read_csv(os.path.join(d, "bus.csv"))
    loads = read_csv(os.path.join(d, "load.csv"))
    gens = read_csv(os.path.join(d, "gen.csv"))
    lines = read_csv(os.path.join(d, "line.csv"))
    trafos = read_csv(os.path.join(d, "trafo.csv"))
    shunts = read_csv(os.path.join(d, "shunt.csv"))
    ext = read_csv(os.path.join(d, "ext_grid.csv"))

    bus = []
    for b in buses:
        bus.append([int(b["name"]), 1, 0.0, 0.0, 0.0, 0.0, 1, 1, 0, float(b["vn_kv"]), 1,
                    float(b["max_vm_pu"]), float(b["min_vm_pu"])])
    for ld in loads:
        i = int(ld["bus"])
        bus[i][2] += float(ld["p_mw"])
        bus[i][3] += float(ld["q_mvar"])
    for sh in shunts:
        i = int(sh["bus"])
        bus[i][4] += float(sh["p_mw"])
        bus[i][5] -= float(sh["q_mvar"])  # pandapower shunts: +q consumes

    out_gens = []
    costs = []
    # representative quadratic costs keyed by unit size (data source has none)
    def cost_for(pmax, k):
        tiers = [(0.06, 28.0), (0.035, 22.0), (0.02, 18.0), (0.012, 14.0)]
        c2, c1 = tiers[min(3, int(pmax // 150))]
        return [2, 0, 0, 3, round(c2 * (1 + 0.03 * (k % 5)), 6), round(c1 * (1 + 0.02 * (k % 7)), 4), 0]

    for k, g in enumerate(gens):
        i = int(g["bus"])
        pmax = float(g["max_p_mw"])
        vm = float(g["vm_pu"])
        bus[i][1] = max(bus[i][1], 2)
        out_gens.append([bus[i][0], float(g["p_mw"]), 0, float(g["max_q_mvar"]), float(g["min_q_mvar"]),
                         vm, SN, 1, pmax if pmax > 0 else 100.0, float(g["min_p_mw"])])
        costs.append(cost_for(pmax, k))
    for e in ext:
        i = int(e["bus"])
        bus[i][1] = 3
        out_gens.append([bus[i][0], 0, 0, float(e["max_q_mvar"]), float(e["min_q_mvar"]),
                         float(e["vm_pu"]), SN, 1, float(e["max_p_mw"]), float(e["min_p_mw"])])
        costs.append([2, 0, 0, 3, 0.015, 16.0, 0])

    branch = []
    for row in lines:
        f, t = int(row["from_bus"]), int(row["to_bus"])
        branch.append(line_to_branch(row, bus[f][9], bus[f][0], bus[t][0]))
    for row in trafos:
        f, t = int(row["hv_bus"]), int(row["lv_bus"])
        branch.append(trafo_to_branch(row, bus[f][0], bus[t][0]))

    write_case(os.path.join(CASES, "case118.m"), "case118", SN,
               np.array(bus, float), np.array(branch, float), np.array(out_gens, float), np.array(costs, float),
               comment="118-bus system converted from embedded network data; polynomial costs assigned (see fixtures/README).")
    print(f"case118: {len(bus)} buses, {len(branch)} branches, {len(out_gens)} gens")


def main():
    root = find_rustpower()
    convert_39(root)
    convert_118(root)
    for name in ["case39", "case118"]:
        case = parse_case(os.path.join(CASES, f"{name}.m"))
        V, ok = newton_pf(case)
        print(f"{name}: PF={ok} losses={losses_mw(case, V):.2f} MW vrange=({np.abs(V).min():.4f},{np.abs(V).max():.4f})")


if __name__ == "__main__":
    main()
