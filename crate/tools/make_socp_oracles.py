"""One-time cone-relaxation reference objectives, used to bound the
relaxation driver's outer approximation from above.

Solves, per case, the convex relaxation in the lifted (w, wr, wi) variables
with exact quadratic costs and exact cone/disk constraints, mirroring the
solver's formulation (same wr/wi variable boxes and tan-bound rows, no angle
variables). Appends `socp_objective` to the existing oracle fixture.

Run:  python3 tools/make_socp_oracles.py [case ...]
"""

import json
import os
import sys

import cvxpy as cp
import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from common import parse_case, two_port

HERE = os.path.dirname(os.path.abspath(__file__))
CASES = os.path.join(HERE, "..", "fixtures", "cases")
ORACLES = os.path.join(HERE, "..", "fixtures", "oracles")

DEFAULT_ANGLE = np.pi / 3


def socp_objective(name):
    case = parse_case(os.path.join(CASES, f"{name}.m"))
    base = case["baseMVA"]
    bus = case["bus"]
    nb = bus.shape[0]
    ids = {int(b[0]): i for i, b in enumerate(bus)}

    branches = []
    for br in case["branch"]:
        if br[10] == 0:
            continue
        f, t = ids[int(br[0])], ids[int(br[1])]
        yff, yft, ytf, ytt = two_port(br[2], br[3], br[4], br[8], br[9])
        lo, hi = np.deg2rad(br[11]), np.deg2rad(br[12])
        if (br[11] == 0 and br[12] == 0) or br[11] <= -180 or br[12] >= 180:
            lo, hi = -DEFAULT_ANGLE, DEFAULT_ANGLE
        branches.append((f, t, yff, yft, ytf, ytt, br[5] / base, lo, hi))
    nl = len(branches)

    gens = [g for g in case["gen"] if g[7] > 0]
    ng = len(gens)
    gbus = [ids[int(g[0])] for g in gens]
    cost = []
    for gi, g in enumerate(case["gen"]):
        if g[7] <= 0:
            continue
        row = case["gencost"][gi]
        n = int(row[3])
        c = [0.0] * (3 - n) + list(row[4:4 + n])
        cost.append((c[0] * base * base, c[1] * base, c[2]))

    w = cp.Variable(nb)
    wr = cp.Variable(nl)
    wi = cp.Variable(nl)
    pg = cp.Variable(ng)
    qg = cp.Variable(ng)
    pf = cp.Variable(nl)
    qf = cp.Variable(nl)
    pt = cp.Variable(nl)
    qt = cp.Variable(nl)

    cons = [w >= bus[:, 12] ** 2, w <= bus[:, 11] ** 2]
    cons += [pg >= np.array([g[9] for g in gens]) / base, pg <= np.array([g[8] for g in gens]) / base]
    cons += [qg >= np.array([g[4] for g in gens]) / base, qg <= np.array([g[3] for g in gens]) / base]

    for b, (f, t, yff, yft, ytf, ytt, smax, lo, hi) in enumerate(branches):
        vmin_f, vmax_f = bus[f, 12], bus[f, 11]
        vmin_t, vmax_t = bus[t, 12], bus[t, 11]
        cmin = min(np.cos(lo), np.cos(hi))
        cmax = 1.0 if lo <= 0 <= hi else max(np.cos(lo), np.cos(hi))
        cons += [wr[b] >= vmin_f * vmin_t * cmin, wr[b] <= vmax_f * vmax_t * cmax]
        slo, shi = np.sin(lo), np.sin(hi)
        wlo = vmax_f * vmax_t * slo if slo < 0 else vmin_f * vmin_t * slo
        whi = vmax_f * vmax_t * shi if shi > 0 else vmin_f * vmin_t * shi
        cons += [wi[b] >= wlo, wi[b] <= whi]
        # flow definitions from the conjugated two-port
        gc_f, bc_f = yff.real, -yff.imag
        g_f, b_f = -np.conj(yft).real, -np.conj(yft).imag
        gc_r, bc_r = ytt.real, -ytt.imag
        g_r, b_r = -np.conj(ytf).real, -np.conj(ytf).imag
        cons += [pf[b] == gc_f * w[f] - g_f * wr[b] + b_f * wi[b]]
        cons += [qf[b] == bc_f * w[f] - b_f * wr[b] - g_f * wi[b]]
        cons += [pt[b] == gc_r * w[t] - g_r * wr[b] - b_r * wi[b]]
        cons += [qt[b] == bc_r * w[t] - b_r * wr[b] + g_r * wi[b]]
        # relaxed cone and tan rows
        cons += [cp.quad_over_lin(cp.vstack([wr[b], wi[b]]), w[t]) <= w[f]]
        cons += [wi[b] <= np.tan(hi) * wr[b], wi[b] >= np.tan(lo) * wr[b]]
        if smax > 0:
            cons += [cp.norm(cp.vstack([pf[b], qf[b]])) <= smax]
            cons += [cp.norm(cp.vstack([pt[b], qt[b]])) <= smax]

    for i in range(nb):
        inj_p = 0
        inj_q = 0
        for g, gb in enumerate(gbus):
            if gb == i:
                inj_p = inj_p + pg[g]
                inj_q = inj_q + qg[g]
        flows_p = []
        flows_q = []
        for b, (f, t, *_rest) in enumerate(branches):
            if f == i:
                flows_p.append(pf[b])
                flows_q.append(qf[b])
            if t == i:
                flows_p.append(pt[b])
                flows_q.append(qt[b])
        fp = cp.sum(cp.hstack(flows_p)) if flows_p else 0
        fq = cp.sum(cp.hstack(flows_q)) if flows_q else 0
        gsh, bsh = bus[i, 4] / base, bus[i, 5] / base
        cons += [inj_p - bus[i, 2] / base == fp + gsh * w[i]]
        cons += [inj_q - bus[i, 3] / base == fq - bsh * w[i]]

    obj = 0
    for g in range(ng):
        c2, c1, c0 = cost[g]
        obj = obj + c1 * pg[g] + c0
        if c2 > 0:
            obj = obj + c2 * cp.square(pg[g])
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.status, prob.value


ALL = ["case5", "case6ww", "case9", "case14", "case24", "case30", "case39",
       "case57", "case33", "case69", "case119"]

if __name__ == "__main__":
    names = sys.argv[1:] or ALL
    for n in names:
        status, value = socp_objective(n)
        path = os.path.join(ORACLES, f"{n}.json")
        data = json.load(open(path)) if os.path.exists(path) else {"case": n}
        data["socp_objective"] = float(value)
        with open(path, "w") as f:
            json.dump(data, f, indent=1)
        print(f"{n}: socp status={status} objective={value:.4f}")
