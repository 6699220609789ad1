"""Generate representative synthetic meshed transmission cases of the sizes
the desk-scale suite calls for but whose published data is not available in
this environment (24, 57 and 300 buses). Ring-plus-chord topologies with
realistic impedance, loading and rating distributions; a subset of branch
ratings is tightened against the solved power flow so thermal limits
genuinely bind in the OPF."""

import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from common import write_case, parse_case, newton_pf, losses_mw, two_port, ybus

HERE = os.path.dirname(os.path.abspath(__file__))
CASES = os.path.join(HERE, "..", "fixtures", "cases")
SN = 100.0


def branch_flows_mva(case, V):
    ids = {int(b[0]): i for i, b in enumerate(case["bus"])}
    out = []
    for br in case["branch"]:
        f, t = ids[int(br[0])], ids[int(br[1])]
        yff, yft, ytf, ytt = two_port(br[2], br[3], br[4], br[8], br[9])
        sf = V[f] * np.conj(yff * V[f] + yft * V[t])
        st = V[t] * np.conj(ytf * V[f] + ytt * V[t])
        out.append(max(abs(sf), abs(st)) * case["baseMVA"])
    return np.array(out)


def synth(name, nb, seed, kv=138.0, chord_frac=0.35, load_frac=0.7, gen_frac=0.22,
          load_mean=35.0, vlim=(0.94, 1.06)):
    rng = np.random.default_rng(seed)
    angles = np.sort(rng.uniform(0, 2 * math.pi, nb))
    radius = rng.uniform(0.7, 1.0, nb)
    xy = np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=1)

    edges = set()
    for i in range(nb):
        edges.add((i, (i + 1) % nb))
    n_chords = int(chord_frac * nb)
    tries = 0
    while len(edges) < nb + n_chords and tries < 50 * nb:
        tries += 1
        i = int(rng.integers(nb))
        d = np.linalg.norm(xy - xy[i], axis=1)
        d[i] = np.inf
        j = int(rng.choice(np.argsort(d)[: max(4, nb // 10)]))
        e = (min(i, j), max(i, j))
        if e not in edges and (e[1], e[0]) not in edges:
            edges.add(e)
    edges = sorted(edges)

    n_load = int(load_frac * nb)
    load_buses = set(rng.choice(np.arange(1, nb), size=n_load, replace=False).tolist())
    n_gen = max(3, int(gen_frac * nb))
    gen_buses = [0] + sorted(rng.choice(np.arange(1, nb), size=n_gen - 1, replace=False).tolist())

    bus = []
    total_load = 0.0
    for i in range(nb):
        pd = qd = 0.0
        if i in load_buses:
            pd = float(rng.gamma(3.0, load_mean / 3.0))
            qd = pd * rng.uniform(0.15, 0.35)
            total_load += pd
        btype = 3 if i == 0 else (2 if i in gen_buses else 1)
        bus.append([i + 1, btype, round(pd, 2), round(qd, 2), 0, 0, 1, 1, 0, kv, 1, vlim[1], vlim[0]])

    gens = []
    costs = []
    cap = 1.7 * total_load / n_gen
    for k, i in enumerate(gen_buses):
        pmax = round(cap * rng.uniform(0.6, 1.6), 1)
        qlim = round(1.0 * pmax, 1)
        vg = round(rng.uniform(1.0, 1.04), 3)
        gens.append([i + 1, round(0.8 * total_load / n_gen, 2), 0, qlim, -qlim, vg, SN, 1, pmax, 0])
        c2 = round(rng.uniform(0.008, 0.07), 5)
        c1 = round(rng.uniform(12.0, 38.0), 3)
        gens.append if False else None
        costs.append([2, 0, 0, 3, c2, c1, 0])

    zb = kv * kv / SN
    branch = []
    for (i, j) in edges:
        length = 25.0 + 120.0 * np.linalg.norm(xy[i] - xy[j])
        x_ohm = length * rng.uniform(0.35, 0.45)
        r_ohm = x_ohm / rng.uniform(3.0, 6.0)
        b_line = length * 3.4e-6 * zb  # ~nF/km charging
        branch.append([i + 1, j + 1, round(r_ohm / zb, 6), round(x_ohm / zb, 6),
                       round(b_line / zb, 6), 0, 0, 0, 0, 0, 1, -360, 360])

    case = {
        "name": name,
        "baseMVA": SN,
        "bus": np.array(bus, float),
        "branch": np.array(branch, float),
        "gen": np.array([g for g in gens], float),
        "gencost": np.array(costs, float),
    }
    # strengthen the grid until the check power flow converges comfortably
    ok = False
    for _ in range(8):
        V, ok = newton_pf(case)
        if ok and np.abs(V).min() > 0.9:
            break
        case["branch"][:, 2] *= 0.7
        case["branch"][:, 3] *= 0.7
    assert ok, f"{name}: synthetic power flow diverged"
    flows = branch_flows_mva(case, V)
    # generous ratings everywhere, tightened on the most loaded fifth
    order = np.argsort(-flows)
    for rank, b in enumerate(order):
        if rank < max(3, len(order) // 20):
            rate = max(1.5 * flows[b], 30.0)
        else:
            rate = max(2.8 * flows[b], 50.0)
        case["branch"][b][5] = case["branch"][b][6] = case["branch"][b][7] = round(rate, 1)

    write_case(os.path.join(CASES, f"{name}.m"), name, SN, case["bus"], case["branch"],
               case["gen"], case["gencost"],
               comment=f"synthetic {nb}-bus meshed test system (see fixtures/README)")
    V, ok = newton_pf(case)
    print(f"{name}: buses={nb} branches={len(branch)} gens={len(gens)} load={total_load:.0f} MW "
          f"PF={ok} losses={losses_mw(case, V):.2f} MW")


def main():
    synth("case24", 24, seed=2024, load_mean=55.0, chord_frac=0.6)
    synth("case57", 57, seed=2057, load_mean=28.0, chord_frac=0.45)
    synth("case300", 300, seed=2300, load_mean=34.0, chord_frac=0.4)


if __name__ == "__main__":
    main()
