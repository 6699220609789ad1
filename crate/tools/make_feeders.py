"""Generate the radial distribution fixtures (33-, 69- and 119-node feeders).

The 33- and 69-node feeders use the widely tabulated data (impedances in ohm
on a 12.66 kV base, loads in kW); tie switches are included as out-of-service
rows. The 119-node feeder follows the published system's structure (three
main trunks off an 11 kV substation, 22,709.7 kW total load) with
representative section impedances tuned so the flat-voltage feeder losses
match the published landmark (~1298 kW).

The substation cost coefficient c1 of each feeder is read from
calibration.json when present (written by calibrate_feeders.py).
"""

import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from common import write_case, parse_case, newton_pf, losses_mw

HERE = os.path.dirname(os.path.abspath(__file__))
CASES = os.path.join(HERE, "..", "fixtures", "cases")

# (from, to, R ohm, X ohm, P_kW at to, Q_kvar at to); 12.66 kV
FEEDER33 = [
    (1, 2, 0.0922, 0.0470, 100, 60),
    (2, 3, 0.4930, 0.2511, 90, 40),
    (3, 4, 0.3660, 0.1864, 120, 80),
    (4, 5, 0.3811, 0.1941, 60, 30),
    (5, 6, 0.8190, 0.7070, 60, 20),
    (6, 7, 0.1872, 0.6188, 200, 100),
    (7, 8, 0.7114, 0.2351, 200, 100),
    (8, 9, 1.0300, 0.7400, 60, 20),
    (9, 10, 1.0440, 0.7400, 60, 20),
    (10, 11, 0.1966, 0.0650, 45, 30),
    (11, 12, 0.3744, 0.1238, 60, 35),
    (12, 13, 1.4680, 1.1550, 60, 35),
    (13, 14, 0.5416, 0.7129, 120, 80),
    (14, 15, 0.5910, 0.5260, 60, 10),
    (15, 16, 0.7463, 0.5450, 60, 20),
    (16, 17, 1.2890, 1.7210, 60, 20),
    (17, 18, 0.7320, 0.5740, 90, 40),
    (2, 19, 0.1640, 0.1565, 90, 40),
    (19, 20, 1.5042, 1.3554, 90, 40),
    (20, 21, 0.4095, 0.4784, 90, 40),
    (21, 22, 0.7089, 0.9373, 90, 40),
    (3, 23, 0.4512, 0.3083, 90, 50),
    (23, 24, 0.8980, 0.7091, 420, 200),
    (24, 25, 0.8960, 0.7011, 420, 200),
    (6, 26, 0.2030, 0.1034, 60, 25),
    (26, 27, 0.2842, 0.1447, 60, 25),
    (27, 28, 1.0590, 0.9337, 60, 20),
    (28, 29, 0.8042, 0.7006, 120, 70),
    (29, 30, 0.5075, 0.2585, 200, 600),
    (30, 31, 0.9744, 0.9630, 150, 70),
    (31, 32, 0.3105, 0.3619, 210, 100),
    (32, 33, 0.3410, 0.5302, 60, 40),
]
TIES33 = [(8, 21, 2.0, 2.0), (9, 15, 2.0, 2.0), (12, 22, 2.0, 2.0), (18, 33, 0.5, 0.5), (25, 29, 0.5, 0.5)]

FEEDER69 = [
    (1, 2, 0.0005, 0.0012, 0, 0),
    (2, 3, 0.0005, 0.0012, 0, 0),
    (3, 4, 0.0015, 0.0036, 0, 0),
    (4, 5, 0.0251, 0.0294, 0, 0),
    (5, 6, 0.3660, 0.1864, 2.6, 2.2),
    (6, 7, 0.3811, 0.1941, 40.4, 30),
    (7, 8, 0.0922, 0.0470, 75, 54),
    (8, 9, 0.0493, 0.0251, 30, 22),
    (9, 10, 0.8190, 0.2707, 28, 19),
    (10, 11, 0.1872, 0.0619, 145, 104),
    (11, 12, 0.7114, 0.2351, 145, 104),
    (12, 13, 1.0300, 0.3400, 8, 5),
    (13, 14, 1.0440, 0.3450, 8, 5.5),
    (14, 15, 1.0580, 0.3496, 0, 0),
    (15, 16, 0.1966, 0.0650, 45.5, 30),
    (16, 17, 0.3744, 0.1238, 60, 35),
    (17, 18, 0.0047, 0.0016, 60, 35),
    (18, 19, 0.3276, 0.1083, 0, 0),
    (19, 20, 0.2106, 0.0690, 1, 0.6),
    (20, 21, 0.3416, 0.1129, 114, 81),
    (21, 22, 0.0140, 0.0046, 5, 3.5),
    (22, 23, 0.1591, 0.0526, 0, 0),
    (23, 24, 0.3463, 0.1145, 28, 20),
    (24, 25, 0.7488, 0.2475, 0, 0),
    (25, 26, 0.3089, 0.1021, 14, 10),
    (26, 27, 0.1732, 0.0572, 14, 10),
    (3, 28, 0.0044, 0.0108, 26, 18.6),
    (28, 29, 0.0640, 0.1565, 26, 18.6),
    (29, 30, 0.3978, 0.1315, 0, 0),
    (30, 31, 0.0702, 0.0232, 0, 0),
    (31, 32, 0.3510, 0.1160, 0, 0),
    (32, 33, 0.8390, 0.2816, 14, 10),
    (33, 34, 1.7080, 0.5646, 19.5, 14),
    (34, 35, 1.4740, 0.4873, 6, 4),
    (3, 36, 0.0044, 0.0108, 26, 18.55),
    (36, 37, 0.0640, 0.1565, 26, 18.55),
    (37, 38, 0.1053, 0.1230, 0, 0),
    (38, 39, 0.0304, 0.0355, 24, 17),
    (39, 40, 0.0018, 0.0021, 24, 17),
    (40, 41, 0.7283, 0.8509, 1.2, 1),
    (41, 42, 0.3100, 0.3623, 0, 0),
    (42, 43, 0.0410, 0.0478, 6, 4.3),
    (43, 44, 0.0092, 0.0116, 0, 0),
    (44, 45, 0.1089, 0.1373, 39.22, 26.3),
    (45, 46, 0.0009, 0.0012, 39.22, 26.3),
    (4, 47, 0.0034, 0.0084, 0, 0),
    (47, 48, 0.0851, 0.2083, 79, 56.4),
    (48, 49, 0.2898, 0.7091, 384.7, 274.5),
    (49, 50, 0.0822, 0.2011, 384.7, 274.5),
    (8, 51, 0.0928, 0.0473, 40.5, 28.3),
    (51, 52, 0.3319, 0.1114, 3.6, 2.7),
    (9, 53, 0.1740, 0.0886, 4.35, 3.5),
    (53, 54, 0.2030, 0.1034, 26.4, 19),
    (54, 55, 0.2842, 0.1447, 24, 17.2),
    (55, 56, 0.2813, 0.1433, 0, 0),
    (56, 57, 1.5900, 0.5337, 0, 0),
    (57, 58, 0.7837, 0.2630, 0, 0),
    (58, 59, 0.3042, 0.1006, 100, 72),
    (59, 60, 0.3861, 0.1172, 0, 0),
    (60, 61, 0.5075, 0.2585, 1244, 888),
    (61, 62, 0.0974, 0.0496, 32, 23),
    (62, 63, 0.1450, 0.0738, 0, 0),
    (63, 64, 0.7105, 0.3619, 227, 162),
    (64, 65, 1.0410, 0.5302, 59, 42),
    (11, 66, 0.2012, 0.0611, 18, 13),
    (66, 67, 0.0047, 0.0014, 18, 13),
    (12, 68, 0.7394, 0.2444, 28, 20),
    (68, 69, 0.0047, 0.0016, 28, 20),
]
TIES69 = [(11, 43, 0.5, 0.5), (13, 21, 0.5, 0.5), (15, 46, 1.0, 1.0), (50, 59, 2.0, 2.0), (27, 65, 1.0, 1.0)]


def feeder119():
    """119-node feeder: three trunks off the substation, representative
    section data, loads totaling 22,709.7 kW."""
    rng = np.random.default_rng(119)
    sections = []
    loads = {}
    nid = 1  # substation
    next_bus = 2
    trunk_specs = [
        (40, (0.05, 0.18), (0.10, 0.30)),  # long trunk, heavier conductors
        (42, (0.08, 0.25), (0.12, 0.32)),
        (36, (0.06, 0.22), (0.11, 0.30)),
    ]
    for length, r_rng, x_rng in trunk_specs:
        parent = 1
        trunk = []
        for _ in range(length):
            bus = next_bus
            next_bus += 1
            r = rng.uniform(*r_rng)
            x = rng.uniform(*x_rng)
            sections.append((parent, bus, r, x))
            trunk.append(bus)
            # occasional short lateral re-rooting
            parent = bus if rng.random() > 0.25 else int(rng.choice(trunk))
        for bus in trunk:
            loads[bus] = (rng.uniform(40.0, 420.0), None)
    # a few heavy spot loads like the published feeder
    heavy = rng.choice(sorted(loads), size=6, replace=False)
    for b in heavy:
        loads[b] = (rng.uniform(600.0, 1400.0), None)
    total = sum(p for p, _ in loads.values())
    scale = 22709.7 / total
    rows = []
    for b, (p, _) in loads.items():
        p *= scale
        loads[b] = (p, 0.72 * p)  # uniform power factor ~0.81
    return sections, loads


def build_feeder(name, kv, sections, loads, ties, c1, vmax=1.1, vmin=0.9):
    base = 100.0
    zbase = kv * kv / base
    buses = sorted({b for s in sections for b in s[:2]})
    nb = len(buses)
    bus = []
    for b in buses:
        p, q = loads.get(b, (0.0, 0.0))
        btype = 3 if b == 1 else 1
        bus.append([b, btype, p / 1000.0, q / 1000.0, 0, 0, 1, 1, 0, kv, 1, vmax if b != 1 else vmax, vmin])
    branch = []
    for (f, t, r, x) in [s[:4] for s in sections]:
        branch.append([f, t, r / zbase, x / zbase, 0, 0, 0, 0, 0, 0, 1, -360, 360])
    for (f, t, r, x) in ties:
        branch.append([f, t, r / zbase, x / zbase, 0, 0, 0, 0, 0, 0, 0, -360, 360])
    total_p = sum(p for p, _ in loads.values()) / 1000.0
    gen = [[1, 0, 0, total_p * 2, -total_p * 2, 1, 100, 1, total_p * 2, 0]]
    gencost = [[2, 0, 0, 3, 0, c1, 0]]
    write_case(
        os.path.join(CASES, f"{name}.m"),
        name,
        base,
        np.array(bus),
        np.array(branch),
        np.array(gen),
        np.array(gencost),
        comment=f"{nb}-node radial feeder ({kv} kV); tie switches out of service.",
    )


def main():
    cal_path = os.path.join(HERE, "calibration.json")
    cal = json.load(open(cal_path)) if os.path.exists(cal_path) else {}
    c33 = cal.get("case33", 100.0)
    c69 = cal.get("case69", 100.0)
    c119 = cal.get("case119", 100.0)

    build_feeder(
        "case33",
        12.66,
        [(f, t, r, x) for (f, t, r, x, p, q) in FEEDER33],
        {t: (p, q) for (f, t, r, x, p, q) in FEEDER33},
        TIES33,
        c33,
    )
    build_feeder(
        "case69",
        12.66,
        [(f, t, r, x) for (f, t, r, x, p, q) in FEEDER69],
        {t: (p, q) for (f, t, r, x, p, q) in FEEDER69},
        TIES69,
        c69,
    )
    sections, loads = feeder119()
    # tune section impedances to the published flat-start loss landmark
    target_mw = 1.298
    for _ in range(4):
        build_feeder("case119", 11.0, sections, loads, [], c119)
        case = parse_case(os.path.join(CASES, "case119.m"))
        V, ok = newton_pf(case)
        assert ok
        scale = target_mw / losses_mw(case, V)
        if abs(scale - 1.0) < 1e-3:
            break
        sections = [(f, t, r * scale, x * scale) for (f, t, r, x) in sections]

    for name, want in [("case33", None), ("case69", None), ("case119", None)]:
        case = parse_case(os.path.join(CASES, f"{name}.m"))
        V, ok = newton_pf(case)
        print(f"{name}: buses={case['bus'].shape[0]} PF={ok} flat-start losses={losses_mw(case, V):.2f} MW "
              f"vmin={np.abs(V).min():.4f}")


if __name__ == "__main__":
    main()
