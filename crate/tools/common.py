"""Shared helpers for fixture generation: case parsing/writing, two-port
branch admittances and a Newton-Raphson power flow for sanity checks."""

import re
import numpy as np

BUS_COLS = "BUS_I TYPE PD QD GS BS AREA VM VA BASE_KV ZONE VMAX VMIN".split()
BR_COLS = "F_BUS T_BUS R X B RATE_A RATE_B RATE_C TAP SHIFT STATUS ANGMIN ANGMAX".split()
GEN_COLS = "BUS PG QG QMAX QMIN VG MBASE STATUS PMAX PMIN".split()


def parse_case(path):
    text = open(path).read()
    text = re.sub(r"%.*", "", text)
    case = {"name": re.search(r"function\s+mpc\s*=\s*(\w+)", text).group(1)}
    case["baseMVA"] = float(re.search(r"mpc\.baseMVA\s*=\s*([0-9.eE+-]+)\s*;", text).group(1))
    for field in ["bus", "branch", "gen", "gencost"]:
        m = re.search(r"mpc\.%s\s*=\s*\[(.*?)\];" % field, text, re.S)
        rows = []
        for line in m.group(1).replace(";", "\n").split("\n"):
            line = line.strip()
            if line:
                rows.append([float(t) for t in line.split()])
        case[field] = np.array(rows)
    return case


def write_case(path, name, base, bus, branch, gen, gencost, comment=""):
    def fmt_row(row):
        out = []
        for v in row:
            if v == int(v) and abs(v) < 1e15:
                out.append(str(int(v)))
            else:
                out.append(repr(round(float(v), 10)))
        return "\t" + "\t".join(out) + ";"

    with open(path, "w") as f:
        f.write(f"function mpc = {name}\n")
        if comment:
            f.write(f"% {comment}\n")
        f.write("mpc.version = '2';\n")
        f.write(f"mpc.baseMVA = {base};\n\n")
        for field, mat in [("bus", bus), ("branch", branch), ("gen", gen), ("gencost", gencost)]:
            f.write(f"mpc.{field} = [\n")
            for row in mat:
                f.write(fmt_row(row) + "\n")
            f.write("];\n\n")


def two_port(r, x, b, tap, shift_deg):
    ys = 1.0 / complex(r, x)
    tap = tap if tap != 0 else 1.0
    t = tap * np.exp(1j * np.deg2rad(shift_deg))
    ysh = ys + 0.5j * b
    return ysh / (tap * tap), -ys / np.conj(t), -ys / t, ysh


def ybus(case):
    nb = case["bus"].shape[0]
    ids = {int(b[0]): i for i, b in enumerate(case["bus"])}
    Y = np.zeros((nb, nb), complex)
    for br in case["branch"]:
        if br[10] == 0:
            continue
        f, t = ids[int(br[0])], ids[int(br[1])]
        yff, yft, ytf, ytt = two_port(br[2], br[3], br[4], br[8], br[9])
        Y[f, f] += yff
        Y[f, t] += yft
        Y[t, f] += ytf
        Y[t, t] += ytt
    base = case["baseMVA"]
    for i, b in enumerate(case["bus"]):
        Y[i, i] += complex(b[4], b[5]) / base
    return Y, ids


def newton_pf(case, tol=1e-10, itmax=40):
    """Standard polar Newton power flow. Returns (V complex, converged)."""
    base = case["baseMVA"]
    Y, ids = ybus(case)
    nb = len(ids)
    bus = case["bus"]
    types = bus[:, 1].astype(int)
    # net injections (generation setpoints minus load)
    pg = np.zeros(nb)
    qg = np.zeros(nb)
    vg = np.ones(nb)
    for g in case["gen"]:
        if g[7] <= 0:
            continue
        i = ids[int(g[0])]
        pg[i] += g[1] / base
        qg[i] += g[2] / base
        vg[i] = g[5]
    p_sched = pg - bus[:, 2] / base
    q_sched = qg - bus[:, 3] / base

    v = np.ones(nb)
    th = np.zeros(nb)
    for i in range(nb):
        if types[i] in (2, 3):
            v[i] = vg[i]
    pv = [i for i in range(nb) if types[i] == 2]
    pq = [i for i in range(nb) if types[i] == 1]
    sl = [i for i in range(nb) if types[i] == 3]
    pvpq = pv + pq

    for _ in range(itmax):
        V = v * np.exp(1j * th)
        S = V * np.conj(Y @ V)
        dp = p_sched - S.real
        dq = q_sched - S.imag
        mis = np.concatenate([dp[pvpq], dq[pq]])
        if np.max(np.abs(mis)) < tol:
            return V, True
        # Jacobian blocks
        dS_dth = 1j * np.diag(V) @ (np.diag(np.conj(Y @ V)) - np.conj(Y) @ np.diag(np.conj(V)))
        dS_dv = np.diag(V / v) @ np.conj(Y @ np.diag(V)).T * 0  # placeholder
        Ibus = Y @ V
        diagV = np.diag(V)
        diagI = np.diag(Ibus)
        diagVnorm = np.diag(V / v)
        dS_dth = 1j * diagV @ np.conj(diagI - Y @ diagV)
        dS_dv = diagV @ np.conj(Y @ diagVnorm) + np.conj(diagI) @ diagVnorm
        J11 = dS_dth[np.ix_(pvpq, pvpq)].real
        J12 = dS_dv[np.ix_(pvpq, pq)].real
        J21 = dS_dth[np.ix_(pq, pvpq)].imag
        J22 = dS_dv[np.ix_(pq, pq)].imag
        J = np.block([[J11, J12], [J21, J22]])
        dx = np.linalg.solve(J, mis)
        th[pvpq] += dx[: len(pvpq)]
        v[pq] += dx[len(pvpq):]
    return v * np.exp(1j * th), False


def losses_mw(case, V):
    Y, ids = ybus(case)
    S = V * np.conj(Y @ V)
    # total injection = losses (loads/gens cancel) -> sum of bus injections
    return S.real.sum() * case["baseMVA"]
