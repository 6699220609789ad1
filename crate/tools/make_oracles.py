"""One-time reference solutions: solve each fixture's AC OPF with scipy's
trust-constr (polar form, analytic Jacobians) and commit objective, nodal
prices and the optimal voltage profile as JSON oracle fixtures.

Run:  python3 tools/make_oracles.py [case ...]
"""

import json
import os
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, NonlinearConstraint, minimize

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from common import parse_case, newton_pf, two_port

HERE = os.path.dirname(os.path.abspath(__file__))
CASES = os.path.join(HERE, "..", "fixtures", "cases")
ORACLES = os.path.join(HERE, "..", "fixtures", "oracles")

DEFAULT_ANGLE = np.pi / 3  # matches the solver's unbounded-marker default


class Opf:
    def __init__(self, case):
        self.base = case["baseMVA"]
        bus = case["bus"]
        self.nb = bus.shape[0]
        self.ids = {int(b[0]): i for i, b in enumerate(bus)}
        self.pd = bus[:, 2] / self.base
        self.qd = bus[:, 3] / self.base
        self.gsh = bus[:, 4] / self.base
        self.bsh = bus[:, 5] / self.base
        self.vmin = bus[:, 12].copy()
        self.vmax = bus[:, 11].copy()
        self.ref = int(np.where(bus[:, 1] == 3)[0][0])

        gens = [g for g in case["gen"] if g[7] > 0]
        self.ng = len(gens)
        self.gbus = np.array([self.ids[int(g[0])] for g in gens])
        self.pmin = np.array([g[9] for g in gens]) / self.base
        self.pmax = np.array([g[8] for g in gens]) / self.base
        self.qmin = np.array([g[4] for g in gens]) / self.base
        self.qmax = np.array([g[3] for g in gens]) / self.base
        cost = []
        for gi, g in enumerate(case["gen"]):
            if g[7] <= 0:
                continue
            row = case["gencost"][gi]
            n = int(row[3])
            c = list(row[4:4 + n])
            c = [0.0] * (3 - len(c)) + c
            cost.append((c[0] * self.base ** 2, c[1] * self.base, c[2]))
        self.c2 = np.array([c[0] for c in cost])
        self.c1 = np.array([c[1] for c in cost])
        self.c0 = np.array([c[2] for c in cost])

        self.branches = []
        for br in case["branch"]:
            if br[10] == 0:
                continue
            f, t = self.ids[int(br[0])], self.ids[int(br[1])]
            yff, yft, ytf, ytt = two_port(br[2], br[3], br[4], br[8], br[9])
            smax = br[5] / self.base
            lo, hi = np.deg2rad(br[11]), np.deg2rad(br[12])
            if (br[11] == 0 and br[12] == 0) or br[11] <= -180 or br[12] >= 180:
                lo, hi = -DEFAULT_ANGLE, DEFAULT_ANGLE
            self.branches.append((f, t, yff, yft, ytf, ytt, smax, lo, hi))

        self.nv = 2 * self.nb + 2 * self.ng

    def split(self, z):
        nb, ng = self.nb, self.ng
        return z[:nb], z[nb:2 * nb], z[2 * nb:2 * nb + ng], z[2 * nb + ng:]

    def objective(self, z):
        _, _, pg, _ = self.split(z)
        return float(np.sum(self.c2 * pg ** 2 + self.c1 * pg + self.c0))

    def grad(self, z):
        g = np.zeros_like(z)
        _, _, pg, _ = self.split(z)
        g[2 * self.nb:2 * self.nb + self.ng] = 2 * self.c2 * pg + self.c1
        return g

    def injections(self, th, v):
        """Bus power injections into the network and their Jacobians."""
        nb = self.nb
        V = v * np.exp(1j * th)
        P = np.zeros(nb)
        Q = np.zeros(nb)
        dP = np.zeros((nb, 2 * nb))
        dQ = np.zeros((nb, 2 * nb))

        def add(i, s, ds_dthf, ds_dtht, ds_dvf, ds_dvt, f, t):
            P[i] += s.real
            Q[i] += s.imag
            for (col, d) in [(f, ds_dthf), (t, ds_dtht)]:
                dP[i, col] += d.real
                dQ[i, col] += d.imag
            for (col, d) in [(nb + f, ds_dvf), (nb + t, ds_dvt)]:
                dP[i, col] += d.real
                dQ[i, col] += d.imag

        for (f, t, yff, yft, ytf, ytt, _, _, _) in self.branches:
            vf, vt = V[f], V[t]
            i_f = yff * vf + yft * vt
            sf = vf * np.conj(i_f)
            add(f, sf,
                1j * vf * np.conj(i_f) - 1j * vf * np.conj(yff * vf),
                -1j * vf * np.conj(yft * vt),
                (vf / abs(vf)) * np.conj(i_f) + vf * np.conj(yff * vf / abs(vf)),
                vf * np.conj(yft * vt / abs(vt)),
                f, t)
            i_t = ytf * vf + ytt * vt
            st = vt * np.conj(i_t)
            add(t, st,
                -1j * vt * np.conj(ytf * vf),
                1j * vt * np.conj(i_t) - 1j * vt * np.conj(ytt * vt),
                vt * np.conj(ytf * vf / abs(vf)),
                (vt / abs(vt)) * np.conj(i_t) + vt * np.conj(ytt * vt / abs(vt)),
                f, t)
        # bus shunts
        for i in range(nb):
            y = complex(self.gsh[i], -self.bsh[i])
            P[i] += self.gsh[i] * v[i] ** 2
            Q[i] += -self.bsh[i] * v[i] ** 2
            dP[i, nb + i] += 2 * self.gsh[i] * v[i]
            dQ[i, nb + i] += -2 * self.bsh[i] * v[i]
            _ = y
        return P, Q, dP, dQ

    def balance(self, z):
        th, v, pg, qg = self.split(z)
        P, Q, dP, dQ = self.injections(th, v)
        cp = np.zeros(self.nb)
        cq = np.zeros(self.nb)
        np.add.at(cp, self.gbus, pg)
        np.add.at(cq, self.gbus, qg)
        cp += -self.pd - P
        cq += -self.qd - Q
        J = np.zeros((2 * self.nb, self.nv))
        J[:self.nb, :2 * self.nb] = -dP
        J[self.nb:, :2 * self.nb] = -dQ
        for g, b in enumerate(self.gbus):
            J[b, 2 * self.nb + g] = 1.0
            J[self.nb + b, 2 * self.nb + self.ng + g] = 1.0
        return np.concatenate([cp, cq]), J

    def thermal(self, z):
        th, v, _, _ = self.split(z)
        V = v * np.exp(1j * th)
        nb = self.nb
        rows = []
        jac = []
        for (f, t, yff, yft, ytf, ytt, smax, _, _) in self.branches:
            if smax <= 0:
                continue
            for side in (0, 1):
                if side == 0:
                    i_c = yff * V[f] + yft * V[t]
                    s = V[f] * np.conj(i_c)
                    dth_f = 1j * V[f] * np.conj(i_c) - 1j * V[f] * np.conj(yff * V[f])
                    dth_t = -1j * V[f] * np.conj(yft * V[t])
                    dv_f = (V[f] / v[f]) * np.conj(i_c) + V[f] * np.conj(yff * V[f] / v[f])
                    dv_t = V[f] * np.conj(yft * V[t] / v[t])
                else:
                    i_c = ytf * V[f] + ytt * V[t]
                    s = V[t] * np.conj(i_c)
                    dth_f = -1j * V[t] * np.conj(ytf * V[f])
                    dth_t = 1j * V[t] * np.conj(i_c) - 1j * V[t] * np.conj(ytt * V[t])
                    dv_f = V[t] * np.conj(ytf * V[f] / v[f])
                    dv_t = (V[t] / v[t]) * np.conj(i_c) + V[t] * np.conj(ytt * V[t] / v[t])
                val = smax ** 2 - (s.real ** 2 + s.imag ** 2)
                row = np.zeros(self.nv)
                for col, d in [(f, dth_f), (t, dth_t), (nb + f, dv_f), (nb + t, dv_t)]:
                    row[col] = -2 * s.real * d.real - 2 * s.imag * d.imag
                rows.append(val)
                jac.append(row)
        return np.array(rows), np.array(jac)

    def solve(self, v0=None, th0=None, z_full=None):
        nb, ng = self.nb, self.ng
        z0 = np.zeros(self.nv)
        z0[:nb] = 0.0 if th0 is None else th0
        z0[nb:2 * nb] = np.clip(1.0, self.vmin, self.vmax) if v0 is None else v0
        share = self.pd.sum() / max(ng, 1)
        z0[2 * nb:2 * nb + ng] = np.clip(share, self.pmin, self.pmax)
        if v0 is not None:
            # spread any slack-bus power-flow surplus implied by the start
            bal, _ = self.balance(z0)
            z0[2 * nb:2 * nb + ng] = np.clip(
                z0[2 * nb:2 * nb + ng] - bal[self.gbus] * 0, self.pmin, self.pmax)
        z0[2 * nb + ng:] = np.clip(0.0, self.qmin, self.qmax)
        if z_full is not None:
            z0 = z_full.copy()

        lb = np.concatenate([np.full(nb, -np.pi), self.vmin, self.pmin, self.qmin])
        ub = np.concatenate([np.full(nb, np.pi), self.vmax, self.pmax, self.qmax])
        lb[self.ref] = ub[self.ref] = 0.0
        bounds = Bounds(lb, ub)

        cons = [NonlinearConstraint(lambda z: self.balance(z)[0], 0, 0,
                                    jac=lambda z: self.balance(z)[1])]
        if any(b[6] > 0 for b in self.branches):
            cons.append(NonlinearConstraint(lambda z: self.thermal(z)[0], 0, np.inf,
                                            jac=lambda z: self.thermal(z)[1]))
        A = np.zeros((len(self.branches), self.nv))
        for r, b in enumerate(self.branches):
            A[r, b[0]] = 1.0
            A[r, b[1]] = -1.0
        lo = [b[7] for b in self.branches]
        hi = [b[8] for b in self.branches]
        cons.append(LinearConstraint(A, lo, hi))

        res = minimize(self.objective, z0, jac=self.grad, method="trust-constr",
                       bounds=bounds, constraints=cons,
                       options={"maxiter": 3000, "gtol": 1e-7, "xtol": 1e-11, "barrier_tol": 1e-10, "verbose": 0})
        return res


def violation(opf, res):
    return max(np.abs(opf.balance(res.x)[0]).max(), res.constr_violation)


def oracle_for(name, want_prices=True):
    case = parse_case(os.path.join(CASES, f"{name}.m"))
    opf = Opf(case)
    # AC OPF is nonconvex: try both a cold start and a power-flow warm
    # start, polish each, and keep the best feasible local optimum
    def polish(res, rounds=3):
        for _ in range(rounds):
            if violation(opf, res) < 1e-8 and res.status in (1, 2):
                break
            nxt = opf.solve(z_full=res.x)
            better = violation(opf, nxt) < violation(opf, res) or (
                violation(opf, nxt) < 1e-7 and nxt.fun < res.fun
            )
            if not better:
                break
            res = nxt
        return res

    candidates = [polish(opf.solve())]
    V, pf_ok = newton_pf(case)
    if pf_ok:
        candidates.append(polish(opf.solve(v0=np.abs(V), th0=np.angle(V))))
    feasible = [r for r in candidates if violation(opf, r) < 1e-6]
    res = min(feasible or candidates, key=lambda r: r.fun)
    th, v, pg, qg = opf.split(res.x)
    bal, _ = opf.balance(res.x)
    ok = np.abs(bal).max() < 1e-6 and res.constr_violation < 1e-6
    # nodal prices: multipliers of the balance equalities, $/MWh on the MW base
    lam = res.v[0]
    lam_p = lam[:opf.nb] / opf.base
    lam_q = lam[opf.nb:] / opf.base
    # sign calibration: at least one generator is marginal, its price is
    # positive; flip if the solver reports the opposite convention
    if np.median(lam_p) < 0:
        lam_p, lam_q = -lam_p, -lam_q
    out = {
        "case": name,
        "objective": float(res.fun),
        "lmp": [round(float(x), 8) for x in lam_p] if want_prices else [],
        "qlmp": [round(float(x), 8) for x in lam_q] if want_prices else [],
        "v": [round(float(x), 10) for x in v],
        "theta": [round(float(x), 10) for x in th],
        "source_solver": "scipy-trust-constr",
        "tolerance": 1e-6,
    }
    os.makedirs(ORACLES, exist_ok=True)
    with open(os.path.join(ORACLES, f"{name}.json"), "w") as f:
        json.dump(out, f, indent=1)
    print(f"{name}: status={res.status} obj={res.fun:.2f} max|bal|={np.abs(bal).max():.2e} "
          f"iters={res.niter} ok={ok}")
    return ok


ALL = ["case5", "case6ww", "case9", "case14", "case24", "case30", "case39",
       "case57", "case118", "case300", "case33", "case69", "case119"]

if __name__ == "__main__":
    names = sys.argv[1:] or ALL
    for n in names:
        oracle_for(n)
