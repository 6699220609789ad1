"""Set each feeder's substation cost coefficient so the reference optimum
equals the pinned radial objectives, then regenerate the feeder files and
refresh their oracles.

The minimum-loss dispatch p* of a single-source feeder is independent of the
(linear) cost coefficient, so c1 := target / p* makes the reference optimum
exactly the target without touching the physics.
"""

import json
import os
import subprocess
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
ORACLES = os.path.join(HERE, "..", "fixtures", "oracles")

TARGETS = {"case33": 386.03, "case69": 434.18, "case119": 2434.65}


def main():
    cal = {}
    for name, target in TARGETS.items():
        with open(os.path.join(ORACLES, f"{name}.json")) as f:
            oracle = json.load(f)
        # oracle was produced at the current c1; dispatch = objective / c1
        case_path = os.path.join(HERE, "..", "fixtures", "cases", f"{name}.m")
        import re
        text = open(case_path).read()
        m = re.search(r"mpc\.gencost = \[\n\t2\t0\t0\t3\t0\t([0-9.]+)\t0;", text)
        c1_now = float(m.group(1))
        p_star = oracle["objective"] / c1_now
        cal[name] = target / p_star
        print(f"{name}: p* = {p_star:.6f} MW, c1 {c1_now} -> {cal[name]:.6f}")
    with open(os.path.join(HERE, "calibration.json"), "w") as f:
        json.dump(cal, f, indent=1)
    subprocess.run([sys.executable, os.path.join(HERE, "make_feeders.py")], check=True)
    subprocess.run([sys.executable, os.path.join(HERE, "make_oracles.py")] + list(TARGETS), check=True)


if __name__ == "__main__":
    main()
