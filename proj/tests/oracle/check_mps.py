"""Reads the MPS files written by the LP tests with HiGHS and compares the
status and objective against tests/data/lp_fixtures.json.

Run after ctest from the repository root:
    python3 tests/oracle/check_mps.py build/scratch/lp_mps
"""

import json
import pathlib
import sys

import highspy

ROOT = pathlib.Path(__file__).resolve().parent.parent
STATUS = {
    highspy.HighsModelStatus.kOptimal: "optimal",
    highspy.HighsModelStatus.kInfeasible: "infeasible",
    highspy.HighsModelStatus.kUnbounded: "unbounded",
    highspy.HighsModelStatus.kUnboundedOrInfeasible: "unbounded_or_infeasible",
}


def main(mps_dir):
    fixtures = json.loads((ROOT / "data" / "lp_fixtures.json").read_text())
    failures = 0
    for f in fixtures:
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        h.readModel(str(pathlib.Path(mps_dir) / f"{f['name']}.mps"))
        h.run()
        status = STATUS.get(h.getModelStatus(), str(h.getModelStatus()))
        ok = status == f["status"] or (status == "unbounded_or_infeasible" and f["status"] != "optimal")
        if ok and f["status"] == "optimal":
            obj = h.getInfo().objective_function_value
            ok = abs(obj - f["objective"]) <= 1e-6 * max(1.0, abs(f["objective"]))
            status += f" {obj:.9g}"
        print(f"{'ok  ' if ok else 'FAIL'} {f['name']}: {status}")
        failures += not ok
    return failures


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else "build/scratch/lp_mps"))
