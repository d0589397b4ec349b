#!/usr/bin/env python3
"""Regenerates data/ne39.json and include/stvs/grid/ne39_data.hpp.

Network and load data follow the standard New England 39-bus case
(100 MVA base); classical machine constants follow the usual dynamic data
set for that case (H and x'd on the 100 MVA system base).
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent

# bus, Pd (MW), Qd (MVAr)
LOADS = [
    (1, 97.6, 44.2), (3, 322.0, 2.4), (4, 500.0, 184.0), (7, 233.8, 84.0),
    (8, 522.0, 176.6), (9, 6.5, -66.6), (12, 8.53, 88.0), (15, 320.0, 153.0), (16, 329.0, 32.3), (18, 158.0, 30.0),
    (20, 680.0, 103.0), (21, 274.0, 115.0), (23, 247.5, 84.6), (24, 308.6, -92.2),
    (25, 224.0, 47.2), (26, 139.0, 17.0), (27, 281.0, 75.5), (28, 206.0, 27.6),
    (29, 283.5, 26.9),
]

# Demand attached to generator buses in the source data. Generator buses
# carry no load records, so these are netted into the generator schedule.
GEN_BUS_LOADS = {31: 9.2, 39: 1104.0}

# bus, Pg (MW), Vset (pu), H (s), x'd (pu)
GENS = [
    (30, 250.0, 1.0499, 42.0, 0.031),
    (31, 677.871, 0.982, 30.3, 0.0697),
    (32, 650.0, 0.9841, 35.8, 0.0531),
    (33, 632.0, 0.9972, 28.6, 0.0436),
    (34, 508.0, 1.0123, 26.0, 0.132),
    (35, 650.0, 1.0494, 34.8, 0.05),
    (36, 560.0, 1.0636, 26.4, 0.049),
    (37, 540.0, 1.0275, 24.3, 0.057),
    (38, 830.0, 1.0265, 34.5, 0.057),
    (39, 1000.0, 1.03, 500.0, 0.006),
]

# from, to, r, x, total line charging b, off-nominal tap (0 = none)
BRANCHES = [
    (1, 2, 0.0035, 0.0411, 0.6987, 0), (1, 39, 0.001, 0.025, 0.75, 0),
    (2, 3, 0.0013, 0.0151, 0.2572, 0), (2, 25, 0.007, 0.0086, 0.146, 0),
    (2, 30, 0.0, 0.0181, 0.0, 1.025), (3, 4, 0.0013, 0.0213, 0.2214, 0),
    (3, 18, 0.0011, 0.0133, 0.2138, 0), (4, 5, 0.0008, 0.0128, 0.1342, 0),
    (4, 14, 0.0008, 0.0129, 0.1382, 0), (5, 6, 0.0002, 0.0026, 0.0434, 0),
    (5, 8, 0.0008, 0.0112, 0.1476, 0), (6, 7, 0.0006, 0.0092, 0.113, 0),
    (6, 11, 0.0007, 0.0082, 0.1389, 0), (6, 31, 0.0, 0.025, 0.0, 1.07),
    (7, 8, 0.0004, 0.0046, 0.078, 0), (8, 9, 0.0023, 0.0363, 0.3804, 0),
    (9, 39, 0.001, 0.025, 1.2, 0), (10, 11, 0.0004, 0.0043, 0.0729, 0),
    (10, 13, 0.0004, 0.0043, 0.0729, 0), (10, 32, 0.0, 0.02, 0.0, 1.07),
    (12, 11, 0.0016, 0.0435, 0.0, 1.006), (12, 13, 0.0016, 0.0435, 0.0, 1.006),
    (13, 14, 0.0009, 0.0101, 0.1723, 0), (14, 15, 0.0018, 0.0217, 0.366, 0),
    (15, 16, 0.0009, 0.0094, 0.171, 0), (16, 17, 0.0007, 0.0089, 0.1342, 0),
    (16, 19, 0.0016, 0.0195, 0.304, 0), (16, 21, 0.0008, 0.0135, 0.2548, 0),
    (16, 24, 0.0003, 0.0059, 0.068, 0), (17, 18, 0.0007, 0.0082, 0.1319, 0),
    (17, 27, 0.0013, 0.0173, 0.3216, 0), (19, 20, 0.0007, 0.0138, 0.0, 1.06),
    (19, 33, 0.0007, 0.0142, 0.0, 1.07), (20, 34, 0.0009, 0.018, 0.0, 1.009),
    (21, 22, 0.0008, 0.014, 0.2565, 0), (22, 23, 0.0006, 0.0096, 0.1846, 0),
    (22, 35, 0.0, 0.0143, 0.0, 1.025), (23, 24, 0.0022, 0.035, 0.361, 0),
    (23, 36, 0.0005, 0.0272, 0.0, 0), (25, 26, 0.0032, 0.0323, 0.531, 0),
    (25, 37, 0.0006, 0.0232, 0.0, 1.025), (26, 27, 0.0014, 0.0147, 0.2396, 0),
    (26, 28, 0.0043, 0.0474, 0.7802, 0), (26, 29, 0.0057, 0.0625, 1.029, 0),
    (28, 29, 0.0014, 0.0151, 0.249, 0), (29, 38, 0.0008, 0.0156, 0.0, 1.025),
]

BASE = 100.0
GEN_BUSES = {g[0] for g in GENS}


def build():
    vset = {g[0]: g[2] for g in GENS}
    buses = [{"id": b, "kind": "generator" if b in GEN_BUSES else "load",
              "v_base": vset.get(b, 1.0)} for b in range(1, 40)]
    branches = []
    for f, t, r, x, b, tap in BRANCHES:
        br = {"from": f, "to": t, "r": r, "x": x}
        if b:
            br["charging"] = b
        if tap:
            br["tap"] = tap
        branches.append(br)
    gens = [{"bus": b, "p_mech": round((pg - GEN_BUS_LOADS.get(b, 0.0)) / BASE, 6), "inertia": h, "damping": 8.0 * h,
             "xd_prime": xd} for b, pg, _, h, xd in GENS]
    loads = []
    for b, pd, qd in LOADS:
        loads.append({"bus": b, "p": round(pd / BASE, 6), "q": round(qd / BASE, 6),
                      "motor_fraction": 0.5,
                      "motor": "default"})
    return {"name": "ne39", "base_mva": BASE, "buses": buses, "branches": branches,
            "generators": gens, "loads": loads}


def main():
    doc = build()
    text = json.dumps(doc, indent=1)
    (ROOT / "data" / "ne39.json").write_text(text + "\n")
    hdr = ROOT / "include" / "stvs" / "grid" / "ne39_data.hpp"
    hdr.write_text(
        "#pragma once\n\n"
        "// Generated by scripts/make_ne39.py; identical to data/ne39.json.\n\n"
        "namespace stvs::grid {\n\n"
        "inline constexpr const char* kNe39Json = R\"json(" + text + "\n)json\";\n\n"
        "}  // namespace stvs::grid\n")


if __name__ == "__main__":
    main()
