"""Writes the nine-bus, two-voltage-level illustrative network to data/fig1."""

import csv
import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "fig1"

BUSES = [
    ("R1", 380, 47.0000, 15.0000),
    ("R2", 380, 47.0000, 15.1300),
    ("R3", 380, 47.0000, 15.5300),
    ("R4", 380, 47.0000, 15.9300),
    ("R5", 380, 47.0000, 16.0600),
    ("G1", 220, 46.9820, 15.0000),
    ("G2", 220, 46.9730, 14.9740),
    ("G3", 220, 46.9955, 15.1300),
    ("G4", 220, 46.9955, 16.0600),
]

# id, from, to, kV, s_nom MVA, length km
LINES = [
    ("L_R1_R2", "R1", "R2", 380, 1700, 10),
    ("L_R2_R3", "R2", "R3", 380, 1700, 30),
    ("L_R3_R4", "R3", "R4", 380, 1700, 30),
    ("L_R4_R5", "R4", "R5", 380, 1700, 10),
    ("L_R2_R5", "R2", "R5", 380, 400, 70),
    ("L_G1_G2", "G1", "G2", 220, 1000, 3),
    ("L_G2_G3", "G2", "G3", 220, 1000, 12),
    ("L_G3_G4", "G3", "G4", 220, 400, 72),
    ("L_G1_G3", "G1", "G3", 220, 1000, 10),
]
X_PER_KM = {380: 0.25, 220: 0.40}

# id, hv, lv, s_nom MVA, x pu on own rating
TRAFOS = [
    ("T1", "R2", "G3", 400, 0.12),
    ("T2", "R5", "G4", 600, 0.12),
]

GENERATORS = [("gen_R5", "R5", 3000, 10.0), ("gen_G2", "G2", 2000, 80.0)]
LOADS = [("load_G1", "G1", 1200), ("load_G2", "G2", 800), ("load_R1", "R1", 600)]

DAYS = [1.00, 0.92, 0.80, 0.96]
HOURS = 24
WEIGHT = 8760 / (len(DAYS) * HOURS)


def shape(h):
    return 0.75 + 0.25 * math.sin(math.pi * (h - 6) / 12) if 6 <= h <= 18 else 0.75 - 0.1 * math.sin(
        math.pi * ((h - 18) % 24) / 12)


def write(name, header, rows):
    with open(OUT / name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def fmt(v):
    return f"{v:.6g}"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    kv = {b[0]: b[1] for b in BUSES}
    write("buses.csv", ["id", "voltage_kv", "lat", "lon"], [[b, v, fmt(la), fmt(lo)] for b, v, la, lo in BUSES])
    write("lines.csv",
          ["id", "bus_from", "bus_to", "voltage_kv", "s_nom_mva", "x_ohm", "length_km", "cost_eur_per_mva_km",
           "expandable"],
          [[i, a, b, v, s, fmt(X_PER_KM[v] * km), km, 0, "true"] for i, a, b, v, s, km in LINES])
    write("transformers.csv", ["id", "bus_hv", "bus_lv", "s_nom_mva", "x_ohm", "cost_eur_per_mva", "expandable"],
          [[i, hv, lv, s, fmt(x * kv[hv] ** 2 / s), 0, "true"] for i, hv, lv, s, x in TRAFOS])
    labels = [f"d{d}h{h:02d}" for d in range(len(DAYS)) for h in range(HOURS)]
    write("snapshots.csv", ["snapshot", "weight_hours"], [[s, fmt(WEIGHT)] for s in labels])
    write("generators.csv", ["id", "bus", "p_nom_mw", "marginal_cost_eur_mwh"],
          [[i, b, p, mc] for i, b, p, mc in GENERATORS])
    rows = []
    for d, scale in enumerate(DAYS):
        for h in range(HOURS):
            rows.append([labels[d * HOURS + h], fmt(0.85 + 0.15 * math.cos(math.pi * h / 12) * scale)])
    write("generator_profiles.csv", ["snapshot", "gen_R5"], rows)
    write("loads.csv", ["id", "bus"], [[i, b] for i, b, _ in LOADS])
    rows = []
    for d, scale in enumerate(DAYS):
        for h in range(HOURS):
            rows.append([labels[d * HOURS + h]] + [fmt(peak * scale * shape(h)) for _, _, peak in LOADS])
    write("load_profiles.csv", ["snapshot"] + [i for i, _, _ in LOADS], rows)
    write("substations.csv", ["name", "lat", "lon", "hv_kv", "lv_kv", "s_nom_mva", "x_ohm"],
          [["T1 substation", 47.0004, 15.1302, 380, 220, 400, fmt(0.12 * 380 ** 2 / 400)],
           ["T2 substation", 46.9998, 16.0597, 380, 220, 600, fmt(0.12 * 380 ** 2 / 600)]])


if __name__ == "__main__":
    main()
