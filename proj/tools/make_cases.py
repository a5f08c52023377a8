#!/usr/bin/env python3
# Copyright 2026 The dpmaint Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the bundled case files under cases/.

Hourly demand is a bus's peak load scaled by DAILY_SHAPE (fraction of the
daily peak, hour 0 = midnight), repeated for multi-day horizons.

    python3 tools/make_cases.py [output_dir]
"""

import json
import os
import sys

DAILY_SHAPE = [
    0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96, 0.96, 0.95,
    0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96, 0.91, 0.83, 0.73, 0.63,
]


def profile(peak_mw, hours):
    return [round(peak_mw * DAILY_SHAPE[t % 24], 4) for t in range(hours)]


def gen(gid, bus, d, c, pmin, pmax, ramp, up, down):
    return {
        "id": gid, "bus": bus, "dispatch_cost": d, "commitment_cost": c,
        "p_min": pmin, "p_max": pmax, "ramp": ramp, "min_up": up,
        "min_down": down, "initial_on": False, "initial_output": 0.0,
    }


def seven_bus(hours):
    peaks = {"A": 0.0, "B": 40.0, "C": 60.0, "D": 20.0, "E": 70.0,
             "F": 40.0, "G": 50.0}
    lines = [
        ("A", "B", 12.0, 150.0), ("A", "C", 10.0, 150.0),
        ("D", "E", 15.0, 150.0), ("F", "G", 12.0, 150.0),
        ("B", "G", 8.0, 100.0), ("C", "E", 10.0, 100.0),
        ("E", "F", 9.0, 100.0),
    ]
    windows = hours // 6
    return {
        "name": "seven_bus_three_region",
        "base_mva": 100.0,
        "reference_bus": "A",
        "horizon": {"hours": hours, "window_hours": 6},
        "buses": list("ABCDEFG"),
        "lines": [{"from": a, "to": b, "gamma": g, "capacity_mw": cap}
                  for a, b, g, cap in lines],
        "generators": [
            gen("G1", "A", 20.0, 100.0, 20.0, 200.0, 80.0, 3, 2),
            gen("G2", "B", 28.0, 60.0, 10.0, 80.0, 40.0, 2, 2),
            gen("G3", "D", 25.0, 80.0, 15.0, 120.0, 60.0, 3, 2),
            gen("G4", "G", 35.0, 40.0, 5.0, 100.0, 50.0, 1, 1),
            gen("G5", "F", 30.0, 50.0, 10.0, 90.0, 45.0, 2, 1),
        ],
        "demand": {b: profile(p, hours) for b, p in peaks.items() if p > 0},
        "maintenance": [
            {"generator": "G1",
             "window_costs": [900.0 - 50.0 * (m % 4) for m in range(windows)],
             "preferred_window": 1, "max_deviation": 4},
            {"generator": "G3",
             "window_costs": [500.0 + 100.0 * (m % 3) for m in range(windows)],
             "preferred_window": 2, "max_deviation": 4},
        ],
    }


# Branch reactances of the IEEE 14-bus system; gamma = 1 / x.
IEEE14_BRANCHES = [
    (1, 2, 0.05917), (1, 5, 0.22304), (2, 3, 0.19797), (2, 4, 0.17632),
    (2, 5, 0.17388), (3, 4, 0.17103), (4, 5, 0.04211), (4, 7, 0.20912),
    (4, 9, 0.55618), (5, 6, 0.25202), (6, 11, 0.19890), (6, 12, 0.25581),
    (6, 13, 0.13027), (7, 8, 0.17615), (7, 9, 0.11001), (9, 10, 0.08450),
    (9, 14, 0.27038), (10, 11, 0.19207), (12, 13, 0.19988),
    (13, 14, 0.34802),
]
IEEE14_LOADS = {2: 21.7, 3: 94.2, 4: 47.8, 5: 7.6, 6: 11.2, 9: 29.5,
                10: 9.0, 11: 3.5, 12: 6.1, 13: 13.5, 14: 14.9}
IEEE14_CAPACITY = {(1, 2): 200.0, (1, 5): 120.0}


def fourteen_bus(hours):
    windows = hours // 6
    return {
        "name": "ieee14_maintenance",
        "base_mva": 100.0,
        "reference_bus": "1",
        "horizon": {"hours": hours, "window_hours": 6},
        "buses": [str(b) for b in range(1, 15)],
        "lines": [{"from": str(a), "to": str(b), "gamma": round(1.0 / x, 6),
                   "capacity_mw": IEEE14_CAPACITY.get((a, b), 100.0)}
                  for a, b, x in IEEE14_BRANCHES],
        "generators": [
            gen("G1", "1", 20.0, 150.0, 40.0, 250.0, 100.0, 4, 3),
            gen("G2", "2", 25.0, 100.0, 20.0, 140.0, 70.0, 3, 2),
            gen("G3", "3", 40.0, 50.0, 10.0, 100.0, 60.0, 2, 1),
            gen("G6", "6", 35.0, 60.0, 10.0, 100.0, 60.0, 2, 1),
            gen("G8", "8", 30.0, 70.0, 10.0, 100.0, 60.0, 2, 2),
        ],
        "demand": {str(b): profile(p, hours)
                   for b, p in sorted(IEEE14_LOADS.items())},
        "maintenance": [
            {"generator": "G1",
             "window_costs": [1500.0 + 150.0 * ((m + 2) % 4)
                              for m in range(windows)],
             "preferred_window": 0, "max_deviation": 4},
            {"generator": "G2",
             "window_costs": [800.0 + 120.0 * (m % 4) for m in range(windows)],
             "preferred_window": 1, "max_deviation": 4},
            {"generator": "G6",
             "window_costs": [600.0 + 90.0 * ((m + 1) % 3)
                              for m in range(windows)],
             "preferred_window": 2, "max_deviation": 4},
        ],
    }


PARTITIONS = {
    "seven_bus_3region.partition": (
        "# Three regions: {A,B,C}, {D,E}, {F,G}\n",
        {"A": 1, "B": 1, "C": 1, "D": 2, "E": 2, "F": 3, "G": 3}),
    "ieee14_2region.partition": (
        "# Two regions split along the 4-7, 4-9 and 5-6 branches\n",
        {str(b): (1 if b <= 5 else 2) for b in range(1, 15)}),
    "ieee14_4region.partition": (
        "# Four regions\n",
        {**{str(b): 1 for b in (1, 2, 5)}, **{str(b): 2 for b in (3, 4)},
         **{str(b): 3 for b in (7, 8, 9, 10, 14)},
         **{str(b): 4 for b in (6, 11, 12, 13)}}),
}


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "..", "cases")
    os.makedirs(out, exist_ok=True)
    cases = {
        "seven_bus_t24.json": seven_bus(24),
        "ieee14_t24.json": fourteen_bus(24),
        "ieee14_t48.json": fourteen_bus(48),
    }
    for name, doc in cases.items():
        with open(os.path.join(out, name), "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")
    for name, (header, mapping) in PARTITIONS.items():
        with open(os.path.join(out, name), "w") as f:
            f.write(header)
            key = (lambda s: (len(s), s))
            for bus in sorted(mapping, key=key):
                f.write(f"{bus} {mapping[bus]}\n")


if __name__ == "__main__":
    main()
