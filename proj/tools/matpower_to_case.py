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
"""Converts a MATPOWER case exported to JSON into the dpmaint case format.

The input holds the MATPOWER matrices as nested arrays:

    {"baseMVA": 100, "bus": [[...], ...], "gen": [[...], ...],
     "branch": [[...], ...], "gencost": [[...], ...]}

(for example written from Octave with jsonencode(struct(mpc))). Only the
DC quantities are used. Out-of-service branches and generators are dropped,
parallel branches are merged, and hourly demand is each bus's Pd scaled by
the daily shape in make_cases.py. Unit-commitment data MATPOWER does not
carry (minimum up/down times, maintenance costs) come from the options.

    python3 tools/matpower_to_case.py case118.json -o cases/ieee118_t168.json \
        --hours 168 --maintain 10
"""

import argparse
import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from make_cases import profile  # noqa: E402

# MATPOWER column indices (0-based).
BUS_I, PD = 0, 2
GEN_BUS, PMAX, PMIN, GEN_STATUS, RAMP_30 = 0, 8, 9, 7, 18
F_BUS, T_BUS, BR_X, RATE_A, BR_STATUS = 0, 1, 3, 5, 10
MODEL, NCOST, COST = 0, 3, 4


def bus_id(value):
    return str(int(value))


def bus_key(b):
    return (len(b), b)


def merge_branches(branch, default_capacity):
    """Sums Γ and capacity of parallel in-service branches."""
    merged = {}
    for row in branch:
        if len(row) > BR_STATUS and row[BR_STATUS] == 0:
            continue
        a, b = sorted((bus_id(row[F_BUS]), bus_id(row[T_BUS])), key=bus_key)
        if a == b or row[BR_X] == 0:
            continue
        cap = row[RATE_A] if row[RATE_A] > 0 else default_capacity
        gamma, total = merged.get((a, b), (0.0, 0.0))
        merged[(a, b)] = (gamma + abs(1.0 / row[BR_X]), total + cap)
    ordered = sorted(merged.items(),
                     key=lambda kv: (bus_key(kv[0][0]), bus_key(kv[0][1])))
    return [{"from": a, "to": b, "gamma": round(g, 6), "capacity_mw": cap}
            for (a, b), (g, cap) in ordered]


def costs(gencost, i, default_dispatch):
    """Linear and constant terms of a polynomial cost row, else defaults."""
    if gencost is None or i >= len(gencost) or gencost[i][MODEL] != 2:
        return default_dispatch, 0.0
    row = gencost[i]
    n = int(row[NCOST])
    coef = row[COST:COST + n]
    linear = coef[-2] if n >= 2 else default_dispatch
    constant = coef[-1] if n >= 1 else 0.0
    return max(linear, 0.0), max(constant, 0.0)


def convert(mpc, args):
    windows = args.hours // args.window_hours
    buses = [bus_id(row[BUS_I]) for row in mpc["bus"]]
    gens = []
    for i, row in enumerate(mpc["gen"]):
        if len(row) > GEN_STATUS and row[GEN_STATUS] <= 0:
            continue
        dispatch, commitment = costs(mpc.get("gencost"), i,
                                     args.default_dispatch_cost)
        pmax = max(row[PMAX], 0.0)
        pmin = min(max(row[PMIN], 0.0), pmax)
        ramp = (row[RAMP_30] * 2 if len(row) > RAMP_30 and row[RAMP_30] > 0
                else pmax)
        gens.append({
            "id": f"G{i + 1}", "bus": bus_id(row[GEN_BUS]),
            "dispatch_cost": dispatch, "commitment_cost": commitment,
            "p_min": pmin, "p_max": pmax, "ramp": max(ramp, 1e-3),
            "min_up": args.min_up, "min_down": args.min_down,
            "initial_on": False, "initial_output": 0.0,
        })
    largest = sorted(gens, key=lambda g: -g["p_max"])[:args.maintain]
    maintenance = [
        {"generator": g["id"],
         "window_costs": [args.maintenance_cost * (1 + 0.1 * ((m + k) % 4))
                          for m in range(windows)],
         "preferred_window": (k * windows) // max(len(largest), 1),
         "max_deviation": 4}
        for k, g in enumerate(largest)]
    demand = {bus_id(row[BUS_I]): profile(row[PD], args.hours)
              for row in mpc["bus"] if row[PD] > 0}
    return {
        "name": args.name,
        "base_mva": float(mpc.get("baseMVA", 100.0)),
        "reference_bus": buses[0],
        "horizon": {"hours": args.hours, "window_hours": args.window_hours},
        "buses": buses,
        "lines": merge_branches(mpc["branch"], args.default_capacity),
        "generators": gens,
        "demand": demand,
        "maintenance": maintenance,
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("input", help="MATPOWER case as JSON")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--name", default="matpower_case")
    p.add_argument("--hours", type=int, default=168)
    p.add_argument("--window-hours", type=int, default=6)
    p.add_argument("--maintain", type=int, default=10,
                   help="number of largest units needing maintenance")
    p.add_argument("--maintenance-cost", type=float, default=1000.0)
    p.add_argument("--min-up", type=int, default=2)
    p.add_argument("--min-down", type=int, default=2)
    p.add_argument("--default-dispatch-cost", type=float, default=30.0)
    p.add_argument("--default-capacity", type=float, default=9900.0,
                   help="MW used where RATE_A is 0 (unlimited)")
    args = p.parse_args()
    if args.hours % args.window_hours:
        p.error("--hours must be a multiple of --window-hours")
    with open(args.input) as f:
        mpc = json.load(f)
    with open(args.output, "w") as f:
        json.dump(convert(mpc, args), f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
