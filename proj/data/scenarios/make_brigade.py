#!/usr/bin/env python3
"""Regenerates brigade.yaml: a 10x6 grid (5 km spacing), 20 units, 8 goals."""
import sys

import yaml

COLS, ROWS, SPACING = 10, 6, 5.0
ROAD_ROW = 1
FOREST = {(3, 3), (3, 4), (4, 4), (6, 2), (6, 3)}
MARSH = {(2, 5), (7, 0), (8, 0)}


def nid(c, r):
    return f"c{c:02d}r{r}"


def terrain():
    nodes, edges = [], []
    for c in range(COLS):
        for r in range(ROWS):
            cls = "severely_restricted" if (c, r) in MARSH else "restricted" if (c, r) in FOREST else "open"
            nodes.append({"id": nid(c, r), "x": c * SPACING, "y": r * SPACING, "mobility_class": cls})
    for c in range(COLS):
        for r in range(ROWS):
            for dc, dr in ((1, 0), (0, 1)):
                c2, r2 = c + dc, r + dr
                if c2 >= COLS or r2 >= ROWS:
                    continue
                if {(c, r), (c2, r2)} & MARSH:
                    factor = 0.4
                elif {(c, r), (c2, r2)} & FOREST:
                    factor = 0.6
                elif r == r2 == ROAD_ROW:
                    factor = 1.0
                else:
                    factor = 0.8
                edges.append({"from": nid(c, r), "to": nid(c2, r2), "length": SPACING, "mobility_factor": factor})
    return {"nodes": nodes, "edges": edges}


def unit(uid, side, echelon, utype, loc, superior="", caps=(), **kw):
    u = {"id": uid, "allegiance": side, "nation": "A" if side == "friendly" else "B", "echelon": echelon,
         "unit_type": utype, "location": loc}
    if superior:
        u["superior"] = superior
    if caps:
        u["capabilities"] = list(caps)
    u.update(kw)
    return u


def units():
    out = [unit("1bde", "friendly", "brigade", "brigade-hq", nid(0, 3), caps=["command"],
                personnel=120, combat_power=5, speed=30, support_range=20, supply_level=100)]
    battalions = [("1-66ar", "armor", nid(1, 2)), ("2-12in", "mechanized", nid(1, 3)), ("3-22in", "mechanized", nid(1, 4))]
    for bn, kind, loc in battalions:
        out.append(unit(bn, "friendly", "battalion", f"{kind}-battalion", loc, "1bde", ["command", kind],
                        personnel=60, combat_power=5, speed=25, weapon_range=3, supply_level=100))
        col, row = int(loc[1:3]), int(loc[4:])
        for i, co in enumerate(("a", "b")):
            out.append(unit(f"{co}-{bn}", "friendly", "company", f"{kind}-company", nid(col, row), bn, [kind],
                            personnel=110, systems=14, combat_power=40 if kind == "armor" else 30, speed=25,
                            weapon_range=3, supply_level=100))
    out.append(unit("4-42fa", "friendly", "battalion", "field-artillery", nid(1, 3), "1bde",
                    ["indirect-fire", "counter-battery"], personnel=300, systems=18, combat_power=20, speed=20,
                    weapon_range=40, supply_level=100))
    out.append(unit("d-troop", "friendly", "company", "cavalry-troop", nid(1, 1), "1bde", ["reconnaissance"],
                    personnel=90, systems=9, combat_power=20, speed=40, weapon_range=4, supply_level=100))
    out.append(unit("40-en", "friendly", "company", "engineer-company", nid(0, 2), "1bde", ["engineer"],
                    personnel=100, combat_power=10, speed=20, weapon_range=2, supply_level=100))
    out.append(unit("uav-plt", "friendly", "platoon", "uav-platoon", nid(0, 4), "1bde", ["uav"],
                    personnel=25, systems=3, speed=15, supply_level=100))
    out.append(unit("fwd-trains", "friendly", "company", "field-trains", nid(0, 3), "1bde", ["resupply"],
                    personnel=80, speed=30, support_range=15, supply_level=400))
    out.append(unit("en-mech-1", "enemy", "company", "mechanized-company", nid(5, 2), caps=["mechanized"],
                    personnel=100, combat_power=35, weapon_range=3, supply_level=100))
    out.append(unit("en-mech-2", "enemy", "company", "mechanized-company", nid(8, 3), caps=["mechanized"],
                    personnel=100, combat_power=30, weapon_range=3, supply_level=100))
    out.append(unit("en-tank", "enemy", "company", "tank-company", nid(7, 2), caps=["armor"],
                    personnel=60, combat_power=45, speed=25, weapon_range=3, supply_level=100))
    out.append(unit("en-arty", "enemy", "battalion", "artillery-battalion", nid(7, 5),
                    caps=["indirect-fire", "counter-battery"], personnel=200, combat_power=15, speed=15,
                    weapon_range=40, supply_level=100))
    out.append(unit("en-recon", "enemy", "platoon", "recon-platoon", nid(4, 1), caps=["reconnaissance"],
                    personnel=30, combat_power=8, speed=35, weapon_range=3, supply_level=100))
    return out


def measures():
    return [
        {"id": "OBJ-A", "kind": "objective_area", "nodes": [nid(5, 2), nid(5, 3)]},
        {"id": "OBJ-B", "kind": "objective_area", "nodes": [nid(8, 3), nid(8, 4)]},
        {"id": "AXIS-N", "kind": "axis", "nodes": [nid(6, 1), nid(5, 1), nid(4, 1), nid(3, 1), nid(2, 1)]},
        {"id": "PL-RED", "kind": "phase_line", "nodes": [nid(4, r) for r in range(ROWS)]},
    ]


def goals():
    return [
        {"id": "g1-attack", "task_type": "attack", "intent": "seize", "executor": "1bde", "target": "OBJ-A"},
        {"id": "g2-seize-b", "task_type": "seize", "intent": "seize", "executor": "3-22in", "target": "OBJ-B",
         "relations": [{"goal": "g1-attack", "relation": "starts_after_end_of", "offset": 0}]},
        {"id": "g3-zone-recon", "task_type": "zone-reconnaissance", "intent": "reconnoiter", "executor": "d-troop",
         "target": "AXIS-N"},
        {"id": "g4-isr", "task_type": "isr-coverage", "intent": "reconnoiter", "executor": "uav-plt", "target": "OBJ-B"},
        {"id": "g5-prep-fires", "task_type": "preparatory-fires", "intent": "suppress", "executor": "4-42fa",
         "target": "OBJ-B", "relations": [{"goal": "g2-seize-b", "relation": "ends_before_start_of", "offset": 0}]},
        {"id": "g6-sustain", "task_type": "sustainment-operations", "intent": "resupply", "executor": "fwd-trains",
         "target": "2-12in", "not_before": 120},
        {"id": "g7-mobility", "task_type": "mobility-support", "intent": "breach", "executor": "40-en",
         "target": "OBJ-B"},
        {"id": "g8-destroy", "task_type": "close-with-and-engage", "intent": "destroy", "executor": "2-12in",
         "target": "en-tank", "relations": [{"goal": "g1-attack", "relation": "starts_after_end_of", "offset": 30}]},
    ]


def main():
    doc = {"schema_version": 1, "name": "brigade attack", "clock_origin": "H-hour", "terrain": terrain(),
           "units": units(), "measures": measures(), "goals": goals()}
    out = sys.argv[1] if len(sys.argv) > 1 else "brigade.yaml"
    with open(out, "w") as f:
        f.write("# Generated by make_brigade.py; edit the script, not this file.\n")
        yaml.safe_dump(doc, f, sort_keys=False, default_flow_style=None, width=120)


if __name__ == "__main__":
    main()
