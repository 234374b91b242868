#!/usr/bin/env python3
"""Regenerates the small canned scenarios: minimal, seize, close-with-and-engage, wargame."""
import os
import sys

import yaml


def nid(c, r):
    return f"n{c}{r}"


def grid(cols, rows, spacing=4.0, forest=()):
    nodes, edges = [], []
    for c in range(cols):
        for r in range(rows):
            cls = "restricted" if (c, r) in forest else "open"
            nodes.append({"id": nid(c, r), "x": c * spacing, "y": r * spacing, "mobility_class": cls})
    for c in range(cols):
        for r in range(rows):
            for dc, dr in ((1, 0), (0, 1)):
                c2, r2 = c + dc, r + dr
                if c2 >= cols or r2 >= rows:
                    continue
                factor = 0.6 if {(c, r), (c2, r2)} & set(forest) else 0.9
                edges.append({"from": nid(c, r), "to": nid(c2, r2), "length": spacing, "mobility_factor": factor})
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


def company(uid, loc, superior="", kind="armor", power=40):
    return unit(uid, "friendly", "company", f"{kind}-company", loc, superior, [kind], personnel=100, systems=14,
                combat_power=power, speed=25, weapon_range=3, supply_level=100)


def enemy(uid, loc, utype="mechanized-company", caps=("mechanized",), power=20, **kw):
    base = {"personnel": 90, "combat_power": power, "speed": 20, "weapon_range": 3, "supply_level": 100}
    base.update(kw)
    return unit(uid, "enemy", "company", utype, loc, caps=caps, **base)


def doc(name, terrain, units, measures, goals):
    return {"schema_version": 1, "name": name, "clock_origin": "H-hour", "terrain": terrain, "units": units,
            "measures": measures, "goals": goals}


def minimal():
    terrain = grid(3, 1)
    units = [company("a-co", nid(0, 0))]
    goals = [{"id": "g1", "task_type": "tactical-move", "intent": "move", "executor": "a-co", "target": "END"}]
    return doc("minimal", terrain, units, [{"id": "END", "kind": "position", "nodes": [nid(2, 0)]}], goals)


def seize():
    terrain = grid(5, 3, forest=[(2, 2)])
    units = [company("a-co", nid(0, 1), kind="mechanized", power=40)]
    units.append(enemy("en-plt", nid(4, 1), power=10))
    measures = [{"id": "OBJ-X", "kind": "objective_area", "nodes": [nid(4, 1), nid(4, 2)]}]
    goals = [{"id": "g1-seize", "task_type": "seize", "intent": "seize", "executor": "a-co", "target": "OBJ-X"}]
    return doc("canned seize", terrain, units, measures, goals)


def close_with_and_engage():
    terrain = grid(5, 3)
    units = [company("b-co", nid(0, 1), power=45)]
    units.append(enemy("en-co", nid(3, 1), power=20))
    goals = [{"id": "g1-engage", "task_type": "close-with-and-engage", "intent": "destroy", "executor": "b-co",
              "target": "en-co"}]
    return doc("canned close with and engage", terrain, units, [], goals)


def wargame():
    terrain = grid(6, 4, forest=[(2, 2), (3, 2)])
    units = [unit("1-tf", "friendly", "battalion", "armor-battalion", nid(0, 1), caps=["command", "armor"],
                  personnel=60, combat_power=5, speed=25, weapon_range=3, supply_level=100),
             company("a-1-tf", nid(0, 1), "1-tf"),
             company("b-1-tf", nid(0, 2), "1-tf", kind="mechanized", power=30),
             unit("2-fa", "friendly", "battalion", "field-artillery", nid(0, 3), caps=["indirect-fire", "counter-battery"],
                  personnel=250, systems=12, combat_power=15, speed=20, weapon_range=35, supply_level=100),
             unit("trains", "friendly", "company", "field-trains", nid(0, 0), caps=["resupply"], personnel=60,
                  speed=30, support_range=15, supply_level=300)]
    units += [enemy("en-mech", nid(4, 1), power=30),
              enemy("en-tank", nid(5, 2), "tank-company", ("armor",), power=35, speed=25),
              enemy("en-arty", nid(5, 3), "artillery-battalion", ("indirect-fire", "counter-battery"), power=12,
                    speed=15, weapon_range=35)]
    measures = [{"id": "OBJ-W", "kind": "objective_area", "nodes": [nid(4, 1), nid(4, 2)]},
                {"id": "POS-E", "kind": "position", "nodes": [nid(4, 1)]}]
    goals = [
        {"id": "f1-attack", "task_type": "attack", "intent": "seize", "executor": "1-tf", "target": "OBJ-W"},
        {"id": "f2-fires", "task_type": "preparatory-fires", "intent": "suppress", "executor": "2-fa",
         "target": "en-mech", "relations": [{"goal": "f1-attack", "relation": "starts_with", "offset": 0}]},
        {"id": "e1-defend", "task_type": "defend-area", "intent": "defend", "executor": "en-mech", "target": "POS-E"},
        {"id": "e2-fires", "task_type": "fire-support", "intent": "suppress", "executor": "en-arty",
         "target": "a-1-tf"},
        {"id": "e3-counterattack", "task_type": "counterattack", "intent": "destroy", "executor": "en-tank",
         "target": "b-1-tf", "not_before": 90},
    ]
    return doc("wargame", terrain, units, measures, goals)


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
    for name, build in (("minimal", minimal), ("seize", seize), ("close-with-and-engage", close_with_and_engage),
                        ("wargame", wargame)):
        with open(os.path.join(out_dir, f"{name}.yaml"), "w") as f:
            f.write("# Generated by make_canned.py; edit the script, not this file.\n")
            yaml.safe_dump(build(), f, sort_keys=False, default_flow_style=None, width=120)


if __name__ == "__main__":
    main()
