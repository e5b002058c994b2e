#!/usr/bin/env python3
"""Regenerates the shipped topology and demand files.

Node names and adjacency follow the public Abilene (Internet2) and GEANT
backbones; the GEANT edge list is a simplified synthetic variant. Link
capacities, compute capacities, VNF placement and costs, and all demands
are synthetic and drawn from a fixed seed.
"""
import random
from pathlib import Path

VNFS = ["fw", "ids", "nat", "lb"]

INTERNET2_NODES = [
    "ATLAM5", "ATLAng", "CHINng", "DNVRng", "HSTNng", "IPLSng",
    "KSCYng", "LOSAng", "NYCMng", "SNVAng", "STTLng", "WASHng",
]
INTERNET2_EDGES = [
    ("ATLAM5", "ATLAng"), ("ATLAng", "HSTNng"), ("ATLAng", "IPLSng"),
    ("ATLAng", "WASHng"), ("CHINng", "IPLSng"), ("CHINng", "NYCMng"),
    ("DNVRng", "KSCYng"), ("DNVRng", "SNVAng"), ("DNVRng", "STTLng"),
    ("HSTNng", "KSCYng"), ("HSTNng", "LOSAng"), ("IPLSng", "KSCYng"),
    ("LOSAng", "SNVAng"), ("NYCMng", "WASHng"), ("SNVAng", "STTLng"),
]

GEANT_NODES = [
    "at1", "be1", "ch1", "cz1", "de1", "es1", "fr1", "gr1", "hr1", "hu1", "ie1",
    "il1", "it1", "lu1", "nl1", "ny1", "pl1", "pt1", "se1", "si1", "sk1", "uk1",
]
GEANT_EDGES = [
    ("at1", "ch1"), ("at1", "de1"), ("at1", "hu1"), ("at1", "si1"), ("at1", "sk1"),
    ("be1", "fr1"), ("be1", "nl1"), ("be1", "lu1"), ("ch1", "fr1"), ("ch1", "it1"),
    ("cz1", "de1"), ("cz1", "pl1"), ("cz1", "sk1"), ("de1", "fr1"), ("de1", "it1"),
    ("de1", "nl1"), ("de1", "se1"), ("de1", "il1"), ("es1", "fr1"), ("es1", "it1"),
    ("es1", "pt1"), ("fr1", "lu1"), ("fr1", "uk1"), ("gr1", "it1"), ("gr1", "de1"),
    ("hr1", "hu1"), ("hr1", "si1"), ("hu1", "sk1"), ("ie1", "uk1"), ("ie1", "ny1"),
    ("il1", "it1"), ("nl1", "uk1"), ("pl1", "se1"), ("pt1", "uk1"), ("se1", "uk1"),
    ("ny1", "uk1"),
]


def topology(name, nodes, edges, rng, capacity, compute):
    out = [f"# {name}: {len(nodes)} nodes, {2 * len(edges)} directed links",
           "# capacities, compute, VNF placement and costs are synthetic"]
    for v in nodes:
        out.append(f"node {v} {rng.uniform(*compute):.1f}")
    for f in VNFS:
        out.append(f"vnf {f}")
    for v in nodes:
        for f in VNFS:
            if rng.random() < 0.35:
                out.append(f"vnfcost {v} {f} {rng.uniform(0.2, 1.0):.2f}")
    for a, b in edges:
        c = rng.choice(capacity)
        out.append(f"link {a}-{b} {a} {b} {c}")
        out.append(f"link {b}-{a} {b} {a} {c}")
    return "\n".join(out) + "\n"


def demands(name, nodes, count, rng, volume):
    out = [f"# {name}: {count} synthetic service demands"]
    for i in range(count):
        s, t = rng.sample(nodes, 2)
        chain = rng.sample(VNFS, rng.randint(0, 2))
        out.append(f"demand {i} {s} {t} {rng.uniform(*volume):.2f} {','.join(chain) or '-'}")
    return "\n".join(out) + "\n"


def main():
    here = Path(__file__).resolve().parent
    rng = random.Random(2019)
    (here / "internet2.topo").write_text(
        topology("internet2", INTERNET2_NODES, INTERNET2_EDGES, rng, [150, 200, 250, 300], (60, 160)))
    (here / "internet2.demands").write_text(demands("internet2", INTERNET2_NODES, 130, rng, (1, 10)))
    (here / "geant.topo").write_text(
        topology("geant", GEANT_NODES, GEANT_EDGES, rng, [150, 200, 250, 300], (60, 160)))
    (here / "geant.demands").write_text(demands("geant", GEANT_NODES, 250, rng, (1, 10)))


if __name__ == "__main__":
    main()
