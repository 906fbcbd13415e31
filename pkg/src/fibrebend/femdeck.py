"""Neutral FEM exchange deck.

A line-oriented keyword format describing the simulation setup: geometry
payload, fibre polylines as beam sets tied to the matrix, material roles,
the fixed cap-base surface, and the smooth pressure ramp on the chamber
walls.  The format is solver-agnostic; a thin adapter can translate it to
any solver's native deck.  Grammar reference lives in docs/formats.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ActuatorSpec
from .materials import MaterialLibrary
from .fiberpath import FiberPath

DECK_MAGIC = "#FIBREBEND-DECK 1"

SOLID_ELEMENT = "quadratic-tet-hybrid"
FIBRE_ELEMENT = "quadratic-beam"


class DeckError(ValueError):
    pass


def smooth_amplitude(xi):
    """Quintic smooth step: 0 to 1 with zero end slopes and curvatures."""
    x = np.asarray(xi, dtype=float)
    if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
        raise DeckError(f"amplitude argument outside [0, 1]: {xi!r}")
    x = np.clip(x, 0.0, 1.0)
    out = x ** 3 * (10.0 - 15.0 * x + 6.0 * x ** 2)
    return float(out) if np.isscalar(xi) else out


@dataclass(eq=False)
class FemDeck:
    """Complete neutral description of one quasi-static pressurisation run."""

    spec: ActuatorSpec
    surfaces: dict                 # tag -> descriptor dict
    solids: list                   # [{name, material, element}]
    layers: list                   # [{name, material}] inextensible sheets
    fibres: list                   # [{name, material, element, tie, points}]
    boundary: dict                 # {kind: "encastre", surface: tag}
    load: dict                     # {surfaces: [tags], p_max_kpa, amplitude}
    schema: str = "1"

    def validate(self) -> None:
        if self.boundary.get("kind") != "encastre":
            raise DeckError("deck needs exactly one encastre boundary")
        tags = set(self.surfaces)
        if self.boundary["surface"] not in tags:
            raise DeckError(f"encastre references undefined surface "
                            f"{self.boundary['surface']!r}")
        for tag in self.load["surfaces"]:
            if tag not in tags:
                raise DeckError(f"pressure load references undefined surface {tag!r}")
        solid_names = {s["name"] for s in self.solids}
        for f in self.fibres:
            if f["tie"] not in solid_names:
                raise DeckError(f"fibre set {f['name']!r} tied to unknown solid "
                                f"{f['tie']!r}")
        amp = self.load.get("amplitude")
        if amp != "smoothstep":
            raise DeckError(f"unknown amplitude curve {amp!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, FemDeck):
            return NotImplemented
        if (self.schema != other.schema
                or self.spec.to_json() != other.spec.to_json()
                or self.surfaces != other.surfaces
                or self.solids != other.solids
                or self.layers != other.layers
                or self.boundary != other.boundary
                or self.load != other.load
                or len(self.fibres) != len(other.fibres)):
            return False
        for a, b in zip(self.fibres, other.fibres):
            keys = {k for k in a if k != "points"}
            if keys != {k for k in b if k != "points"}:
                return False
            if any(a[k] != b[k] for k in keys):
                return False
            if not np.array_equal(a["points"], b["points"]):
                return False
        return True


def build_deck(spec: ActuatorSpec, paths: list[FiberPath],
               materials: MaterialLibrary, p_max_kpa: float = 100.0) -> FemDeck:
    """Assemble the deck for one actuator with its windings."""
    for name in ("ecoflex_00_50", "smooth_sil_960", "fiberglass_layer", "kevlar"):
        materials[name]  # raises MaterialError when missing

    surfaces = {"cap_base": {"kind": "plane", "axis": "z", "offset": 0.0}}
    load_tags = []
    for i in range(len(spec.chamber_polygons)):
        tag = f"chamber_inner_{i}"
        surfaces[tag] = {"kind": "chamber_wall", "chamber": i}
        load_tags.append(tag)

    solids = [{"name": "body", "material": "ecoflex_00_50", "element": SOLID_ELEMENT},
              {"name": "cap", "material": "smooth_sil_960", "element": SOLID_ELEMENT}]
    layers = []
    if spec.neutral_y is not None:
        layers.append({"name": "inextensible_layer", "material": "fiberglass_layer"})

    fibres = []
    for i, path in enumerate(paths):
        fibres.append({"name": f"winding_{i}", "material": "kevlar",
                       "element": FIBRE_ELEMENT, "tie": "body",
                       "style": path.style, "turns": path.turns,
                       "chirality": path.chirality,
                       "points": np.asarray(path.points, dtype=float)})

    deck = FemDeck(
        spec=spec, surfaces=surfaces, solids=solids, layers=layers, fibres=fibres,
        boundary={"kind": "encastre", "surface": "cap_base"},
        load={"surfaces": load_tags, "p_max_kpa": float(p_max_kpa),
              "amplitude": "smoothstep"},
    )
    deck.validate()
    return deck


# ---------------------------------------------------------------------------
# serialization


def _fmt(v: float) -> str:
    return repr(float(v))


def serialize_deck(deck: FemDeck) -> str:
    """Deterministic text form; byte-identical for equal decks."""
    deck.validate()
    out = [DECK_MAGIC, f"SCHEMA {deck.schema}"]
    out.append("BEGIN GEOMETRY")
    out.append(deck.spec.to_json())
    out.append("END GEOMETRY")
    for tag in sorted(deck.surfaces):
        d = deck.surfaces[tag]
        out.append(f"BEGIN SURFACE {tag}")
        for k in sorted(d):
            out.append(f"  {k} {d[k]}")
        out.append("END SURFACE")
    for s in deck.solids:
        out.append(f"BEGIN SOLID {s['name']}")
        out.append(f"  material {s['material']}")
        out.append(f"  element {s['element']}")
        out.append("END SOLID")
    for l in deck.layers:
        out.append(f"BEGIN LAYER {l['name']}")
        out.append(f"  material {l['material']}")
        out.append("END LAYER")
    for f in deck.fibres:
        out.append(f"BEGIN FIBRE {f['name']}")
        out.append(f"  material {f['material']}")
        out.append(f"  element {f['element']}")
        out.append(f"  tie {f['tie']}")
        out.append(f"  style {f['style']}")
        out.append(f"  turns {f['turns']}")
        out.append(f"  chirality {f['chirality']}")
        out.append(f"  points {len(f['points'])}")
        for x, y, z in f["points"]:
            out.append(f"    {_fmt(x)} {_fmt(y)} {_fmt(z)}")
        out.append("END FIBRE")
    out.append("BEGIN BOUNDARY encastre")
    out.append(f"  surface {deck.boundary['surface']}")
    out.append("END BOUNDARY")
    out.append("BEGIN LOAD pressure")
    out.append(f"  surfaces {' '.join(deck.load['surfaces'])}")
    out.append(f"  p_max_kpa {_fmt(deck.load['p_max_kpa'])}")
    out.append(f"  amplitude {deck.load['amplitude']}")
    out.append("END LOAD")
    return "\n".join(out) + "\n"


def parse_deck(text: str) -> FemDeck:
    """Inverse of serialize_deck; validates the result."""
    lines = text.splitlines()
    if not lines or lines[0] != DECK_MAGIC:
        raise DeckError("not a deck file (missing magic line)")
    if len(lines) < 2 or not lines[1].startswith("SCHEMA "):
        raise DeckError("missing SCHEMA line")
    schema = lines[1].split(" ", 1)[1]

    spec = None
    surfaces: dict = {}
    solids: list = []
    layers: list = []
    fibres: list = []
    boundary: dict = {}
    load: dict = {}

    i = 2
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if not line.startswith("BEGIN "):
            raise DeckError(f"expected BEGIN block at line {i + 1}: {line!r}")
        _, kind, *rest = line.split(" ")
        name = rest[0] if rest else ""
        body = []
        i += 1
        while i < len(lines) and lines[i].strip() != f"END {kind}":
            body.append(lines[i])
            i += 1
        if i >= len(lines):
            raise DeckError(f"unterminated block {kind} {name}")
        i += 1

        kv = {}
        for ln in body:
            parts = ln.strip().split(" ", 1)
            if len(parts) == 2:
                kv[parts[0]] = parts[1]

        if kind == "GEOMETRY":
            spec = ActuatorSpec.from_json("\n".join(b.strip() for b in body))
        elif kind == "SURFACE":
            desc = {}
            for k, v in kv.items():
                if k in ("offset",):
                    desc[k] = float(v)
                elif k in ("chamber",):
                    desc[k] = int(v)
                else:
                    desc[k] = v
            surfaces[name] = desc
        elif kind == "SOLID":
            solids.append({"name": name, "material": kv["material"],
                           "element": kv["element"]})
        elif kind == "LAYER":
            layers.append({"name": name, "material": kv["material"]})
        elif kind == "FIBRE":
            n_pts = int(kv["points"])
            pts = []
            for ln in body:
                f = ln.split()
                if len(f) == 3 and f[0] not in ("material", "element", "tie",
                                                "style", "turns", "chirality", "points"):
                    pts.append([float(v) for v in f])
            if len(pts) != n_pts:
                raise DeckError(f"fibre {name}: declared {n_pts} points, found {len(pts)}")
            fibres.append({"name": name, "material": kv["material"],
                           "element": kv["element"], "tie": kv["tie"],
                           "style": kv["style"], "turns": int(kv["turns"]),
                           "chirality": kv["chirality"],
                           "points": np.array(pts).reshape(n_pts, 3)})
        elif kind == "BOUNDARY":
            boundary = {"kind": name, "surface": kv["surface"]}
        elif kind == "LOAD":
            load = {"surfaces": kv["surfaces"].split(" "),
                    "p_max_kpa": float(kv["p_max_kpa"]),
                    "amplitude": kv["amplitude"]}
        else:
            raise DeckError(f"unknown block kind {kind!r}")

    if spec is None:
        raise DeckError("deck has no GEOMETRY block")
    deck = FemDeck(spec=spec, surfaces=surfaces, solids=solids, layers=layers,
                   fibres=fibres, boundary=boundary, load=load, schema=schema)
    deck.validate()
    return deck
