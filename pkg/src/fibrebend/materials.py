"""Constitutive models and the material library.

Stresses in MPa, stretches dimensionless.  Hyperelastic energies are per unit
reference volume.  ``uniaxial_stress`` returns the Cauchy (true) stress on the
incompressible uniaxial path; the work-conjugate reference-area (nominal)
stress is ``uniaxial_stress(m, lam) / lam``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict


class MaterialError(ValueError):
    pass


@dataclass(frozen=True)
class MooneyRivlin:
    """Two-parameter incompressible model with optional volumetric term.

    W = c10 (I1b - 3) + c01 (I2b - 3) + (J - 1)^2 / d1
    """

    c10: float              # [MPa]
    c01: float              # [MPa]
    d1: float | None = None  # [1/MPa]; None means fully incompressible

    kind = "mooney_rivlin"


@dataclass(frozen=True)
class YeohFirstOrder:
    """W = c10 (I1b - 3); reduces Mooney-Rivlin with c01 = 0."""

    c10: float              # [MPa]

    kind = "yeoh1"


@dataclass(frozen=True)
class LinearElastic:
    """Engineering linear elasticity, used for the stiff phases."""

    modulus: float          # [MPa]
    poisson: float = 0.35

    kind = "linear"


Model = MooneyRivlin | YeohFirstOrder | LinearElastic


def _check_stretches(*lams: float) -> None:
    for lam in lams:
        if not lam > 0.0:
            raise MaterialError(f"stretch must be positive, got {lam}")


def strain_energy(model: Model, l1: float, l2: float, l3: float) -> float:
    """Energy density [MPa] at principal stretches (l1, l2, l3)."""
    _check_stretches(l1, l2, l3)
    if isinstance(model, LinearElastic):
        # small-strain quadratic in log stretches
        e = (math.log(l1), math.log(l2), math.log(l3))
        lam_l = (model.modulus * model.poisson
                 / ((1.0 + model.poisson) * (1.0 - 2.0 * model.poisson)))
        mu = model.modulus / (2.0 * (1.0 + model.poisson))
        tr = sum(e)
        return 0.5 * lam_l * tr * tr + mu * sum(x * x for x in e)
    j = l1 * l2 * l3
    i1 = l1 * l1 + l2 * l2 + l3 * l3
    i1b = i1 * j ** (-2.0 / 3.0)
    if isinstance(model, YeohFirstOrder):
        return model.c10 * (i1b - 3.0)
    i2 = (l1 * l2) ** 2 + (l2 * l3) ** 2 + (l3 * l1) ** 2
    i2b = i2 * j ** (-4.0 / 3.0)
    w = model.c10 * (i1b - 3.0) + model.c01 * (i2b - 3.0)
    if model.d1:
        w += (j - 1.0) ** 2 / model.d1
    return w


def uniaxial_energy(model: Model, lam) -> float:
    """1-D potential along the uniaxial path, conjugate to ``uniaxial_stress``.

    Hyperelastic models restrict the volumetric energy to the isochoric path
    (l2 = l3 = lam^-1/2).  For the linear models the engineering law
    sigma = E (lam - 1) is the definition; its work integral against the
    nominal stress gives E (lam - ln lam - 1).
    """
    if isinstance(model, LinearElastic):
        _check_stretches(lam)
        return model.modulus * (lam - math.log(lam) - 1.0)
    lat = lam ** -0.5
    return strain_energy(model, lam, lat, lat)


def uniaxial_stress(model: Model, lam: float) -> float:
    """Cauchy stress [MPa] on the incompressible uniaxial path."""
    _check_stretches(lam)
    if isinstance(model, LinearElastic):
        return model.modulus * (lam - 1.0)
    if isinstance(model, YeohFirstOrder):
        return 2.0 * model.c10 * (lam * lam - 1.0 / lam)
    return 2.0 * (lam * lam - 1.0 / lam) * (model.c10 + model.c01 / lam)


def tangent_modulus(model: Model, lam: float) -> float:
    """d(Cauchy stress)/d(stretch), analytic."""
    _check_stretches(lam)
    if isinstance(model, LinearElastic):
        return model.modulus
    if isinstance(model, YeohFirstOrder):
        return 2.0 * model.c10 * (2.0 * lam + lam ** -2)
    return (2.0 * (2.0 * lam + lam ** -2) * (model.c10 + model.c01 / lam)
            - 2.0 * (lam * lam - 1.0 / lam) * model.c01 * lam ** -2)


def small_strain_modulus(model: Model) -> float:
    """Tangent at the identity; the thin-wall hoop model uses this."""
    return tangent_modulus(model, 1.0)


# ---------------------------------------------------------------------------
# library


@dataclass(frozen=True)
class FibreProperties:
    radius: float            # [mm]
    modulus: float           # [MPa]
    poisson: float = 0.35

    @property
    def area(self) -> float:
        return math.pi * self.radius * self.radius

    @property
    def axial_stiffness(self) -> float:
        # E*A in N; the hoop model sums this per unit length of wall
        return self.modulus * self.area


@dataclass
class MaterialLibrary:
    """Named models for every phase of the build."""

    models: dict[str, Model]
    fibre: FibreProperties
    halved_fibre_radius: bool = False

    REQUIRED = ("ecoflex_00_50", "smooth_sil_960", "dragon_skin_30",
                "fiberglass_layer", "kevlar", "clear_v4")

    def __post_init__(self) -> None:
        missing = [n for n in self.REQUIRED if n not in self.models]
        if missing:
            raise MaterialError(f"library is missing required materials: {missing}")

    def __getitem__(self, name: str) -> Model:
        try:
            return self.models[name]
        except KeyError:
            raise MaterialError(f"unknown material {name!r}; have {sorted(self.models)}")

    @property
    def effective_fibre(self) -> FibreProperties:
        if self.halved_fibre_radius:
            return FibreProperties(0.5 * self.fibre.radius, self.fibre.modulus,
                                   self.fibre.poisson)
        return self.fibre

    # json round trip --------------------------------------------------------

    def to_dict(self) -> dict:
        out = {}
        for name, m in self.models.items():
            d = asdict(m)
            d["kind"] = m.kind
            out[name] = d
        return {"models": out, "fibre": asdict(self.fibre),
                "halved_fibre_radius": self.halved_fibre_radius}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @staticmethod
    def from_dict(data: dict) -> "MaterialLibrary":
        kinds = {"mooney_rivlin": MooneyRivlin, "yeoh1": YeohFirstOrder,
                 "linear": LinearElastic}
        models: dict[str, Model] = {}
        for name, d in data["models"].items():
            d = dict(d)
            kind = d.pop("kind")
            if kind not in kinds:
                raise MaterialError(f"unknown model kind {kind!r} for {name!r}")
            models[name] = kinds[kind](**d)
        fib = FibreProperties(**data["fibre"])
        return MaterialLibrary(models, fib, bool(data.get("halved_fibre_radius", False)))

    @staticmethod
    def from_json(text: str) -> "MaterialLibrary":
        return MaterialLibrary.from_dict(json.loads(text))


def default_library() -> MaterialLibrary:
    """Reference coefficients for the six build materials."""
    return MaterialLibrary(
        models={
            # soft chamber silicone
            "ecoflex_00_50": MooneyRivlin(c10=0.022, c01=0.001),
            # stiff cap silicone, nearly incompressible
            "smooth_sil_960": MooneyRivlin(c10=0.7, c01=0.265, d1=1.25e-9),
            # alternative body silicone
            "dragon_skin_30": MooneyRivlin(c10=0.12, c01=0.12),
            # inextensible fabric layer
            "fiberglass_layer": YeohFirstOrder(c10=3.95),
            # winding fibre, modelled as beams in the export path
            "kevlar": LinearElastic(modulus=40000.0, poisson=0.35),
            # printed mould / rigid fixture resin
            "clear_v4": LinearElastic(modulus=2800.0, poisson=0.35),
        },
        fibre=FibreProperties(radius=0.103, modulus=40000.0, poisson=0.35),
    )
