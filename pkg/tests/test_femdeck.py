import dataclasses

import numpy as np
import pytest

from fibrebend.femdeck import (
    DECK_MAGIC,
    FIBRE_ELEMENT,
    SOLID_ELEMENT,
    DeckError,
    build_deck,
    parse_deck,
    serialize_deck,
    smooth_amplitude,
)
from fibrebend.fiberpath import WindingSpec, generate_helix, mirror_path


@pytest.fixture(scope="module")
def deck_a(spec_a, library):
    path = generate_helix(spec_a, WindingSpec(style="SH", turns=100))
    return build_deck(spec_a, [path], library, p_max_kpa=100.0)


@pytest.fixture(scope="module")
def deck_b(spec_b, library):
    path = generate_helix(spec_b, WindingSpec(style="DH", turns=30))
    return build_deck(spec_b, [path, mirror_path(path)], library, p_max_kpa=80.0)


class TestSmoothAmplitude:
    def test_endpoints_exact(self):
        assert smooth_amplitude(0.0) == 0.0
        assert smooth_amplitude(1.0) == 1.0
        assert smooth_amplitude(0.5) == pytest.approx(0.5, abs=1e-15)

    def test_matches_quintic_polynomial(self):
        x = np.linspace(0.0, 1.0, 101)
        ref = 6.0 * x ** 5 - 15.0 * x ** 4 + 10.0 * x ** 3
        assert np.allclose(smooth_amplitude(x), ref, atol=1e-12)

    def test_end_derivatives_vanish(self):
        h = 1e-5
        d0 = (smooth_amplitude(h) - smooth_amplitude(0.0)) / h
        d1 = (smooth_amplitude(1.0) - smooth_amplitude(1.0 - h)) / h
        assert abs(d0) < 1e-8
        assert abs(d1) < 1e-8

    def test_monotone(self):
        x = np.linspace(0.0, 1.0, 1001)
        assert np.all(np.diff(smooth_amplitude(x)) >= 0.0)

    def test_range_enforced(self):
        with pytest.raises(DeckError):
            smooth_amplitude(1.5)
        with pytest.raises(DeckError):
            smooth_amplitude(np.array([0.2, -0.3]))


class TestBuild:
    def test_single_body_solid_group(self, deck_a):
        bodies = [s for s in deck_a.solids if s["name"] == "body"]
        assert len(bodies) == 1
        assert bodies[0]["material"] == "ecoflex_00_50"
        assert bodies[0]["element"] == SOLID_ELEMENT

    def test_one_fibre_set_tied_to_body(self, deck_a):
        assert len(deck_a.fibres) == 1
        f = deck_a.fibres[0]
        assert f["tie"] == "body"
        assert f["element"] == FIBRE_ELEMENT
        assert f["material"] == "kevlar"
        assert f["points"].shape[1] == 3

    def test_encastre_at_cap_base(self, deck_a):
        assert deck_a.boundary == {"kind": "encastre", "surface": "cap_base"}

    def test_single_pressure_load(self, deck_a):
        assert deck_a.load["surfaces"] == ["chamber_inner_0"]
        assert deck_a.load["p_max_kpa"] == 100.0
        assert deck_a.load["amplitude"] == "smoothstep"

    def test_fabric_layer_present_for_a(self, deck_a):
        assert [l["name"] for l in deck_a.layers] == ["inextensible_layer"]
        assert deck_a.layers[0]["material"] == "fiberglass_layer"

    def test_b_has_two_loads_two_fibres_no_layer(self, deck_b):
        assert deck_b.load["surfaces"] == ["chamber_inner_0", "chamber_inner_1"]
        assert len(deck_b.fibres) == 2
        assert deck_b.layers == []

    def test_missing_material_rejected(self, library):
        # a library without the winding material cannot even be constructed
        from fibrebend.materials import MaterialError
        with pytest.raises(MaterialError):
            dataclasses.replace(library,
                                models={k: v for k, v in library.models.items()
                                        if k != "kevlar"})


class TestSerialization:
    def test_roundtrip_equality(self, deck_a):
        text = serialize_deck(deck_a)
        assert text.startswith(DECK_MAGIC)
        back = parse_deck(text)
        assert back == deck_a
        assert serialize_deck(back) == text

    def test_roundtrip_b(self, deck_b):
        text = serialize_deck(deck_b)
        assert parse_deck(text) == deck_b

    def test_serialize_deterministic(self, spec_a, library):
        path = generate_helix(spec_a, WindingSpec(style="SH", turns=100))
        a = serialize_deck(build_deck(spec_a, [path], library))
        b = serialize_deck(build_deck(spec_a, [path], library))
        assert a == b

    def test_parse_rejects_bad_magic(self):
        with pytest.raises(DeckError):
            parse_deck("#SOMETHING-ELSE 1\n")

    def test_parse_rejects_truncated(self, deck_a):
        text = serialize_deck(deck_a)
        cut = text[: int(len(text) * 0.6)]
        with pytest.raises(DeckError):
            parse_deck(cut)

    def test_validation_catches_dangling_tag(self, deck_a):
        bad = dataclasses.replace(
            deck_a, load=dict(deck_a.load, surfaces=["chamber_inner_7"]))
        with pytest.raises(DeckError):
            bad.validate()

    def test_validation_catches_bad_amplitude(self, deck_a):
        bad = dataclasses.replace(deck_a, load=dict(deck_a.load, amplitude="ramp"))
        with pytest.raises(DeckError):
            bad.validate()

    def test_validation_catches_unknown_tie(self, deck_a):
        fibres = [dict(deck_a.fibres[0], tie="ghost")]
        bad = dataclasses.replace(deck_a, fibres=fibres)
        with pytest.raises(DeckError):
            bad.validate()
