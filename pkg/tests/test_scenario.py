import copy
import json

import numpy as np
import pytest

from inbuilding_rt.metrics import SpecMismatch
from inbuilding_rt.scenario import (BadValue, MissingKey, SCENARIO_DIR, UnknownMaterial, apply_overlay,
                                    apply_overrides, golden_path, load_document, load_scenario,
                                    parse_candidates, parse_scenario)


def minimal():
    return {
        "frequency_hz": 3.5e9,
        "room": {"dims": [3.5, 3.0, 3.0]},
        "window": {"wall": "x0", "center": [1.5, 1.5], "width": 1.75, "height": 1.5},
        "nodes": [{"role": "donor", "position_m": [0.0, 1.5, 1.5]},
                  {"role": "repeater", "position_m": [0.1, 0.5, 2.5]}],
    }


@pytest.mark.parametrize("name", ["case1", "case2"])
def test_golden_scenarios_load(name):
    sc = load_scenario(golden_path(name))
    assert sc.name == name
    assert len(sc.scene.surfaces) == 7
    assert sc.frequency_hz == 3.5e9
    assert sc.grid.shape == (61, 71)
    np.testing.assert_array_equal(sc.donor.boresight, [-1, 0, 0])
    np.testing.assert_allclose(sc.donor.position, [0, 1.5, 1.5])
    assert sc.donor.pattern.front_to_back_db == 25.0


def test_defaults_apply():
    sc = parse_scenario(minimal())
    assert sc.noise.bandwidth_hz == 100e6 and sc.noise.noise_figure_db == 9.0
    assert sc.tracer.max_reflections == 2 and sc.tracer.max_transmissions == 2
    assert sc.grid.resolution == 0.05 and sc.grid.height == 1.5
    assert sc.scene.surfaces[0].material.name == "concrete"
    assert sc.scene.surfaces[-1].material.name == "glass"
    assert sc.repeater.tx_power_dbm == 20.0


def test_minimal_document_equals_golden_case1():
    sc = parse_scenario(minimal())
    golden = load_scenario(golden_path("case1"))
    np.testing.assert_array_equal(sc.repeater.boresight, golden.repeater.boresight)
    assert sc.repeater.pattern == golden.repeater.pattern
    assert sc.grid == golden.grid
    for a, b in zip(sc.scene.surfaces, golden.scene.surfaces):
        assert a.material == b.material


def test_non_positive_dims():
    doc = minimal()
    doc["room"]["dims"] = [0, 3, 3]
    with pytest.raises(BadValue) as err:
        parse_scenario(doc)
    assert err.value.path == "room.dims"
    assert err.value.reason == "non-positive"


def test_missing_key():
    doc = minimal()
    del doc["frequency_hz"]
    with pytest.raises(MissingKey) as err:
        parse_scenario(doc)
    assert err.value.path == "frequency_hz"
    doc = minimal()
    del doc["nodes"][0]["position_m"]
    with pytest.raises(MissingKey, match=r"nodes\[0\]\.position_m"):
        parse_scenario(doc)


def test_unknown_material():
    doc = minimal()
    doc["room"]["material"] = "unobtainium"
    with pytest.raises(UnknownMaterial) as err:
        parse_scenario(doc)
    assert err.value.name == "unobtainium"


def test_custom_material():
    doc = minimal()
    doc["materials"] = [{"name": "drywall", "eps_r": 2.9, "sigma": 0.02, "thickness": 0.012}]
    doc["room"]["material"] = "drywall"
    sc = parse_scenario(doc)
    assert sc.scene.surfaces[0].material.conductivity(3.5e9) == 0.02


def test_donor_must_sit_on_window_plane():
    doc = minimal()
    doc["nodes"][0]["position_m"] = [0.2, 1.5, 1.5]
    with pytest.raises(BadValue, match="window plane"):
        parse_scenario(doc)


@pytest.mark.parametrize("mutate", [
    lambda d: d["nodes"].pop(),
    lambda d: d["nodes"].append(copy.deepcopy(d["nodes"][1])),
    lambda d: d["nodes"][1].update(role="relay"),
    lambda d: d["nodes"][1].update(position_m=[4.0, 1.0, 1.0]),
    lambda d: d.update(grid={"x_range": [0.0, 4.0]}),
    lambda d: d.update(grid={"resolution_m": 0}),
    lambda d: d.update(tracer={"max_reflections": 4}),
    lambda d: d["window"].update(width=5.0),
    lambda d: d["window"].update(wall="z0"),
    lambda d: d.update(frequency_hz="3.5 GHz"),
])
def test_invalid_documents(mutate):
    doc = minimal()
    mutate(doc)
    with pytest.raises(BadValue):
        parse_scenario(doc)


def test_invalid_json_text():
    with pytest.raises(BadValue):
        parse_scenario("{not json")


def test_overlay_reproduces_golden_file():
    base = load_document(golden_path("case1"))
    overlay = load_document(SCENARIO_DIR / "overlays" / "case2.json")
    merged = apply_overlay(base, overlay, "case2")
    assert merged == load_document(golden_path("case2"))


def test_overlay_cannot_change_room():
    base = load_document(golden_path("case1"))
    overlay = {"name": "bad", "room": {"dims": [4.0, 3.0, 3.0], "material": "concrete"}}
    with pytest.raises(SpecMismatch):
        apply_overlay(base, overlay, "bad")
    # restating an identical key is allowed
    same = {"room": base["room"], "nodes": base["nodes"]}
    assert apply_overlay(base, same, "same")["name"] == "same"


def test_overrides():
    doc = apply_overrides(minimal(), max_reflections=1, resolution=0.5)
    sc = parse_scenario(doc)
    assert sc.tracer.max_reflections == 1
    assert sc.grid.shape == (7, 8)


def test_ring_candidates(case1):
    cands = parse_candidates(load_document(golden_path("ring12")), case1.scene)
    assert len(cands) == 12
    np.testing.assert_allclose(cands[0], [0.1, 0.1, 2.5])
    for p in cands:
        assert p[2] == 2.5
        on_x = np.isclose(p[0], 0.1) or np.isclose(p[0], 3.4)
        on_y = np.isclose(p[1], 0.1) or np.isclose(p[1], 2.9)
        assert on_x or on_y


def test_positions_and_line_candidates(case1):
    pts = parse_candidates({"positions": [[1, 1, 1], [2, 2, 2]]}, case1.scene)
    assert [list(p) for p in pts] == [[1, 1, 1], [2, 2, 2]]
    line = parse_candidates({"line": {"start": [0.5, 0.5, 2], "end": [2.5, 0.5, 2], "count": 3}},
                            case1.scene)
    np.testing.assert_allclose(line[1], [1.5, 0.5, 2])


@pytest.mark.parametrize("doc", [{"positions": []}, {}, {"ring": {"count": 0}},
                                 {"positions": [[1, 1]]}, {"positions": [], "line": {}}])
def test_bad_candidates(doc, case1):
    with pytest.raises(BadValue):
        parse_candidates(doc, case1.scene)


def test_golden_files_round_trip():
    for name in ("case1", "case2"):
        text = golden_path(name).read_text()
        assert parse_scenario(text).name == name
        assert json.loads(text) == load_document(golden_path(name))
