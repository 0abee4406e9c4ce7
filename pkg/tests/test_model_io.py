"""Model file round trips, schema diagnostics, deterministic exports."""

import json
import xml.dom.minidom

import numpy as np
import pytest

from beamtie import model_io, models, solver
from beamtie.model import State


@pytest.fixture
def small_model():
    return models.patch_test_planar("hex8", "CONS", cells=(2, 2, 2))


def _minimal_doc():
    return {
        "name": "minimal",
        "solid": {
            "kind": "hex8",
            "nodes": [
                [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
                [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
            ],
            "elements": [[0, 1, 2, 3, 4, 5, 6, 7]],
            "face_sets": {"top": [[0, 1]]},
            "node_sets": {"bottom": [0, 1, 2, 3]},
        },
        "material": {"model": "SaintVenantKirchhoff", "E": 1.0, "nu": 0.0},
        "beam": {
            "nodes": [
                {"r": [0.2, 0.5, 1.1], "t": [1, 0, 0]},
                {"r": [0.8, 0.5, 1.1], "t": [1, 0, 0]},
            ],
            "elements": [[0, 1]],
            "section": {"radius": 0.05, "E": 100.0, "nu": 0.0},
        },
        "coupling": {"variant": "CONS", "eps_r": 10.0, "faces": ["top"]},
        "bcs": {"dirichlet": [{"node_set": "bottom", "components": [0, 1, 2]}]},
    }


def test_minimal_model_loads(tmp_path):
    path = tmp_path / "minimal.json"
    path.write_text(json.dumps(_minimal_doc()))
    model = model_io.load_model(path)
    assert model.solid.n_nodes == 8
    assert model.beam.n_nodes == 2
    assert model.coupling.variant == "CONS"
    # omitted triads default to smallest-rotation frames of the tangent
    np.testing.assert_allclose(model.beam.triads0[0], np.eye(3), atol=1e-14)


def test_roundtrip_semantic_equality(tmp_path, small_model):
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    model_io.save_model(small_model, p1, solve=solver.SolveConfig(steps=3))
    m2 = model_io.load_model(p1)
    model_io.save_model(m2, p2, solve=model_io.load_solve_config(p1))
    assert p1.read_bytes() == p2.read_bytes()
    np.testing.assert_allclose(m2.solid.X, small_model.solid.X)
    np.testing.assert_allclose(m2.beam.triads0, small_model.beam.triads0, atol=1e-14)
    assert m2.coupling.eps_r == small_model.coupling.eps_r
    assert model_io.load_solve_config(p1).steps == 3


@pytest.mark.parametrize(
    "mutate,fragment",
    [
        (lambda d: d["solid"].pop("kind"), "$.solid.kind"),
        (lambda d: d["solid"].update(kind="hex9"), "$.solid.kind"),
        (lambda d: d["coupling"].update(faces=["missing"]), "missing"),
        (lambda d: d["beam"]["nodes"][0].pop("r"), "$.beam.nodes[0].r"),
        (
            lambda d: d["bcs"]["dirichlet"][0].update(node_set="nope"),
            "$.bcs.dirichlet[0].node_set",
        ),
        (lambda d: d["material"].update(model="Rubber"), "$.material.model"),
    ],
)
def test_schema_errors_carry_json_paths(tmp_path, mutate, fragment):
    doc = _minimal_doc()
    mutate(doc)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(model_io.SchemaError, match=fragment.replace("$", "\\$")
                       .replace("[", "\\[").replace("]", "\\]")):
        model_io.load_model(path)


def test_invalid_json_reported(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(model_io.SchemaError, match="invalid JSON"):
        model_io.load_model(path)


def test_exports_parse_and_count(tmp_path, small_model):
    state = State.reference(small_model)
    vtu = tmp_path / "solid.vtu"
    vtp = tmp_path / "beam.vtp"
    model_io.export_vtu(small_model, state, vtu)
    model_io.export_beam_vtp(small_model, state, vtp)
    dom = xml.dom.minidom.parse(str(vtu))
    piece = dom.getElementsByTagName("Piece")[0]
    assert int(piece.getAttribute("NumberOfPoints")) == small_model.solid.n_nodes
    assert int(piece.getAttribute("NumberOfCells")) == small_model.solid.n_elements
    dom = xml.dom.minidom.parse(str(vtp))
    piece = dom.getElementsByTagName("Piece")[0]
    assert int(piece.getAttribute("NumberOfPoints")) == 5 * small_model.beam.n_elements
    # zero state: all displacement entries are zero
    for arr in dom.getElementsByTagName("DataArray"):
        if arr.getAttribute("Name") == "displacement":
            vals = [float(x) for x in arr.firstChild.data.split()]
            assert max(abs(v) for v in vals) == 0.0


def test_export_byte_determinism(tmp_path, small_model):
    state = State.reference(small_model)
    state.d_solid += 0.01 * np.random.default_rng(0).standard_normal(
        state.d_solid.shape
    )
    a = tmp_path / "a.vtu"
    b = tmp_path / "b.vtu"
    model_io.export_vtu(small_model, state, a)
    model_io.export_vtu(small_model, state, b)
    assert a.read_bytes() == b.read_bytes()


def test_report_files(tmp_path):
    base = str(tmp_path / "rep")
    txt, js = model_io.write_report(
        {"energy": 0.5, "force": np.array([1.0, 2.0, 3.0]), "ok": True}, base
    )
    data = json.loads(open(js).read())
    assert data["energy"] == 0.5
    assert data["force"] == [1.0, 2.0, 3.0]
    assert "energy: 0.5" in open(txt).read()
