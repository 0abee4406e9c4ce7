"""Model file ingestion (JSON) and results export (VTU/VTP, run reports).

The model file is a single JSON document with sections for the solid
mesh, material, beam, coupling configuration, loads, boundary conditions
and optional solver settings.  All quantities are SI (m, N, N/m, N/m^2,
N/m^3).  Exported files are ASCII XML with a fixed field order and fixed
17-significant-digit number formatting, so identical inputs produce
byte-identical outputs.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import beam_fem as bf
from . import so3
from . import solid_fem as sf
from .model import Model, State
from .mortar import CouplingConfig
from .solver import SolveConfig

__all__ = [
    "SchemaError",
    "load_model",
    "load_solve_config",
    "save_model",
    "export_vtu",
    "export_beam_vtp",
    "write_report",
]

_VTK_CELL_TYPE = {"hex8": 12, "hex20": 25, "hex27": 29, "tet4": 10, "tet10": 24}


class SchemaError(ValueError):
    """Model file violates the expected schema; message carries a JSON path."""


def _fmt(x):
    return "%.17g" % float(x)


# ---------------------------------------------------------------------------
# schema helpers
# ---------------------------------------------------------------------------


def _get(obj, key, path, kind=None, default=KeyError):
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object")
    if key not in obj:
        if default is KeyError:
            raise SchemaError(f"{path}.{key}: missing required key")
        return default
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"{path}.{key}: expected {kind.__name__}")
    return val


def _vec3(val, path):
    try:
        v = np.asarray(val, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: not numeric") from exc
    if v.shape != (3,):
        raise SchemaError(f"{path}: expected a 3-vector")
    return v


def _array(val, path, width=None):
    try:
        a = np.asarray(val, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: not numeric") from exc
    if a.ndim != 2 or (width is not None and a.shape[1] != width):
        raise SchemaError(f"{path}: expected rows of width {width}")
    return a


def _parse_solid(doc):
    s = _get(doc, "solid", "$", dict)
    kind = _get(s, "kind", "$.solid", str)
    if kind not in sf.PARENT_NODES:
        raise SchemaError(f"$.solid.kind: unknown element kind '{kind}'")
    X = _array(_get(s, "nodes", "$.solid", list), "$.solid.nodes", 3)
    conn = np.asarray(_get(s, "elements", "$.solid", list), dtype=int)
    face_sets = {}
    for name, pairs in _get(s, "face_sets", "$.solid", dict, {}).items():
        face_sets[name] = [(int(e), int(f)) for e, f in pairs]
    node_sets = {}
    for name, ids in _get(s, "node_sets", "$.solid", dict, {}).items():
        node_sets[name] = np.asarray(ids, dtype=int)
    try:
        return sf.SolidMesh(X, kind, conn, face_sets, node_sets)
    except ValueError as exc:
        raise SchemaError(f"$.solid: {exc}") from exc


def _parse_beam(doc):
    b = _get(doc, "beam", "$", dict)
    nodes = _get(b, "nodes", "$.beam", list)
    r0, t0, tri = [], [], []
    for k, nd in enumerate(nodes):
        path = f"$.beam.nodes[{k}]"
        r0.append(_vec3(_get(nd, "r", path), f"{path}.r"))
        t0.append(_vec3(_get(nd, "t", path), f"{path}.t"))
        rot = _get(nd, "triad", path, default=None)
        if rot is None:
            tri.append(so3.smallest_rotation_triad(t0[-1] / np.linalg.norm(t0[-1])))
        else:
            tri.append(so3.exp_map(_vec3(rot, f"{path}.triad")))
    conn = np.asarray(_get(b, "elements", "$.beam", list), dtype=int)
    sec = _get(b, "section", "$.beam", dict)
    section = bf.CrossSection(
        _get(sec, "radius", "$.beam.section", (int, float)),
        _get(sec, "E", "$.beam.section", (int, float)),
        _get(sec, "nu", "$.beam.section", (int, float)),
    )
    try:
        mesh = bf.BeamMesh(np.array(r0), np.array(t0), conn, np.array(tri))
    except ValueError as exc:
        raise SchemaError(f"$.beam: {exc}") from exc
    return mesh, section


def _parse_model(doc):
    solid = _parse_solid(doc)
    mat = _get(doc, "material", "$", dict)
    model_name = _get(mat, "model", "$.material", str)
    if model_name not in ("SaintVenantKirchhoff", "CompressibleNeoHookean"):
        raise SchemaError(f"$.material.model: unknown material '{model_name}'")
    material = sf.MaterialModel(
        model_name,
        _get(mat, "E", "$.material", (int, float)),
        _get(mat, "nu", "$.material", (int, float)),
    )
    beam, section = _parse_beam(doc)

    cp = _get(doc, "coupling", "$", dict)
    coupling = CouplingConfig(
        variant=_get(cp, "variant", "$.coupling", str, "CONS"),
        rotational=_get(cp, "rotational", "$.coupling", bool, True),
        eps_r=float(_get(cp, "eps_r", "$.coupling", (int, float))),
        eps_theta=float(_get(cp, "eps_theta", "$.coupling", (int, float), 0.0)),
    )
    faces = _get(cp, "faces", "$.coupling", list)
    for f in faces:
        if f not in solid.face_sets:
            raise SchemaError(f"$.coupling.faces: unknown face set '{f}'")

    loads = _get(doc, "loads", "$", dict, {})
    tractions = []
    for k, tr in enumerate(_get(loads, "tractions", "$.loads", list, [])):
        path = f"$.loads.tractions[{k}]"
        name = _get(tr, "face_set", path, str)
        if name not in solid.face_sets:
            raise SchemaError(f"{path}.face_set: unknown face set '{name}'")
        tractions.append((name, _vec3(_get(tr, "vector", path), f"{path}.vector")))
    body = _get(loads, "body", "$.loads", default=None)
    if body is not None:
        body = _vec3(body, "$.loads.body")
    line_loads = []
    for k, ll in enumerate(_get(loads, "beam_line", "$.loads", list, [])):
        path = f"$.loads.beam_line[{k}]"
        elems = [int(e) for e in _get(ll, "elements", path, list)]
        if any(e < 0 or e >= beam.n_elements for e in elems):
            raise SchemaError(f"{path}.elements: element index out of range")
        line_loads.append((elems, _vec3(_get(ll, "vector", path), f"{path}.vector")))
    point_loads = []
    for k, pl in enumerate(_get(loads, "beam_point", "$.loads", list, [])):
        path = f"$.loads.beam_point[{k}]"
        node = int(_get(pl, "node", path, int))
        if node < 0 or node >= beam.n_nodes:
            raise SchemaError(f"{path}.node: node index out of range")
        point_loads.append((node, _vec3(_get(pl, "vector", path), f"{path}.vector")))

    bcs = _get(doc, "bcs", "$", dict, {})
    dirichlet = []
    for k, dc in enumerate(_get(bcs, "dirichlet", "$.bcs", list, [])):
        path = f"$.bcs.dirichlet[{k}]"
        comps = [int(c) for c in _get(dc, "components", path, list)]
        if any(c not in (0, 1, 2) for c in comps):
            raise SchemaError(f"{path}.components: components must be 0, 1 or 2")
        if "node_set" in dc:
            name = dc["node_set"]
            if name not in solid.node_sets:
                raise SchemaError(f"{path}.node_set: unknown node set '{name}'")
            nodes = solid.node_sets[name]
        else:
            nodes = np.asarray(_get(dc, "nodes", path, list), dtype=int)
        dirichlet.append((nodes, comps))
    clamps = [int(a) for a in _get(bcs, "beam_clamps", "$.bcs", list, [])]

    return Model(
        solid=solid,
        material=material,
        beam=beam,
        section=section,
        coupling=coupling,
        coupling_faces=list(faces),
        dirichlet=dirichlet,
        tractions=tractions,
        body_load=body,
        beam_line_loads=line_loads,
        beam_point_loads=point_loads,
        beam_clamps=clamps,
        name=_get(doc, "name", "$", str, "model"),
    )


def load_model(path):
    """Parse and validate a JSON model file into a Model."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"$: invalid JSON ({exc})") from exc
    return _parse_model(doc)


def load_solve_config(path):
    """Solver settings from the optional 'solve' section (defaults if absent)."""
    with open(path) as fh:
        doc = json.load(fh)
    sv = doc.get("solve", {})
    return SolveConfig(
        steps=int(sv.get("steps", 10)),
        rel_tol=float(sv.get("rel_tol", 1e-9)),
        abs_tol=float(sv.get("abs_tol", 1e-12)),
        max_iter=int(sv.get("max_iter", 25)),
    )


def save_model(model, path, solve=None):
    """Serialize a Model (and optional SolveConfig) to a JSON model file."""
    beam_nodes = []
    for k in range(model.beam.n_nodes):
        beam_nodes.append(
            {
                "r": list(model.beam.r0[k]),
                "t": list(model.beam.t0[k]),
                "triad": list(so3.rv(model.beam.triads0[k])),
            }
        )
    doc = {
        "name": model.name,
        "solid": {
            "kind": model.solid.kind,
            "nodes": model.solid.X.tolist(),
            "elements": model.solid.conn.tolist(),
            "face_sets": {
                k: [[int(e), int(f)] for e, f in v]
                for k, v in model.solid.face_sets.items()
            },
            "node_sets": {
                k: [int(i) for i in v] for k, v in model.solid.node_sets.items()
            },
        },
        "material": {
            "model": model.material.kind,
            "E": model.material.E,
            "nu": model.material.nu,
        },
        "beam": {
            "nodes": beam_nodes,
            "elements": model.beam.conn.tolist(),
            "section": {
                "radius": model.section.R,
                "E": model.section.E,
                "nu": model.section.nu,
            },
        },
        "coupling": {
            "variant": model.coupling.variant,
            "rotational": model.coupling.rotational,
            "eps_r": model.coupling.eps_r,
            "eps_theta": model.coupling.eps_theta,
            "faces": list(model.coupling_faces),
        },
        "loads": {
            "tractions": [
                {"face_set": n, "vector": list(map(float, v))}
                for n, v in model.tractions
            ],
            "beam_line": [
                {"elements": list(map(int, e)), "vector": list(map(float, v))}
                for e, v in model.beam_line_loads
            ],
            "beam_point": [
                {"node": int(n), "vector": list(map(float, v))}
                for n, v in model.beam_point_loads
            ],
        },
        "bcs": {
            "dirichlet": [
                {"nodes": [int(i) for i in np.atleast_1d(n)], "components": list(c)}
                for n, c in model.dirichlet
            ],
            "beam_clamps": [int(a) for a in model.beam_clamps],
        },
    }
    if model.body_load is not None:
        doc["loads"]["body"] = list(map(float, model.body_load))
    if solve is not None:
        doc["solve"] = {
            "steps": solve.steps,
            "rel_tol": solve.rel_tol,
            "abs_tol": solve.abs_tol,
            "max_iter": solve.max_iter,
        }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# VTK export
# ---------------------------------------------------------------------------


def _data_array(fh, name, data, n_comp):
    fh.write(
        f'    <DataArray type="Float64" Name="{name}" '
        f'NumberOfComponents="{n_comp}" format="ascii">\n'
    )
    flat = np.asarray(data, dtype=float).reshape(-1)
    fh.write("     " + " ".join(_fmt(x) for x in flat) + "\n")
    fh.write("    </DataArray>\n")


def _int_array(fh, name, data):
    fh.write(f'    <DataArray type="Int64" Name="{name}" format="ascii">\n')
    fh.write("     " + " ".join(str(int(x)) for x in np.asarray(data).reshape(-1)))
    fh.write("\n    </DataArray>\n")


def export_vtu(model, state, path):
    """Solid mesh with nodal displacement and recovered S_33 (ASCII VTU)."""
    mesh = model.solid
    s33 = sf.recover_nodal_stress(mesh, model.material, state.d_solid)
    with open(path, "w") as fh:
        fh.write('<?xml version="1.0"?>\n')
        fh.write(
            '<VTKFile type="UnstructuredGrid" version="0.1" '
            'byte_order="LittleEndian">\n <UnstructuredGrid>\n'
        )
        fh.write(
            f'  <Piece NumberOfPoints="{mesh.n_nodes}" '
            f'NumberOfCells="{mesh.n_elements}">\n'
        )
        fh.write("   <Points>\n")
        _data_array(fh, "Points", mesh.X, 3)
        fh.write("   </Points>\n   <Cells>\n")
        _int_array(fh, "connectivity", mesh.conn)
        width = mesh.conn.shape[1]
        _int_array(fh, "offsets", width * np.arange(1, mesh.n_elements + 1))
        _int_array(
            fh, "types", np.full(mesh.n_elements, _VTK_CELL_TYPE[mesh.kind])
        )
        fh.write('   </Cells>\n   <PointData Vectors="displacement">\n')
        _data_array(fh, "displacement", state.d_solid, 3)
        _data_array(fh, "S_33", s33, 1)
        fh.write("   </PointData>\n  </Piece>\n </UnstructuredGrid>\n</VTKFile>\n")


def export_beam_vtp(model, state, path, multipliers=None, samples=5):
    """Beam polylines with displacement, curvature and coupling line loads.

    Each element becomes one polyline of `samples` points.  Point data:
    centerline displacement and the reconstructed coupling line load
    (negative of the interpolated positional multiplier field, zero when
    no multipliers are given).  Cell data: bending curvature magnitude at
    the element midpoint.
    """
    beam = model.beam
    pts, disp, lam_field = [], [], []
    curvature = []
    xis = np.linspace(-1.0, 1.0, samples)
    for e in range(beam.n_elements):
        a, b = beam.conn[e]
        for xi in xis:
            x, _ = bf.hermite_eval(beam, e, xi, state.beam.r, state.beam.t)
            x0, _ = bf.hermite_eval(beam, e, xi, beam.r0, beam.t0)
            pts.append(x)
            disp.append(x - x0)
            if multipliers is None:
                lam_field.append(np.zeros(3))
            else:
                la = multipliers[3 * a : 3 * a + 3]
                lb = multipliers[3 * b : 3 * b + 3]
                lam_field.append(
                    -(0.5 * (1.0 - xi) * la + 0.5 * (1.0 + xi) * lb)
                )
        _, omega = bf.beam_strains(beam, e, 0.0, state.beam)
        curvature.append(np.hypot(omega[1], omega[2]))
    n_pts = len(pts)
    with open(path, "w") as fh:
        fh.write('<?xml version="1.0"?>\n')
        fh.write(
            '<VTKFile type="PolyData" version="0.1" byte_order="LittleEndian">\n'
            " <PolyData>\n"
        )
        fh.write(
            f'  <Piece NumberOfPoints="{n_pts}" NumberOfLines="{beam.n_elements}">\n'
        )
        fh.write("   <Points>\n")
        _data_array(fh, "Points", np.array(pts), 3)
        fh.write("   </Points>\n   <Lines>\n")
        _int_array(fh, "connectivity", np.arange(n_pts))
        _int_array(fh, "offsets", samples * np.arange(1, beam.n_elements + 1))
        fh.write('   </Lines>\n   <PointData Vectors="displacement">\n')
        _data_array(fh, "displacement", np.array(disp), 3)
        _data_array(fh, "coupling_line_load", np.array(lam_field), 3)
        fh.write('   </PointData>\n   <CellData Scalars="curvature">\n')
        _data_array(fh, "curvature", np.array(curvature), 1)
        fh.write("   </CellData>\n  </Piece>\n </PolyData>\n</VTKFile>\n")


def write_report(report, path_base):
    """Write a run report as plain text and JSON (path_base + .txt/.json)."""

    def _plain(v):
        if isinstance(v, np.ndarray):
            return [float(x) for x in v.reshape(-1)]
        if isinstance(v, (np.floating, float)):
            return float(v)
        if isinstance(v, (np.integer, int)):
            return int(v)
        if isinstance(v, dict):
            return {k: _plain(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [_plain(x) for x in v]
        return v

    data = _plain(report)
    with open(path_base + ".json", "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(path_base + ".txt", "w") as fh:
        for key in sorted(data):
            val = data[key]
            if isinstance(val, float):
                fh.write(f"{key}: {_fmt(val)}\n")
            elif isinstance(val, list) and all(
                isinstance(x, (int, float)) for x in val
            ):
                fh.write(f"{key}: [" + ", ".join(_fmt(x) for x in val) + "]\n")
            else:
                fh.write(f"{key}: {json.dumps(val, sort_keys=True)}\n")
    return path_base + ".txt", path_base + ".json"
