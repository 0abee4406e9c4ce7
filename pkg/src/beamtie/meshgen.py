"""Structured mesh generators for blocks and mapped blocks.

A block of nx x ny x nz cells is generated on a half-step lattice so the
same routine serves linear and quadratic element kinds; tet meshes are
derived by splitting each cell into six tetrahedra sharing the main
diagonal.  Boundary face sets xmin/xmax/ymin/ymax/zmin/zmax are built for
all kinds.  Curved geometries are produced by mapping the node coordinates
of a generated block.
"""

from __future__ import annotations

import numpy as np

from .solid_fem import FACE_TABLES, PARENT_NODES, SolidMesh

__all__ = ["block_mesh", "map_mesh"]

# six tetrahedra sharing the 0-6 cell diagonal
_TET_SPLIT = [
    (0, 1, 2, 6),
    (0, 2, 3, 6),
    (0, 3, 7, 6),
    (0, 7, 4, 6),
    (0, 4, 5, 6),
    (0, 5, 1, 6),
]

_HEX_FACE_OF_SET = {
    "zmin": 0, "zmax": 1, "ymin": 2, "xmax": 3, "ymax": 4, "xmin": 5,
}


def _boundary_planes(nx, ny, nz):
    return {
        "xmin": (0, 0.0), "xmax": (0, float(nx)),
        "ymin": (1, 0.0), "ymax": (1, float(ny)),
        "zmin": (2, 0.0), "zmax": (2, float(nz)),
    }


def block_mesh(kind, nx, ny, nz, lengths=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    """Structured block mesh of any supported element kind.

    Parameters
    ----------
    kind : str
        hex8, hex20, hex27, tet4 or tet10.
    nx, ny, nz : int
        Cells per direction.
    lengths : tuple of float
        Physical edge lengths.
    origin : tuple of float
        Coordinates of the (xmin, ymin, zmin) corner.

    Returns
    -------
    SolidMesh
        With face sets xmin/xmax/ymin/ymax/zmin/zmax.
    """
    lengths = np.asarray(lengths, dtype=float)
    origin = np.asarray(origin, dtype=float)
    lattice = {}
    coords = []

    def node_at(key):
        if key not in lattice:
            lattice[key] = len(coords)
            cell_coord = np.array(key, dtype=float) / 2.0
            coords.append(origin + cell_coord / [nx, ny, nz] * lengths)
        return lattice[key]

    hex_kind = kind if kind.startswith("hex") else "hex8"
    parent = PARENT_NODES[hex_kind]
    conn = []
    cell_of_elem = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                keys = [
                    (2 * i + int(p[0]) + 1, 2 * j + int(p[1]) + 1, 2 * k + int(p[2]) + 1)
                    for p in parent
                ]
                if kind.startswith("hex"):
                    conn.append([node_at(kk) for kk in keys])
                    cell_of_elem.append((i, j, k))
                else:
                    corner = keys[:8]
                    for tet in _TET_SPLIT:
                        if kind == "tet4":
                            conn.append([node_at(corner[c]) for c in tet])
                        else:
                            ids = [node_at(corner[c]) for c in tet]
                            for a, b in ((0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)):
                                ka = corner[tet[a]]
                                kb = corner[tet[b]]
                                mid = tuple((ka[d] + kb[d]) // 2 for d in range(3))
                                ids.append(node_at(mid))
                            conn.append(ids)
                        cell_of_elem.append((i, j, k))
    X = np.array(coords)
    conn = np.array(conn, dtype=int)
    mesh = SolidMesh(X=X, kind=kind, conn=conn, face_sets={}, node_sets={})
    _build_face_sets(mesh, cell_of_elem, nx, ny, nz, lengths, origin)
    _build_node_sets(mesh, lengths, origin)
    return mesh


def _build_face_sets(mesh, cell_of_elem, nx, ny, nz, lengths, origin):
    if mesh.kind.startswith("hex"):
        for name, face in _HEX_FACE_OF_SET.items():
            entries = []
            for e, (i, j, k) in enumerate(cell_of_elem):
                on = {
                    "xmin": i == 0, "xmax": i == nx - 1,
                    "ymin": j == 0, "ymax": j == ny - 1,
                    "zmin": k == 0, "zmax": k == nz - 1,
                }[name]
                if on:
                    entries.append((e, face))
            mesh.face_sets[name] = entries
        return
    # tets: collect faces whose nodes all lie on the boundary plane
    planes = {
        "xmin": (0, origin[0]), "xmax": (0, origin[0] + lengths[0]),
        "ymin": (1, origin[1]), "ymax": (1, origin[1] + lengths[1]),
        "zmin": (2, origin[2]), "zmax": (2, origin[2] + lengths[2]),
    }
    for name, (axis, val) in planes.items():
        entries = []
        for e in range(mesh.n_elements):
            for face, (fkind, local) in enumerate(FACE_TABLES[mesh.kind]):
                nodes = mesh.conn[e][list(local)]
                if np.all(np.abs(mesh.X[nodes][:, axis] - val) < 1e-12):
                    entries.append((e, face))
        mesh.face_sets[name] = entries


def _build_node_sets(mesh, lengths, origin):
    for axis, letter in enumerate("xyz"):
        lo = origin[axis]
        hi = origin[axis] + lengths[axis]
        mesh.node_sets[f"{letter}min"] = np.where(
            np.abs(mesh.X[:, axis] - lo) < 1e-12
        )[0]
        mesh.node_sets[f"{letter}max"] = np.where(
            np.abs(mesh.X[:, axis] - hi) < 1e-12
        )[0]


def map_mesh(mesh, mapping):
    """New SolidMesh with node coordinates transformed by mapping(X) -> X'."""
    Xn = np.array([mapping(x) for x in mesh.X])
    return SolidMesh(
        X=Xn,
        kind=mesh.kind,
        conn=mesh.conn.copy(),
        face_sets={k: list(v) for k, v in mesh.face_sets.items()},
        node_sets={k: np.array(v) for k, v in mesh.node_sets.items()},
    )
