"""Boundary-fitted hexahedral meshes of the unit cell minus a ball.

The unit periodicity cell is Y = (-1/2, 1/2)^3 with a spherical hole of
radius ``r_cell`` centred at the origin.  The region between the sphere
and the cube boundary is meshed with six spherified-cube blocks: each
cube face is parametrized by (u, v) in [-1, 1]^2 and blended radially
onto the sphere,

    P(u, v, t) = (1 - t) * r_cell * S(u, v) + t * C(u, v),

where C is the point on the cube face and S = C/|C| its projection onto
the unit sphere.  Radial layers are geometrically graded so the layer
next to the sphere has thickness about r_cell / 2**level.

Perforated domain meshes tile the unit cube (0, 1)^3 with N^3 scaled
copies of the cell mesh (eps = 1/N); hole centres sit at the cell
centres, so no hole is cut by the outer boundary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .errors import HoleTooLarge, MeshGlueError, MeshQualityError

# (tangent1, tangent2, outward normal) per block, chosen right-handed:
# t1 x t2 = n, so hexes ordered (u, v, t) have positive Jacobians.
_FACE_FRAMES = (
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((0, 1, 0), (1, 0, 0), (0, 0, -1)),
    ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
    ((0, 0, 1), (0, 1, 0), (-1, 0, 0)),
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ((1, 0, 0), (0, 0, 1), (0, -1, 0)),
)

_ROUND_DECIMALS = 12
_GLUE_DECIMALS = 10


def unit_sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def cell_hole_radius(eps: float, a: float, n: int = 3) -> float:
    """Hole radius in cell coordinates for scaling exponent ``a``.

    The physical hole radius is eps**a, i.e. eps**(a-1) after rescaling
    the cell by 1/eps.  The critical exponent is a = n/(n-2).
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    if a <= 1.0:
        raise ValueError(f"scaling exponent must exceed 1, got {a}")
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got {n}")
    r = eps ** (a - 1.0)
    if r >= 0.5:
        raise HoleTooLarge(
            f"r_cell = eps**(a-1) = {r:.6g} >= 1/2; hole reaches the cell boundary"
        )
    return r


def mu_coeff(eps: float, n: int, r_cell: float) -> float:
    """Robin normalisation: hole surface area in cell coordinates over eps.

    Equals the total surface area of all holes in the unit cube, since
    the eps**-n cells each carry a hole of physical radius eps*r_cell.
    """
    if eps <= 0.0 or r_cell <= 0.0:
        raise ValueError("eps and r_cell must be positive")
    return unit_sphere_area(n) * r_cell ** (n - 1) / eps


@dataclass
class CellMesh:
    """Hexahedral mesh of Y minus the centred ball of radius r_cell."""

    r_cell: float
    level: int
    outer_mode: str
    nodes: np.ndarray          # (N, 3)
    hexes: np.ndarray          # (E, 8) positively oriented
    hole_faces: np.ndarray     # (Fh, 4) quads on |x| = r_cell
    outer_faces: np.ndarray    # (Fo, 4) quads on the cube boundary
    periodic_pairs: np.ndarray  # (P, 2) node ids on opposite cube faces
    periodic_dirs: np.ndarray   # (P,) pairing direction 0/1/2
    n: int = 3

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def hole_nodes(self) -> np.ndarray:
        return np.unique(self.hole_faces)

    @property
    def outer_nodes(self) -> np.ndarray:
        return np.unique(self.outer_faces)

    def periodic_representatives(self) -> np.ndarray:
        """Union-find over periodic pairs: node -> representative node id."""
        rep = np.arange(self.n_nodes)

        def find(i):
            while rep[i] != i:
                rep[i] = rep[rep[i]]
                i = rep[i]
            return i

        for i, j in self.periodic_pairs:
            ri, rj = find(i), find(j)
            if ri != rj:
                rep[max(ri, rj)] = min(ri, rj)
        for i in range(self.n_nodes):
            rep[i] = find(i)
        return rep

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "kind": "cell",
            "r_cell": self.r_cell,
            "level": self.level,
            "outer_mode": self.outer_mode,
            "nodes": self.nodes.tolist(),
            "hexes": self.hexes.tolist(),
            "hole_faces": self.hole_faces.tolist(),
            "outer_faces": self.outer_faces.tolist(),
            "periodic_pairs": self.periodic_pairs.tolist(),
        }

    def dump_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)


@dataclass
class PerforatedMesh:
    """N^3 scaled cell meshes glued into the perforated unit cube."""

    N: int
    eps: float
    template: CellMesh
    nodes: np.ndarray
    hexes: np.ndarray
    gamma_faces: np.ndarray           # all hole faces
    outer_dirichlet_nodes: np.ndarray  # nodes on the boundary of (0,1)^3
    cell_nodes: np.ndarray            # (N^3, template.n_nodes) global ids

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "kind": "perforated",
            "N": self.N,
            "eps": self.eps,
            "r_cell": self.template.r_cell,
            "level": self.template.level,
            "nodes": self.nodes.tolist(),
            "hexes": self.hexes.tolist(),
            "hole_faces": self.gamma_faces.tolist(),
            "outer_faces": [],
            "periodic_pairs": [],
            "outer_dirichlet_nodes": self.outer_dirichlet_nodes.tolist(),
        }

    def dump_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)


def _radial_breakpoints(r_cell: float, level: int) -> np.ndarray:
    """Graded t in [0, 1]; innermost layer ~ r_cell/2**level physically."""
    layers = level + 2
    gap = 0.5 - r_cell  # physical span along the face-centre ray
    h0 = min(r_cell / (2**level * gap), 1.0 / layers)
    if h0 >= 1.0 / layers - 1e-15:
        t = np.linspace(0.0, 1.0, layers + 1)
    else:
        def total(q):
            return h0 * (q**layers - 1.0) / (q - 1.0) - 1.0

        hi = 2.0
        while total(hi) < 0.0:
            hi *= 2.0
        q = brentq(total, 1.0 + 1e-12, hi, xtol=1e-14)
        j = np.arange(layers + 1)
        t = h0 * (q**j - 1.0) / (q - 1.0)
        t[-1] = 1.0
    return t


def build_cell_mesh(r_cell: float, level: int, outer_mode: str = "periodic") -> CellMesh:
    """Spherified-cube mesh of the cell minus the ball."""
    if not 0.0 < r_cell < 0.5:
        raise ValueError(f"r_cell must lie in (0, 1/2), got {r_cell}")
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    if outer_mode not in ("periodic", "dirichlet_outer"):
        raise ValueError(f"unknown outer_mode {outer_mode!r}")

    nf = 2**level
    # equiangular cubed-sphere spacing: near-uniform patches on the sphere
    uu = np.tan((-1.0 + 2.0 * np.arange(nf + 1) / nf) * (np.pi / 4.0))
    uu[0], uu[-1] = -1.0, 1.0
    t = _radial_breakpoints(r_cell, level)
    nt = t.shape[0] - 1

    key_to_gid: dict = {}
    coords: list = []

    def gid_of(p) -> int:
        key = tuple(np.round(p, _ROUND_DECIMALS))
        g = key_to_gid.get(key)
        if g is None:
            g = len(coords)
            key_to_gid[key] = g
            coords.append(p)
        return g

    hexes = []
    hole_faces = []
    outer_faces = []
    for t1, t2, nrm in _FACE_FRAMES:
        t1 = np.array(t1, dtype=float)
        t2 = np.array(t2, dtype=float)
        nrm = np.array(nrm, dtype=float)
        # C[i,j,:] cube-face points, S their sphere projections
        C = (
            0.5 * nrm[None, None, :]
            + 0.5 * uu[:, None, None] * t1[None, None, :]
            + 0.5 * uu[None, :, None] * t2[None, None, :]
        )
        S = C / np.sqrt((C**2).sum(axis=2))[:, :, None]
        block = np.empty((nf + 1, nf + 1, nt + 1), dtype=np.int64)
        for k, tk in enumerate(t):
            P = (1.0 - tk) * r_cell * S + tk * C
            for i in range(nf + 1):
                for j in range(nf + 1):
                    block[i, j, k] = gid_of(P[i, j])
        for i in range(nf):
            for j in range(nf):
                for k in range(nt):
                    hexes.append(
                        (
                            block[i, j, k], block[i + 1, j, k],
                            block[i + 1, j + 1, k], block[i, j + 1, k],
                            block[i, j, k + 1], block[i + 1, j, k + 1],
                            block[i + 1, j + 1, k + 1], block[i, j + 1, k + 1],
                        )
                    )
                hole_faces.append(
                    (block[i, j, 0], block[i + 1, j, 0],
                     block[i + 1, j + 1, 0], block[i, j + 1, 0])
                )
                outer_faces.append(
                    (block[i, j, nt], block[i + 1, j, nt],
                     block[i + 1, j + 1, nt], block[i, j + 1, nt])
                )

    nodes = np.array(coords)
    hexes = np.array(hexes, dtype=np.int64)
    hole_faces = np.array(hole_faces, dtype=np.int64)
    outer_faces = np.array(outer_faces, dtype=np.int64)

    _, _, detmin, _ = _kernels.hex_forms(nodes[hexes])
    if detmin.min() <= 0.0:
        raise MeshQualityError(
            f"degenerate hexahedron: min Jacobian {detmin.min():.3e} "
            f"(r_cell={r_cell}, level={level})"
        )

    pairs = []
    dirs = []
    for d in range(3):
        lo = np.nonzero(np.abs(nodes[:, d] + 0.5) < 1e-12)[0]
        hi_key = {}
        for g in np.nonzero(np.abs(nodes[:, d] - 0.5) < 1e-12)[0]:
            other = tuple(np.round(np.delete(nodes[g], d), _ROUND_DECIMALS))
            hi_key[other] = g
        for g in lo:
            other = tuple(np.round(np.delete(nodes[g], d), _ROUND_DECIMALS))
            try:
                pairs.append((g, hi_key[other]))
            except KeyError:
                raise MeshGlueError(
                    f"unmatched periodic node {g} in direction {d}"
                ) from None
            dirs.append(d)

    return CellMesh(
        r_cell=r_cell,
        level=level,
        outer_mode=outer_mode,
        nodes=nodes,
        hexes=hexes,
        hole_faces=hole_faces,
        outer_faces=outer_faces,
        periodic_pairs=np.array(pairs, dtype=np.int64),
        periodic_dirs=np.array(dirs, dtype=np.int64),
    )


def build_perforated_mesh(N: int, r_cell: float, level: int) -> PerforatedMesh:
    """Tile (0,1)^3 with N^3 copies of the cell mesh scaled by eps = 1/N."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    template = build_cell_mesh(r_cell, level, outer_mode="dirichlet_outer")
    eps = 1.0 / N
    nt = template.n_nodes

    key_to_gid: dict = {}
    coords: list = []
    cell_nodes = np.empty((N**3, nt), dtype=np.int64)
    hexes = []
    gamma_faces = []

    c = 0
    for kz in range(N):
        for ky in range(N):
            for kx in range(N):
                offset = np.array([kx + 0.5, ky + 0.5, kz + 0.5])
                pts = (template.nodes + offset) * eps
                keys = np.round(pts, _GLUE_DECIMALS)
                local_seen = {}
                for ln in range(nt):
                    key = tuple(keys[ln])
                    if key in local_seen:
                        raise MeshGlueError(
                            f"cell ({kx},{ky},{kz}): nodes {local_seen[key]} and "
                            f"{ln} collide within glue tolerance"
                        )
                    local_seen[key] = ln
                    g = key_to_gid.get(key)
                    if g is None:
                        g = len(coords)
                        key_to_gid[key] = g
                        coords.append(pts[ln])
                    cell_nodes[c, ln] = g
                hexes.append(cell_nodes[c][template.hexes])
                gamma_faces.append(cell_nodes[c][template.hole_faces])
                c += 1

    nodes = np.array(coords)
    hexes = np.vstack(hexes)
    gamma_faces = np.vstack(gamma_faces)
    on_boundary = (np.abs(nodes) < 1e-12) | (np.abs(nodes - 1.0) < 1e-12)
    outer_dirichlet = np.nonzero(on_boundary.any(axis=1))[0]

    return PerforatedMesh(
        N=N,
        eps=eps,
        template=template,
        nodes=nodes,
        hexes=hexes,
        gamma_faces=gamma_faces,
        outer_dirichlet_nodes=outer_dirichlet,
        cell_nodes=cell_nodes,
    )
