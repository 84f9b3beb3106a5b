"""Bilinear forms on cell and perforated meshes.

Assembles the stiffness A = int grad u . grad v, volume mass
M = int u v and hole-surface mass B = int_{hole} u v with trilinear (Q1)
elements, 2x2x2 Gauss volume quadrature and 2x2 Gauss surface
quadrature.  On periodic cell meshes, opposite-face nodes are identified
before assembly, so A, M, B live on the reduced (torus) dof space.
Element contributions are accumulated in a fixed element order, making
assembly bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .cellmesh import CellMesh, PerforatedMesh
from .errors import AssemblyError, LoadError
from .numkernel import SparseSym


@dataclass
class DofMap:
    """Node-to-dof mapping after periodic identification (if any)."""

    n_nodes: int
    node_dof: np.ndarray     # (n_nodes,) dof index per mesh node
    n_dofs: int
    hole_dofs: np.ndarray
    outer_dofs: np.ndarray

    def expand(self, values_on_dofs: np.ndarray) -> np.ndarray:
        """Nodal field from a dof field (copies values to slave nodes)."""
        return values_on_dofs[self.node_dof]


@dataclass
class FormSet:
    """Assembled forms plus the discrete measures they induce."""

    A: SparseSym
    M: SparseSym
    B: SparseSym
    s_h: float     # discrete hole surface area, 1' B 1
    vol_h: float   # discrete |Y \ H|, 1' M 1
    dof_map: DofMap
    mesh: CellMesh


@dataclass
class LinearSystem:
    """Symmetric system with Dirichlet dofs eliminated."""

    K: SparseSym           # on free dofs
    rhs: np.ndarray        # on free dofs
    free: np.ndarray       # free node indices
    n_nodes: int
    prescribed: np.ndarray  # full-length vector of boundary values

    def full_solution(self, x_free: np.ndarray) -> np.ndarray:
        u = self.prescribed.copy()
        u[self.free] = x_free
        return u


def _assemble_pattern(conn: np.ndarray, elem_mats: np.ndarray, n_dofs: int) -> SparseSym:
    """Scatter (E, k, k) element matrices through (E, k) connectivity."""
    k = conn.shape[1]
    rows = np.repeat(conn, k, axis=1).ravel()
    cols = np.tile(conn, (1, k)).ravel()
    return SparseSym.from_coo(n_dofs, rows, cols, elem_mats.ravel())


def _dof_map(mesh: CellMesh, periodic: bool) -> DofMap:
    if periodic:
        rep = mesh.periodic_representatives()
        uniq, node_dof = np.unique(rep, return_inverse=True)
        n_dofs = uniq.shape[0]
    else:
        node_dof = np.arange(mesh.n_nodes)
        n_dofs = mesh.n_nodes
    hole_dofs = np.unique(node_dof[mesh.hole_nodes])
    outer_dofs = np.unique(node_dof[mesh.outer_nodes])
    return DofMap(mesh.n_nodes, node_dof, n_dofs, hole_dofs, outer_dofs)


def assemble_cell_forms(mesh: CellMesh) -> FormSet:
    """A, M, B on a cell mesh, reduced over periodic pairs if applicable."""
    Ke, Me, detmin, _ = _kernels.hex_forms(mesh.nodes[mesh.hexes])
    if detmin.min() <= 0.0:
        raise AssemblyError(f"singular element map (min det J = {detmin.min():.3e})")
    dof_map = _dof_map(mesh, periodic=(mesh.outer_mode == "periodic"))
    conn = dof_map.node_dof[mesh.hexes]
    A = _assemble_pattern(conn, Ke, dof_map.n_dofs)
    M = _assemble_pattern(conn, Me, dof_map.n_dofs)
    Be, _ = _kernels.quad_mass(mesh.nodes[mesh.hole_faces])
    B = _assemble_pattern(dof_map.node_dof[mesh.hole_faces], Be, dof_map.n_dofs)
    ones = np.ones(dof_map.n_dofs)
    s_h = float(ones @ B.matvec(ones))
    vol_h = float(ones @ M.matvec(ones))
    return FormSet(A=A, M=M, B=B, s_h=s_h, vol_h=vol_h, dof_map=dof_map, mesh=mesh)


def constraint_form(forms: FormSet, kappa: float) -> SparseSym:
    """G = B / s_h - kappa * M, the quadratic form of the eigen constraint."""
    if kappa < 0.0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    return forms.B.scaled(1.0 / forms.s_h).add_scaled(forms.M, -kappa)


def element_quadrature(nodes: np.ndarray, hexes: np.ndarray):
    """Physical quadrature points (E, Q, 3) and weights w*detJ (E, Q)."""
    coords = nodes[hexes]
    J = np.einsum("eai,qaj->eqij", coords, _kernels.HEX_DN)
    det = (
        J[..., 0, 0] * (J[..., 1, 1] * J[..., 2, 2] - J[..., 1, 2] * J[..., 2, 1])
        - J[..., 0, 1] * (J[..., 1, 0] * J[..., 2, 2] - J[..., 1, 2] * J[..., 2, 0])
        + J[..., 0, 2] * (J[..., 1, 0] * J[..., 2, 1] - J[..., 1, 1] * J[..., 2, 0])
    )
    pts = np.einsum("qa,eai->eqi", _kernels.HEX_N, coords)
    return pts, _kernels.HEX_W[None, :] * det


def assemble_load(nodes: np.ndarray, hexes: np.ndarray, f, n_dofs: int,
                  node_dof: np.ndarray | None = None) -> np.ndarray:
    """Load vector int f v by element quadrature; f(x, y, z) -> array."""
    pts, wdet = element_quadrature(nodes, hexes)
    try:
        fval = np.asarray(f(pts[..., 0], pts[..., 1], pts[..., 2]), dtype=float)
        fval = np.broadcast_to(fval, wdet.shape)
    except Exception as exc:
        raise LoadError(f"source-term evaluation failed: {exc}") from exc
    if not np.all(np.isfinite(fval)):
        raise LoadError("source term evaluated to non-finite values")
    fe = np.einsum("eq,qa->ea", wdet * fval, _kernels.HEX_N)
    rhs = np.zeros(n_dofs)
    conn = hexes if node_dof is None else node_dof[hexes]
    np.add.at(rhs, conn.ravel(), fe.ravel())
    return rhs


def assemble_domain_forms(pmesh: PerforatedMesh):
    """A, M and hole-surface mass on the perforated mesh (full dofs)."""
    Ke, Me, detmin, _ = _kernels.hex_forms(pmesh.nodes[pmesh.hexes])
    if detmin.min() <= 0.0:
        raise AssemblyError(f"singular element map (min det J = {detmin.min():.3e})")
    n = pmesh.n_nodes
    A = _assemble_pattern(pmesh.hexes, Ke, n)
    M = _assemble_pattern(pmesh.hexes, Me, n)
    Be, _ = _kernels.quad_mass(pmesh.nodes[pmesh.gamma_faces])
    B = _assemble_pattern(pmesh.gamma_faces, Be, n)
    return A, M, B


def assemble_domain_system(pmesh: PerforatedMesh, alpha: float, beta: float,
                           mu: float, f) -> LinearSystem:
    """Weak form of the Robin problem on the perforated domain.

    K = A + alpha*M + (beta/mu)*B_Gamma with homogeneous Dirichlet data
    on the outer boundary eliminated symmetrically.
    """
    if alpha < 0.0 or beta < 0.0 or mu <= 0.0:
        raise ValueError("need alpha >= 0, beta >= 0, mu > 0")
    A, M, B = assemble_domain_forms(pmesh)
    K = A.add_scaled(M, alpha).add_scaled(B, beta / mu)
    rhs = assemble_load(pmesh.nodes, pmesh.hexes, f, pmesh.n_nodes)
    mask = np.ones(pmesh.n_nodes, dtype=bool)
    mask[pmesh.outer_dirichlet_nodes] = False
    free = np.nonzero(mask)[0]
    return LinearSystem(
        K=K.restrict(free),
        rhs=rhs[free],
        free=free,
        n_nodes=pmesh.n_nodes,
        prescribed=np.zeros(pmesh.n_nodes),
    )
