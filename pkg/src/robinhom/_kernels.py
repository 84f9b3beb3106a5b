"""Hot numeric kernels: Q1 element matrices and CSR matvec.

Two implementations are provided for every kernel: a numba ``@njit``
version and a vectorized numpy version.  The numba path is used by
default whenever numba imports; set the environment variable
``ROBINHOM_NO_NUMBA=1`` to force the pure-numpy path.  Both paths use
the same quadrature data and fixed loop/summation structure, so they
agree to roundoff.  ``benchmarks/bench_kernels.py`` times one against
the other.
"""

from __future__ import annotations

import os

import numpy as np

_HEX_CORNERS = np.array(
    [
        [-1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0],
        [-1.0, 1.0, 1.0],
    ]
)

_QUAD_CORNERS = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])

_G = 1.0 / np.sqrt(3.0)


def _hex_reference():
    """Shape values and gradients of the 8 trilinear basis functions
    at the 2x2x2 Gauss points: N (8q, 8), dN (8q, 8, 3), weights (8q,)."""
    pts = np.array(
        [[sx * _G, sy * _G, sz * _G]
         for sz in (-1, 1) for sy in (-1, 1) for sx in (-1, 1)]
    )
    nq = pts.shape[0]
    N = np.empty((nq, 8))
    dN = np.empty((nq, 8, 3))
    for q in range(nq):
        x, y, z = pts[q]
        for a in range(8):
            xa, ya, za = _HEX_CORNERS[a]
            N[q, a] = (1 + xa * x) * (1 + ya * y) * (1 + za * z) / 8.0
            dN[q, a, 0] = xa * (1 + ya * y) * (1 + za * z) / 8.0
            dN[q, a, 1] = (1 + xa * x) * ya * (1 + za * z) / 8.0
            dN[q, a, 2] = (1 + xa * x) * (1 + ya * y) * za / 8.0
    w = np.ones(nq)
    return N, dN, w


def _quad_reference():
    pts = np.array([[sx * _G, sy * _G] for sy in (-1, 1) for sx in (-1, 1)])
    nq = pts.shape[0]
    N = np.empty((nq, 4))
    dN = np.empty((nq, 4, 2))
    for q in range(nq):
        x, y = pts[q]
        for a in range(4):
            xa, ya = _QUAD_CORNERS[a]
            N[q, a] = (1 + xa * x) * (1 + ya * y) / 4.0
            dN[q, a, 0] = xa * (1 + ya * y) / 4.0
            dN[q, a, 1] = (1 + xa * x) * ya / 4.0
    w = np.ones(nq)
    return N, dN, w


HEX_N, HEX_DN, HEX_W = _hex_reference()
QUAD_N, QUAD_DN, QUAD_W = _quad_reference()


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------

def _hex_forms_numpy(coords):
    """Element stiffness/mass for trilinear hexahedra.

    coords: (E, 8, 3) nodal coordinates.
    Returns Ke (E,8,8), Me (E,8,8), detmin (E,), vol (E,).
    """
    E = coords.shape[0]
    Ke = np.zeros((E, 8, 8))
    Me = np.zeros((E, 8, 8))
    detmin = np.full(E, np.inf)
    vol = np.zeros(E)
    # J[e,q,i,j] = d x_i / d xi_j
    J = np.einsum("eai,qaj->eqij", coords, HEX_DN)
    det = (
        J[..., 0, 0] * (J[..., 1, 1] * J[..., 2, 2] - J[..., 1, 2] * J[..., 2, 1])
        - J[..., 0, 1] * (J[..., 1, 0] * J[..., 2, 2] - J[..., 1, 2] * J[..., 2, 0])
        + J[..., 0, 2] * (J[..., 1, 0] * J[..., 2, 1] - J[..., 1, 1] * J[..., 2, 0])
    )
    detmin = det.min(axis=1)
    # adjugate / det = inverse
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1] * J[..., 2, 2] - J[..., 1, 2] * J[..., 2, 1]
    inv[..., 0, 1] = J[..., 0, 2] * J[..., 2, 1] - J[..., 0, 1] * J[..., 2, 2]
    inv[..., 0, 2] = J[..., 0, 1] * J[..., 1, 2] - J[..., 0, 2] * J[..., 1, 1]
    inv[..., 1, 0] = J[..., 1, 2] * J[..., 2, 0] - J[..., 1, 0] * J[..., 2, 2]
    inv[..., 1, 1] = J[..., 0, 0] * J[..., 2, 2] - J[..., 0, 2] * J[..., 2, 0]
    inv[..., 1, 2] = J[..., 0, 2] * J[..., 1, 0] - J[..., 0, 0] * J[..., 1, 2]
    inv[..., 2, 0] = J[..., 1, 0] * J[..., 2, 1] - J[..., 1, 1] * J[..., 2, 0]
    inv[..., 2, 1] = J[..., 0, 1] * J[..., 2, 0] - J[..., 0, 0] * J[..., 2, 1]
    inv[..., 2, 2] = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    inv = inv / det[..., None, None]
    # grad_x N_a = J^{-T} grad_xi N_a  ->  g[e,q,a,i] = inv[e,q,j,i] dN[q,a,j]
    g = np.einsum("eqji,qaj->eqai", inv, HEX_DN)
    wdet = HEX_W[None, :] * det
    vol = wdet.sum(axis=1)
    Ke = np.einsum("eq,eqai,eqbi->eab", wdet, g, g)
    Me = np.einsum("eq,qa,qb->eab", wdet, HEX_N, HEX_N)
    return Ke, Me, detmin, vol


def _quad_mass_numpy(coords):
    """Surface mass matrices for bilinear quad faces.

    coords: (F, 4, 3).  Returns Be (F,4,4), area (F,).
    """
    t = np.einsum("fai,qaj->fqij", coords, QUAD_DN)  # t[f,q,:,j] tangents
    cross = np.cross(t[..., 0], t[..., 1])
    ds = np.sqrt((cross**2).sum(axis=-1))
    wds = QUAD_W[None, :] * ds
    Be = np.einsum("fq,qa,qb->fab", wds, QUAD_N, QUAD_N)
    return Be, wds.sum(axis=1)


def _csr_matvec_numpy(indptr, indices, data, x):
    y = np.zeros(indptr.shape[0] - 1)
    np.add.at(y, np.repeat(np.arange(y.shape[0]), np.diff(indptr)), data * x[indices])
    return y


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

try:  # pragma: no cover - exercised through the dispatch below
    from numba import njit

    _HAVE_NUMBA = True

    @njit(cache=True)
    def _hex_forms_numba(coords, dN, N, w):
        E = coords.shape[0]
        nq = w.shape[0]
        Ke = np.zeros((E, 8, 8))
        Me = np.zeros((E, 8, 8))
        detmin = np.empty(E)
        vol = np.zeros(E)
        J = np.empty((3, 3))
        g = np.empty((8, 3))
        for e in range(E):
            dmin = 1e300
            for q in range(nq):
                for i in range(3):
                    for j in range(3):
                        s = 0.0
                        for a in range(8):
                            s += coords[e, a, i] * dN[q, a, j]
                        J[i, j] = s
                det = (
                    J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
                    - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
                    + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0])
                )
                if det < dmin:
                    dmin = det
                i00 = (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]) / det
                i01 = (J[0, 2] * J[2, 1] - J[0, 1] * J[2, 2]) / det
                i02 = (J[0, 1] * J[1, 2] - J[0, 2] * J[1, 1]) / det
                i10 = (J[1, 2] * J[2, 0] - J[1, 0] * J[2, 2]) / det
                i11 = (J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]) / det
                i12 = (J[0, 2] * J[1, 0] - J[0, 0] * J[1, 2]) / det
                i20 = (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]) / det
                i21 = (J[0, 1] * J[2, 0] - J[0, 0] * J[2, 1]) / det
                i22 = (J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]) / det
                for a in range(8):
                    g[a, 0] = i00 * dN[q, a, 0] + i10 * dN[q, a, 1] + i20 * dN[q, a, 2]
                    g[a, 1] = i01 * dN[q, a, 0] + i11 * dN[q, a, 1] + i21 * dN[q, a, 2]
                    g[a, 2] = i02 * dN[q, a, 0] + i12 * dN[q, a, 1] + i22 * dN[q, a, 2]
                wd = w[q] * det
                vol[e] += wd
                for a in range(8):
                    for b in range(8):
                        Ke[e, a, b] += wd * (
                            g[a, 0] * g[b, 0] + g[a, 1] * g[b, 1] + g[a, 2] * g[b, 2]
                        )
                        Me[e, a, b] += wd * N[q, a] * N[q, b]
            detmin[e] = dmin
        return Ke, Me, detmin, vol

    @njit(cache=True)
    def _quad_mass_numba(coords, dN, N, w):
        F = coords.shape[0]
        nq = w.shape[0]
        Be = np.zeros((F, 4, 4))
        area = np.zeros(F)
        tu = np.empty(3)
        tv = np.empty(3)
        for f in range(F):
            for q in range(nq):
                for i in range(3):
                    su = 0.0
                    sv = 0.0
                    for a in range(4):
                        su += coords[f, a, i] * dN[q, a, 0]
                        sv += coords[f, a, i] * dN[q, a, 1]
                    tu[i] = su
                    tv[i] = sv
                cx = tu[1] * tv[2] - tu[2] * tv[1]
                cy = tu[2] * tv[0] - tu[0] * tv[2]
                cz = tu[0] * tv[1] - tu[1] * tv[0]
                ds = np.sqrt(cx * cx + cy * cy + cz * cz)
                wds = w[q] * ds
                area[f] += wds
                for a in range(4):
                    for b in range(4):
                        Be[f, a, b] += wds * N[q, a] * N[q, b]
        return Be, area

    @njit(cache=True)
    def _csr_matvec_numba(indptr, indices, data, x):
        n = indptr.shape[0] - 1
        y = np.empty(n)
        for i in range(n):
            s = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                s += data[k] * x[indices[k]]
            y[i] = s
        return y

except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


USE_NUMBA = _HAVE_NUMBA and os.environ.get("ROBINHOM_NO_NUMBA", "0") != "1"


def hex_forms(coords):
    """Stiffness and mass element matrices for a batch of hexahedra."""
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    if USE_NUMBA:
        return _hex_forms_numba(coords, HEX_DN, HEX_N, HEX_W)
    return _hex_forms_numpy(coords)


def quad_mass(coords):
    """Surface mass element matrices for a batch of bilinear quad faces."""
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    if USE_NUMBA:
        return _quad_mass_numba(coords, QUAD_DN, QUAD_N, QUAD_W)
    return _quad_mass_numpy(coords)


def csr_matvec(indptr, indices, data, x):
    """y = A x for a CSR matrix given by its raw arrays."""
    if USE_NUMBA:
        return _csr_matvec_numba(indptr, indices, data, np.ascontiguousarray(x))
    return _csr_matvec_numpy(indptr, indices, data, x)
