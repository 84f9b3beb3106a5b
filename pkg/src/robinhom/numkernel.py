"""Sparse symmetric linear algebra: CG, inverse power, shift-and-invert.

All solvers are deterministic: fixed starting vectors, fixed summation
order (single-threaded matvec kernels), explicit iteration caps.  The
shifted operator A - shift*G of the indefinite pencil is handled with a
MINRES inner solver on a Jacobi-scaled system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import IndefiniteBreakdown, NoConvergence, ZeroPencil

LINEAR_TOL = 1e-9
EIGEN_TOL = 1e-7
SIGN_DEFINITE_SLACK = 1e-8


@dataclass
class SparseSym:
    """Symmetric sparse matrix in CSR form (sorted column indices)."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @classmethod
    def from_scipy(cls, m) -> "SparseSym":
        m = sp.csr_matrix(m)
        m.sum_duplicates()
        m.sort_indices()
        return cls(m.shape[0], m.indptr, m.indices, m.data)

    @classmethod
    def from_coo(cls, n, rows, cols, vals) -> "SparseSym":
        return cls.from_scipy(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))

    def to_scipy(self):
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.n))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return _kernels.csr_matvec(self.indptr, self.indices, self.data, x)

    def diagonal(self) -> np.ndarray:
        return self.to_scipy().diagonal()

    def restrict(self, idx: np.ndarray) -> "SparseSym":
        m = self.to_scipy()
        return SparseSym.from_scipy(m[idx][:, idx])

    def add_scaled(self, other: "SparseSym", c: float) -> "SparseSym":
        return SparseSym.from_scipy(self.to_scipy() + c * other.to_scipy())

    def scaled(self, c: float) -> "SparseSym":
        return SparseSym(self.n, self.indptr, self.indices, c * self.data)

    def symmetry_error(self) -> float:
        m = self.to_scipy()
        d = (m - m.T).tocoo()
        if d.nnz == 0:
            return 0.0
        scale = np.abs(self.data).max() if self.data.size else 1.0
        return np.abs(d.data).max() / max(scale, 1e-300)

    def dump_coordinate(self, path) -> None:
        """Write 'row col value' lines (coordinate text format)."""
        m = self.to_scipy().tocoo()
        with open(path, "w") as fh:
            for r, c, v in zip(m.row, m.col, m.data):
                fh.write(f"{r} {c} {v:.17g}\n")


@dataclass
class EigenPair:
    lam: float
    vector: np.ndarray
    residual: float
    iterations: int
    sign_definite: bool
    vgv_sign: int = 0
    diagnostics: dict = field(default_factory=dict)


def is_sign_definite(v: np.ndarray, slack: float = SIGN_DEFINITE_SLACK) -> bool:
    """True when all entries share one sign after max-normalisation."""
    amax = np.abs(v).max()
    if amax == 0.0:
        return False
    w = v / amax
    return bool(w.min() >= -slack or w.max() <= slack)


def cg_solve(K: SparseSym, rhs: np.ndarray, tol: float = LINEAR_TOL,
             x0: np.ndarray | None = None, iterate_log: list | None = None) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients for SPD K.

    Stops when ||K x - rhs|| <= tol * ||rhs||; raises NoConvergence after
    10 * dim iterations.
    """
    n = K.n
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros(n)
    d = K.diagonal()
    if np.any(d <= 0.0):
        raise ValueError("CG needs a positive diagonal (SPD operator)")
    dinv = 1.0 / d
    x = np.zeros(n) if x0 is None else x0.astype(float).copy()
    r = rhs - K.matvec(x)
    z = dinv * r
    p = z.copy()
    rz = r @ z
    max_iter = 10 * n
    for it in range(1, max_iter + 1):
        Kp = K.matvec(p)
        alpha = rz / (p @ Kp)
        x += alpha * p
        r -= alpha * Kp
        if iterate_log is not None:
            iterate_log.append(x.copy())
        if np.linalg.norm(r) <= tol * bnorm:
            return x
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NoConvergence(f"CG: no convergence in {max_iter} iterations")


def minres_solve(S: SparseSym, rhs: np.ndarray, tol: float = LINEAR_TOL,
                 max_iter: int | None = None) -> np.ndarray:
    """MINRES for a symmetric (possibly indefinite) system.

    The system is symmetrically Jacobi-scaled first, which is equivalent
    to MINRES preconditioned with the absolute diagonal.
    """
    n = S.n
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros(n)
    d = np.abs(S.diagonal())
    d[d < 1e-300] = 1.0
    sc = 1.0 / np.sqrt(d)
    b = sc * rhs

    def op(x):
        return sc * S.matvec(sc * x)

    if max_iter is None:
        max_iter = 10 * n
    # Paige-Saunders MINRES on the scaled system
    beta1 = np.linalg.norm(b)
    v_prev = np.zeros(n)
    v = b / beta1
    beta = beta1
    eta = beta1
    c_old = 1.0
    c = 1.0
    s_old = 0.0
    s = 0.0
    w_old = np.zeros(n)
    w = np.zeros(n)
    x = np.zeros(n)
    for it in range(1, max_iter + 1):
        Av = op(v)
        alpha = v @ Av
        r = Av - alpha * v - beta * v_prev
        beta_new = np.linalg.norm(r)
        # two Givens rotations
        rho1 = c * alpha - c_old * s * beta
        rho2 = s * alpha + c_old * c * beta
        rho3 = s_old * beta
        delta = np.hypot(rho1, beta_new)
        if delta == 0.0:
            raise IndefiniteBreakdown("MINRES breakdown: zero subdiagonal")
        c_new = rho1 / delta
        s_new = beta_new / delta
        w_new = (v - rho2 * w - rho3 * w_old) / delta
        x = x + c_new * eta * w_new
        eta = -s_new * eta
        if abs(eta) <= tol * beta1:
            return sc * x
        v_prev = v
        if beta_new < 1e-300:
            # Krylov space exhausted; solution is exact in that space
            return sc * x
        v = r / beta_new
        beta = beta_new
        c_old, s_old = c, s
        c, s = c_new, s_new
        w_old = w
        w = w_new
    raise IndefiniteBreakdown(f"MINRES: no convergence in {max_iter} iterations")


def _start_vector(n: int) -> np.ndarray:
    """Deterministic start with no special symmetry."""
    x = np.ones(n) + 1e-3 * np.cos(np.arange(n, dtype=float))
    return x / np.linalg.norm(x)


def inverse_power(A: SparseSym, Mlike: SparseSym, tol: float = EIGEN_TOL,
                  cg_tol: float = LINEAR_TOL, max_iter: int = 200) -> EigenPair:
    """Smallest eigenvalue of A v = lam * Mlike v, with A SPD, Mlike PSD.

    Returns the pair Mlike-normalised (v' Mlike v = 1).
    """
    n = A.n
    x = _start_vector(n)
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = Mlike.matvec(x)
        ny = np.linalg.norm(y)
        if ny <= 1e-300:
            raise ZeroPencil("Mlike annihilates the iterate")
        x = cg_solve(A, y, tol=cg_tol, x0=None)
        m = x @ Mlike.matvec(x)
        if m <= 0.0:
            raise ZeroPencil("iterate left the Mlike-positive cone")
        x = x / np.sqrt(m)
        Ax = A.matvec(x)
        lam = x @ Ax
        res = np.linalg.norm(Ax - lam * Mlike.matvec(x))
        if res <= tol * np.linalg.norm(Ax):
            return EigenPair(
                lam=lam, vector=x, residual=res, iterations=it,
                sign_definite=is_sign_definite(x),
                diagnostics={"norm": "Mlike"},
            )
    raise NoConvergence(f"inverse power: no convergence in {max_iter} iterations")


def pencil_nearest(A: SparseSym, G: SparseSym, shift: float,
                   tol: float = EIGEN_TOL, inner_tol: float = LINEAR_TOL,
                   max_iter: int = 100) -> EigenPair:
    """Eigenpair of A v = lam * G v nearest ``shift`` (G sign-indefinite).

    Shift-and-invert iteration x <- (A - shift*G)^{-1} (G x) with MINRES
    inner solves; the returned vector is normalised so |v' G v| = 1 and
    the sign of v' G v is reported.
    """
    S = A.add_scaled(G, -shift)
    n = A.n
    x = _start_vector(n)
    g = x @ G.matvec(x)
    if abs(g) > 1e-8:
        x = x / np.sqrt(abs(g))
    lam = shift
    for it in range(1, max_iter + 1):
        y = G.matvec(x)
        if np.linalg.norm(y) <= 1e-300:
            raise ZeroPencil("G annihilates the iterate")
        x = minres_solve(S, y, tol=inner_tol)
        g = x @ G.matvec(x)
        if abs(g) <= 1e-14 * (x @ x):
            # iterate G-isotropic; keep going with plain normalisation
            x = x / np.linalg.norm(x)
            continue
        x = x / np.sqrt(abs(g))
        Gx = G.matvec(x)
        Ax = A.matvec(x)
        gq = x @ Gx
        lam = (x @ Ax) / gq
        res = np.linalg.norm(Ax - lam * Gx)
        if res <= tol * max(np.linalg.norm(Ax), 1e-300):
            return EigenPair(
                lam=lam, vector=x, residual=res, iterations=it,
                sign_definite=is_sign_definite(x),
                vgv_sign=1 if gq > 0 else -1,
                diagnostics={"shift": shift},
            )
    raise NoConvergence(f"pencil iteration: no convergence in {max_iter} iterations")
