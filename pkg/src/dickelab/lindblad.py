"""Finite-dimensional Lindblad machinery.

Superoperators act on column-stacked density matrices: ``vec`` flattens in
Fortran order, so vec(A X B) = (B^T kron A) vec(X). Under that convention

    d vec(rho)/dt = [ -i (I kron H - H^T kron I)
                      + sum_k r_k ( conj(C_k) kron C_k
                                    - 1/2 I kron C_k^dag C_k
                                    - 1/2 (C_k^dag C_k)^T kron I ) ] vec(rho)

Steady states are found by one of three routes, auto-selected by Hilbert
dimension D:

* ``dense-nullspace``  (D <= 24): full SVD of the dense superoperator;
  the null vector and the spectral gap come out together.
* ``sparse-direct``    (D <= 400): minimum-residual solve of the
  trace-augmented system [L; w t] x = [0; w] through the normal
  equations, with a sparse LU and two refinement sweeps. The Dicke
  Liouvillian is narrow-banded, so fill-in stays small.
* ``long-time-integration`` (fallback): window-doubled propagation of a
  maximally mixed state until the residual settles. Explicit stepping,
  so it is the slow path; it exists for dimensions where factorization
  memory blows up and as an independent cross-check.

An ``iterative`` method (LSMR on the augmented system) can be requested
explicitly.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import NoConvergence, NonUniqueSteadyState, SolverError
from .operators import OperatorMatrix

DENSE_NULLSPACE_LIMIT = 24
SPARSE_DIRECT_LIMIT = 400

# NonUnique when the probe's second singular value drops below this times
# the superoperator scale.
UNIQUENESS_RTOL = 1e-6


def vectorize(mat: np.ndarray) -> np.ndarray:
    """Column-stack a matrix (Fortran-order flatten)."""
    return np.asarray(mat, dtype=np.complex128).flatten(order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vec).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class Liouvillian:
    """Sparse D^2 x D^2 generator with its ingredients kept alongside."""

    dim: int
    superoperator: sp.csr_array
    hamiltonian: OperatorMatrix
    collapse_ops: tuple

    @property
    def scale(self) -> float:
        """Infinity norm of the superoperator (max absolute row sum)."""
        return _inf_norm(self.superoperator)

    def apply(self, mat: np.ndarray) -> np.ndarray:
        """Action on a density-matrix-shaped operator."""
        return unvectorize(self.superoperator @ vectorize(mat), self.dim)

    def residual(self, mat: np.ndarray) -> float:
        return float(np.linalg.norm(self.superoperator @ vectorize(mat)))


def _inf_norm(s: sp.csr_array) -> float:
    return float(abs(s).sum(axis=1).max())


def _as_sparse(op) -> sp.csr_array:
    if isinstance(op, OperatorMatrix):
        return op.to_sparse()
    if sp.issparse(op):
        return sp.csr_array(op)
    return sp.csr_array(np.asarray(op, dtype=np.complex128))


def build_liouvillian(H, collapse) -> Liouvillian:
    """Assemble the vectorized generator from H and (rate, C) pairs.

    Rates must be non-negative; every operator must share the Hilbert
    dimension of H.
    """
    H_op = H if isinstance(H, OperatorMatrix) else OperatorMatrix(H)
    Hs = H_op.to_sparse()
    dim = Hs.shape[0]
    eye = sp.identity(dim, dtype=np.complex128, format="csr")

    gen = -1j * (sp.kron(eye, Hs, format="csr") - sp.kron(Hs.T, eye, format="csr"))
    ops = []
    for rate, C in collapse:
        if rate < 0:
            raise ValueError(f"collapse rate must be non-negative, got {rate}")
        C_op = C if isinstance(C, OperatorMatrix) else OperatorMatrix(C)
        if C_op.dim != dim:
            raise ValueError(
                f"collapse operator dimension {C_op.dim} != Hamiltonian dimension {dim}"
            )
        Cs = C_op.to_sparse()
        CdC = (Cs.conj().T @ Cs).tocsr()
        gen = gen + rate * (
            sp.kron(Cs.conj(), Cs, format="csr")
            - 0.5 * sp.kron(eye, CdC, format="csr")
            - 0.5 * sp.kron(CdC.T, eye, format="csr")
        )
        ops.append((float(rate), C_op))

    return Liouvillian(
        dim=dim,
        superoperator=gen.tocsr(),
        hamiltonian=H_op,
        collapse_ops=tuple(ops),
    )


class DensityMatrix:
    """Hermitian, unit-trace, numerically PSD matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, herm_atol=1e-12, trace_atol=1e-12,
                 psd_floor=-1e-8, validate=True):
        mat = np.asarray(matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        self.matrix = mat
        if validate:
            self.validate(herm_atol=herm_atol, trace_atol=trace_atol,
                          psd_floor=psd_floor)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, *, herm_atol=1e-12, trace_atol=1e-12, psd_floor=-1e-8):
        scale = max(1.0, float(np.abs(self.matrix).max()))
        herm_dev = float(np.abs(self.matrix - self.matrix.conj().T).max())
        if herm_dev > herm_atol * scale:
            raise ValueError(f"not Hermitian: max deviation {herm_dev:.3e}")
        trace_dev = abs(self.matrix.trace() - 1.0)
        if trace_dev > trace_atol:
            raise ValueError(f"trace differs from 1 by {trace_dev:.3e}")
        min_eig = self.min_eigenvalue()
        if min_eig < psd_floor:
            raise ValueError(f"minimum eigenvalue {min_eig:.3e} below floor {psd_floor:.1e}")

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    @classmethod
    def from_raw(cls, mat, *, psd_floor=-1e-8) -> "DensityMatrix":
        """Build from a raw solver vector: hermitize, normalize the trace,
        and floor eigenvalues in (psd_floor, 0). Larger PSD violations are
        a solver failure, not rounding noise to be masked."""
        mat = np.asarray(mat, dtype=np.complex128)
        herm = 0.5 * (mat + mat.conj().T)
        tr = herm.trace()
        if abs(tr) < 1e-6 * max(np.abs(herm).max(), 1e-300):
            raise SolverError("steady-state candidate is (nearly) traceless")
        herm = herm / tr
        evals, evecs = np.linalg.eigh(herm)
        min_eig = float(evals[0])
        if min_eig < psd_floor:
            raise SolverError(
                f"steady-state candidate has eigenvalue {min_eig:.3e} below "
                f"the PSD floor {psd_floor:.1e}"
            )
        if min_eig < 0.0:
            evals = np.clip(evals, 0.0, None)
            herm = (evecs * evals) @ evecs.conj().T
            herm = herm / herm.trace()
        return cls(herm, validate=False)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def expect(rho, A) -> complex:
    """trace(A rho). Real to machine precision for Hermitian A."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if isinstance(A, OperatorMatrix):
        if A.dim != mat.shape[0]:
            raise ValueError(f"dimension mismatch: operator {A.dim}, state {mat.shape[0]}")
        if A.is_sparse:
            return complex(A.matrix.multiply(mat.T).sum())
        return complex(np.einsum("ij,ji->", A.matrix, mat))
    A = np.asarray(A)
    if A.shape[0] != mat.shape[0]:
        raise ValueError(f"dimension mismatch: operator {A.shape[0]}, state {mat.shape[0]}")
    return complex(np.einsum("ij,ji->", A, mat))


def trace_distance(rho, sigma) -> float:
    """Half the nuclear norm of the difference."""
    a = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    diff = 0.5 * ((a - b) + (a - b).conj().T)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())


@dataclass
class SteadyStateOptions:
    """Knobs for :func:`steady_state`.

    ``tol`` is an absolute residual bound; None means 1e-10 times the
    superoperator scale. ``method`` overrides the size-based selection.
    """

    tol: float | None = None
    method: str | None = None
    check_unique: bool = True
    psd_floor: float = -1e-8
    # long-time-integration controls
    max_windows: int = 12
    rtol: float = 1e-10

    def resolve_method(self, dim: int) -> str:
        if self.method is not None:
            return self.method
        if dim <= DENSE_NULLSPACE_LIMIT:
            return "dense-nullspace"
        if dim <= SPARSE_DIRECT_LIMIT:
            return "sparse-direct"
        return "long-time-integration"


@dataclass(frozen=True)
class SteadyStateSolveReport:
    method: str
    residual: float
    iterations: int
    wall_time: float
    uniqueness_ratio: float | None = None


def _trace_row(dim: int) -> sp.csr_array:
    cols = np.arange(dim) * (dim + 1)
    data = np.ones(dim, dtype=np.complex128)
    return sp.csr_array((data, (np.zeros(dim, dtype=int), cols)), shape=(1, dim * dim))


def steady_state(L: Liouvillian, opts: SteadyStateOptions | None = None):
    """Stationary density matrix of L, with a solve report.

    Returns ``(DensityMatrix, SteadyStateSolveReport)``. Raises
    NonUniqueSteadyState when the null-space probe finds a second
    near-stationary direction, NoConvergence when the residual target
    cannot be met.
    """
    if opts is None:
        opts = SteadyStateOptions()
    method = opts.resolve_method(L.dim)
    scale = L.scale
    tol = opts.tol if opts.tol is not None else 1e-10 * max(scale, 1.0)

    t0 = time.perf_counter()
    if method == "dense-nullspace":
        raw, iterations, uniq = _solve_dense(L, opts)
    elif method == "sparse-direct":
        raw, iterations, uniq = _solve_sparse_direct(L, opts)
    elif method == "iterative":
        raw, iterations, uniq = _solve_lsmr(L, opts)
    elif method == "long-time-integration":
        raw, iterations, uniq = _solve_integration(L, opts, tol)
    else:
        raise ValueError(f"unknown steady-state method {method!r}")

    if opts.check_unique and uniq is not None and uniq <= UNIQUENESS_RTOL:
        raise NonUniqueSteadyState(
            f"second stationary direction at relative level {uniq:.2e}"
        )
    rho = DensityMatrix.from_raw(unvectorize(raw, L.dim), psd_floor=opts.psd_floor)
    residual = L.residual(rho.matrix)
    wall = time.perf_counter() - t0

    if residual > tol:
        raise NoConvergence(
            f"steady-state residual {residual:.3e} above tolerance {tol:.3e} "
            f"(method {method})"
        )
    report = SteadyStateSolveReport(
        method=method,
        residual=residual,
        iterations=iterations,
        wall_time=wall,
        uniqueness_ratio=uniq,
    )
    return rho, report


def _solve_dense(L: Liouvillian, opts: SteadyStateOptions):
    dense = L.superoperator.toarray()
    _, svals, vh = np.linalg.svd(dense)
    null_vec = vh[-1].conj()
    uniq = None
    if opts.check_unique and len(svals) >= 2:
        uniq = float(svals[-2] / max(svals[0], 1e-300))
    return null_vec, 0, uniq


def _augmented_system(L: Liouvillian):
    scale = max(L.scale, 1e-300)
    trow = _trace_row(L.dim) * scale
    A = sp.vstack([L.superoperator, trow], format="csr")
    b = np.zeros(L.dim * L.dim + 1, dtype=np.complex128)
    b[-1] = scale
    return A, b, scale


def _solve_sparse_direct(L: Liouvillian, opts: SteadyStateOptions):
    A, b, scale = _augmented_system(L)
    Ah = A.conj().T.tocsr()
    normal = (Ah @ A).tocsc()
    try:
        lu = spla.splu(normal)
    except RuntimeError as exc:  # exactly singular factor
        raise NonUniqueSteadyState(
            f"trace-augmented normal matrix is singular ({exc})"
        ) from exc
    x = lu.solve(Ah @ b)
    refinements = 2
    for _ in range(refinements):
        r = b - A @ x
        x = x + lu.solve(Ah @ r)

    uniq = None
    if opts.check_unique:
        uniq = _uniqueness_probe(A, normal, lu, scale)
    return x, refinements, uniq


def _uniqueness_probe(A, normal, lu, scale):
    """Smallest singular value of the trace-augmented system, via one
    shift-invert eigenpair of the normal matrix. A unique steady state
    keeps it at the order of the scale; a second stationary direction
    drives it to zero."""
    n = normal.shape[0]
    opinv = spla.LinearOperator((n, n), matvec=lu.solve, dtype=np.complex128)
    v0 = np.ones(n, dtype=np.complex128) / math.sqrt(n)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            vals = spla.eigsh(
                normal, k=1, sigma=0, which="LM", OPinv=opinv, v0=v0,
                return_eigenvectors=False, maxiter=200, tol=1e-8,
            )
    except Exception:
        return None
    lam = float(max(vals[0], 0.0))
    return math.sqrt(lam) / scale


def _solve_lsmr(L: Liouvillian, opts: SteadyStateOptions):
    A, b, scale = _augmented_system(L)
    result = spla.lsmr(A, b, atol=1e-14, btol=1e-14, maxiter=20 * A.shape[1])
    x, istop, itn = result[0], result[1], result[2]
    if istop not in (0, 1, 2):
        raise NoConvergence(f"LSMR stopped with flag {istop} after {itn} iterations")
    return x, int(itn), None


def _solve_integration(L: Liouvillian, opts: SteadyStateOptions, tol: float):
    dim = L.dim
    S = L.superoperator
    scale = max(L.scale, 1e-300)
    y = vectorize(np.eye(dim, dtype=np.complex128) / dim)

    def rhs(t, v):
        return S @ v

    window = 25.0 * dim / scale
    iterations = 0
    for _ in range(opts.max_windows):
        sol = solve_ivp(
            rhs, (0.0, window), y, method="DOP853",
            rtol=opts.rtol, atol=1e-14, dense_output=False,
        )
        if not sol.success:
            raise NoConvergence(f"integrator failed: {sol.message}")
        y = sol.y[:, -1]
        iterations += 1
        if float(np.linalg.norm(S @ y)) <= 0.5 * tol * abs(np.sum(y[:: dim + 1]).real):
            return y, iterations, None
        window *= 2.0
    raise NoConvergence(
        f"long-time integration did not settle within {opts.max_windows} windows"
    )


def time_evolve(L: Liouvillian, rho0: DensityMatrix, t_grid, *,
                rtol=1e-12, atol=None):
    """Propagate rho0 along t_grid with an adaptive high-order RK scheme.

    Returns one DensityMatrix per grid point (the grid must be ascending
    and non-negative; t=0 returns the initial state). States are checked,
    not repaired: trace and Hermiticity drift stay visible to the caller,
    which is why the default tolerances are tight.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be strictly increasing and non-negative")
    S = L.superoperator
    y0 = vectorize(rho0.matrix)
    if atol is None:
        atol = 1e-14 * max(1.0, float(np.abs(y0).max()))

    def rhs(t, v):
        return S @ v

    t_end = float(t_grid[-1])
    if t_end == 0.0:
        return [DensityMatrix(rho0.matrix, validate=False)]
    sol = solve_ivp(
        rhs, (0.0, t_end), y0, t_eval=t_grid, method="DOP853",
        rtol=rtol, atol=atol,
    )
    if not sol.success:
        raise NoConvergence(f"time evolution failed: {sol.message}")
    states = []
    for k in range(sol.y.shape[1]):
        mat = unvectorize(sol.y[:, k], L.dim)
        dm = DensityMatrix(mat, validate=False)
        dm.validate(herm_atol=1e-9, trace_atol=1e-9, psd_floor=-1e-8)
        states.append(dm)
    return states


def two_time_correlator(L: Liouvillian, rho_ss: DensityMatrix, A, B, tau_grid, *,
                        rtol=1e-10, atol=None):
    """Steady-state correlator <A(0) B(tau)> by quantum regression.

    Propagates rho_ss A under L and traces against B at each lag. The
    tau=0 value equals the one-time expectation of A B.
    """
    tau_grid = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    if np.any(np.diff(tau_grid) <= 0) or tau_grid[0] < 0:
        raise ValueError("tau_grid must be strictly increasing and non-negative")

    A_mat = A.to_dense() if isinstance(A, OperatorMatrix) else np.asarray(A)
    B_mat = B.to_dense() if isinstance(B, OperatorMatrix) else np.asarray(B)
    if A_mat.shape[0] != L.dim or B_mat.shape[0] != L.dim:
        raise ValueError("operator dimension does not match the Liouvillian")

    X0 = rho_ss.matrix @ A_mat
    y0 = vectorize(X0)
    if atol is None:
        atol = 1e-13 * max(1.0, float(np.abs(y0).max()))
    S = L.superoperator

    def rhs(t, v):
        return S @ v

    # value at a lag: trace(B X) with X the propagated operator
    def overlap(v):
        X = unvectorize(v, L.dim)
        return complex(np.einsum("ij,ji->", B_mat, X))

    values = np.empty(tau_grid.size, dtype=np.complex128)
    start = 0
    if tau_grid[0] == 0.0:
        values[0] = overlap(y0)
        start = 1
    if start < tau_grid.size:
        sol = solve_ivp(
            rhs, (0.0, float(tau_grid[-1])), y0, t_eval=tau_grid[start:],
            method="DOP853", rtol=rtol, atol=atol,
        )
        if not sol.success:
            raise NoConvergence(f"correlator propagation failed: {sol.message}")
        for k in range(sol.y.shape[1]):
            values[start + k] = overlap(sol.y[:, k])
    return values
