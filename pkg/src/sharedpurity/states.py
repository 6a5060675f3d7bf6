"""Dense multipartite quantum states.

Party ordering is big-endian: party 0 is the most significant tensor slot,
so basis index ``i_0 i_1 ... i_{N-1}`` matches ``np.kron`` ordering.
Party labels throughout the package are 0-based.
"""
from __future__ import annotations

import json
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.stats import unitary_group

from ._tolerances import HERMITIAN_TOL, NORM_TOL, PSD_TOL, TRACE_TOL

__all__ = [
    "StateError",
    "DensityOperator",
    "PureState",
    "tensor",
    "partial_trace",
    "permute_parties",
    "eig_hermitian",
    "haar_random_pure",
    "random_density",
    "random_unitary",
    "apply_local_unitaries",
    "state_to_dict",
    "state_from_dict",
    "load_state",
    "save_state",
]

_LETTERS = string.ascii_letters


class StateError(ValueError):
    """Raised when a state violates one of its invariants.

    The ``invariant`` attribute names the violated property (for example
    ``"unit-trace"``) so that callers can report it verbatim.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = f"{invariant} invariant violated"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


def _check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise StateError("dims", "need at least one party")
    if any(d < 2 for d in dims):
        raise StateError("dims", f"every party dimension must be >= 2, got {dims}")
    return dims


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace operator on a tensor product.

    Args:
        dims: Per-party dimensions ``(d_0, ..., d_{N-1})``.
        matrix: Square complex matrix of side ``prod(dims)``.
        validate: Check the Hermitian / unit-trace / PSD invariants.
    """

    dims: tuple[int, ...]
    matrix: np.ndarray
    validate: bool = True

    def __post_init__(self):
        dims = _check_dims(self.dims)
        mat = _frozen(self.matrix)
        D = int(np.prod(dims))
        if mat.shape != (D, D):
            raise StateError("shape", f"matrix shape {mat.shape} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)
        if self.validate:
            _validate_density(mat)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dims) -> "DensityOperator":
        D = int(np.prod(dims))
        return cls(dims, np.eye(D) / D)

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(eig_hermitian(self)[0][0] - 1.0) <= tol

    def tensor_view(self) -> np.ndarray:
        """The matrix reshaped to ``dims + dims`` (row indices first)."""
        return self.matrix.reshape(self.dims + self.dims)

    def expectation(self, op: np.ndarray) -> float:
        return float(np.real(np.trace(self.matrix @ op)))


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm state vector on a tensor product of ``dims``."""

    dims: tuple[int, ...]
    vector: np.ndarray
    validate: bool = True

    def __post_init__(self):
        dims = _check_dims(self.dims)
        vec = _frozen(np.ravel(self.vector))
        if vec.shape != (int(np.prod(dims)),):
            raise StateError("shape", f"vector length {vec.size} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "vector", vec)
        if self.validate:
            norm = np.linalg.norm(vec)
            if abs(norm - 1.0) > NORM_TOL:
                raise StateError("unit-norm", f"|v| = {norm!r}")

    @classmethod
    def from_unnormalized(cls, dims, vector) -> "PureState":
        v = np.asarray(vector, dtype=complex)
        return cls(dims, v / np.linalg.norm(v))

    @classmethod
    def basis(cls, dims, index: Sequence[int]) -> "PureState":
        """Computational basis state ``|i_0 ... i_{N-1}>``."""
        v = np.zeros(dims, dtype=complex)
        v[tuple(index)] = 1.0
        return cls(dims, v.ravel())

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def density(self) -> DensityOperator:
        return DensityOperator(self.dims, np.outer(self.vector, self.vector.conj()), validate=False)


State = Union[DensityOperator, PureState]


def _validate_density(mat: np.ndarray) -> None:
    herm_err = np.max(np.abs(mat - mat.conj().T))
    if herm_err > HERMITIAN_TOL:
        raise StateError("hermitian", f"max |rho - rho^dag| = {herm_err:.3e}")
    tr = np.trace(mat)
    if abs(tr - 1.0) > TRACE_TOL:
        raise StateError("unit-trace", f"tr rho = {tr.real:.12g}")
    lam_min = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0]
    if lam_min < -PSD_TOL:
        raise StateError("positive-semidefinite", f"min eigenvalue {lam_min:.3e}")


def tensor(a: State, b: State) -> State:
    """Kronecker product of two states of the same kind; dims are concatenated."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(a.dims + b.dims, np.kron(a.vector, b.vector))
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(a.dims + b.dims, np.kron(a.matrix, b.matrix))
    raise TypeError("tensor() needs two states of the same kind")


def _check_parties(parties, n: int) -> tuple[int, ...]:
    parties = tuple(int(p) for p in parties)
    if not parties:
        raise StateError("party-set", "empty party set")
    if len(set(parties)) != len(parties):
        raise StateError("party-set", f"repeated labels in {parties}")
    if any(p < 0 or p >= n for p in parties):
        raise StateError("party-set", f"labels {parties} out of range for {n} parties")
    return parties


def partial_trace(rho: State, keep: Sequence[int]) -> DensityOperator:
    """Reduced state on the parties in ``keep``.

    The result's parties follow the order given in ``keep``, so this can
    also be used to reorder parties.
    """
    if isinstance(rho, PureState):
        rho = rho.density()
    n = rho.n_parties
    keep = _check_parties(keep, n)
    rows = list(_LETTERS[:n])
    cols = list(_LETTERS[n:2 * n])
    for j in range(n):
        if j not in keep:
            cols[j] = rows[j]
    out = "".join(rows[j] for j in keep) + "".join(cols[j] for j in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, rho.tensor_view())
    dk = tuple(rho.dims[j] for j in keep)
    D = int(np.prod(dk))
    return DensityOperator(dk, red.reshape(D, D), validate=False)


def permute_parties(state: State, order: Sequence[int]) -> State:
    """Reorder tensor factors so that new party ``i`` is old party ``order[i]``."""
    order = _check_parties(order, state.n_parties)
    if len(order) != state.n_parties:
        raise StateError("party-set", "permutation must list every party")
    dims = tuple(state.dims[j] for j in order)
    if isinstance(state, PureState):
        v = state.vector.reshape(state.dims).transpose(order)
        return PureState(dims, v.ravel(), validate=False)
    n = state.n_parties
    t = state.tensor_view().transpose(list(order) + [n + j for j in order])
    D = state.dim
    return DensityOperator(dims, t.reshape(D, D), validate=False)


def eig_hermitian(rho) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian operator, eigenvalues descending.

    Accepts a :class:`DensityOperator` or a raw square array. Columns of the
    returned matrix are the orthonormal eigenvectors.
    """
    mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise StateError("shape", "eig_hermitian needs a square matrix")
    err = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    if err > HERMITIAN_TOL:
        raise StateError("hermitian", f"max |A - A^dag| = {err:.3e}")
    w, v = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    return w[::-1].copy(), v[:, ::-1].copy()


def haar_random_pure(dims, seed=None) -> PureState:
    """Haar-uniform pure state: normalized i.i.d. complex Gaussian vector."""
    dims = _check_dims(np.atleast_1d(dims))
    rng = np.random.default_rng(seed)
    D = int(np.prod(dims))
    v = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    return PureState(dims, v / np.linalg.norm(v))


def random_density(dims, seed=None, rank: int | None = None) -> DensityOperator:
    """Random mixed state from the induced (Ginibre) measure.

    ``rank`` defaults to full rank. ``rank=1`` gives a Haar pure state.
    """
    dims = _check_dims(np.atleast_1d(dims))
    rng = np.random.default_rng(seed)
    D = int(np.prod(dims))
    r = D if rank is None else int(rank)
    g = rng.standard_normal((D, r)) + 1j * rng.standard_normal((D, r))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(dims, m / np.trace(m).real)


def random_unitary(d: int, seed=None) -> np.ndarray:
    return unitary_group.rvs(d, random_state=np.random.default_rng(seed))


def apply_local_unitaries(state: State, unitaries: Sequence[np.ndarray]) -> State:
    """Apply ``U_0 x U_1 x ...`` to a state (one unitary per party)."""
    if len(unitaries) != state.n_parties:
        raise ValueError("need one unitary per party")
    U = unitaries[0]
    for u in unitaries[1:]:
        U = np.kron(U, u)
    if isinstance(state, PureState):
        return PureState(state.dims, U @ state.vector, validate=False)
    return DensityOperator(state.dims, U @ state.matrix @ U.conj().T, validate=False)


# --- JSON state files -------------------------------------------------------

def _pairs(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.ravel(a)]


def _unpairs(entries, shape) -> np.ndarray:
    try:
        arr = np.asarray(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateError("format", "entries must be [re, im] pairs") from exc
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise StateError("format", "entries must be [re, im] pairs")
    z = arr[..., 0] + 1j * arr[..., 1]
    if z.size != int(np.prod(shape)):
        raise StateError("shape", f"expected {int(np.prod(shape))} entries, got {z.size}")
    return z.reshape(shape)


def state_to_dict(state: State) -> dict:
    if isinstance(state, PureState):
        return {"dims": list(state.dims), "vector": _pairs(state.vector)}
    return {"dims": list(state.dims), "matrix": _pairs(state.matrix)}


def state_from_dict(obj: dict) -> State:
    """Parse ``{"dims": [...], "matrix"|"vector": [[re, im], ...]}``.

    The matrix may be given flat (row-major) or as nested rows.
    """
    if not isinstance(obj, dict) or "dims" not in obj:
        raise StateError("format", "state object needs a 'dims' field")
    dims = _check_dims(obj["dims"])
    D = int(np.prod(dims))
    if "vector" in obj:
        return PureState(dims, _unpairs(obj["vector"], (D,)))
    if "matrix" in obj:
        return DensityOperator(dims, _unpairs(obj["matrix"], (D, D)))
    raise StateError("format", "state object needs a 'matrix' or 'vector' field")


def load_state(path) -> State:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StateError("format", f"malformed JSON: {exc}") from exc
    return state_from_dict(obj)


def save_state(state: State, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(state)))
