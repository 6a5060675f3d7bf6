"""Global and local fidelities, shared purity, and Schmidt data.

The local fidelity ``max <phi|rho|phi>`` over product states is computed by
alternating block updates: with every factor except block ``k`` fixed, the
objective is ``phi_k^dag M_k phi_k`` for a small Hermitian ``M_k``, and the
best ``phi_k`` is its top eigenvector. Each update is optimal within its
block, so the objective never decreases. Many starts are run as one batch.

``rho`` is handled through a factorization ``rho = A A^dag`` (``A`` has one
column per nonzero eigenvalue), which makes pure states cost the same as a
vector contraction.
"""
from __future__ import annotations

import functools
import itertools
import string
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from . import _tolerances as tol
from .states import DensityOperator, PureState, StateError, eig_hermitian, permute_parties

__all__ = [
    "OptimizerConfig",
    "OptimizerDiagnostics",
    "ProductAnsatz",
    "SharedPurityResult",
    "SchmidtData",
    "global_fidelity",
    "local_fidelity",
    "shared_purity",
    "schmidt",
    "bipartitions",
    "pure_state_shared_purity",
    "alternating_maximize",
    "FULL",
    "NGEN",
]

FULL = "full-product"
NGEN = "n-gen"
_VARIANTS = {"full": FULL, "full-product": FULL, "ngen": NGEN, "n-gen": NGEN}

State = Union[DensityOperator, PureState]


def _variant(name: str) -> str:
    try:
        return _VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown variant {name!r}; use 'full' or 'ngen'") from None


@dataclass(frozen=True)
class OptimizerConfig:
    """Multistart settings for the local-fidelity optimizer.

    Attributes:
        n_starts: Number of Haar-random starts (deterministic starts are added
            on top of these).
        max_sweeps: Sweep cap per start.
        tol: A start is converged once a full sweep gains less than this.
        seed: Seed for the random starts; start ``i`` draws from its own
            stream derived from ``(seed, i)``.
    """

    n_starts: int = tol.DEFAULT_STARTS
    max_sweeps: int = tol.DEFAULT_MAX_SWEEPS
    tol: float = tol.DEFAULT_SWEEP_TOL
    seed: int = 0

    def with_seed(self, seed: int) -> "OptimizerConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class OptimizerDiagnostics:
    n_starts: int
    best_start_index: int
    iterations: int
    converged: bool
    history: np.ndarray = field(repr=False)

    @property
    def objective_history_length(self) -> int:
        return len(self.history)

    def to_dict(self) -> dict:
        return {
            "n_starts": self.n_starts,
            "best_start_index": self.best_start_index,
            "iterations": self.iterations,
            "converged": self.converged,
            "objective_history_length": self.objective_history_length,
        }


@dataclass(frozen=True, eq=False)
class ProductAnsatz:
    """Best product state found: one unit vector per block of parties.

    For the full-product variant every block is a single party. For the
    n-gen variant there are two blocks forming a bipartition.
    """

    factors: tuple
    blocks: tuple
    party_dims: tuple
    diagnostics: OptimizerDiagnostics | None = None

    @property
    def n_parties(self) -> int:
        return len(self.party_dims)

    @property
    def bipartition(self):
        return self.blocks if len(self.blocks) == 2 and self.n_parties > 2 else None

    def vector(self) -> np.ndarray:
        """The ansatz as a state vector in the original party order."""
        v = self.factors[0]
        for f in self.factors[1:]:
            v = np.kron(v, f)
        order = [p for b in self.blocks for p in b]
        return _unpermute(v, order, self.party_dims)


def _unpermute(v: np.ndarray, order: Sequence[int], party_dims: Sequence[int]) -> np.ndarray:
    permuted_dims = [party_dims[p] for p in order]
    t = v.reshape(permuted_dims)
    inv = np.argsort(order)
    return t.transpose(inv).ravel()


@dataclass(frozen=True)
class SharedPurityResult:
    f_global: float
    f_local: float
    s_p: float
    variant: str
    diagnostics: OptimizerDiagnostics | None = None
    ansatz: ProductAnsatz | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.diagnostics is None or self.diagnostics.converged

    def to_dict(self) -> dict:
        out = {
            "f_global": self.f_global,
            "f_local": self.f_local,
            "s_p": self.s_p,
            "variant": self.variant,
            "converged": self.converged,
        }
        if self.diagnostics is not None:
            out["diagnostics"] = self.diagnostics.to_dict()
        if self.ansatz is not None and self.ansatz.bipartition is not None:
            out["bipartition"] = [list(b) for b in self.ansatz.bipartition]
        return out


@dataclass(frozen=True)
class SchmidtData:
    bipartition: tuple
    coefficients: np.ndarray


# --- helpers ----------------------------------------------------------------

def _factor(state: State, cutoff: float = 1e-14) -> np.ndarray:
    """Return ``A`` with ``rho = A A^dag``; columns ordered by eigenvalue."""
    if isinstance(state, PureState):
        return state.vector[:, None]
    w, v = eig_hermitian(state)
    keep = w > cutoff * max(w[0], 1e-300)
    return v[:, keep] * np.sqrt(w[keep])


def _check_blocks(blocks, n: int) -> tuple:
    blocks = tuple(tuple(int(p) for p in b) for b in blocks)
    flat = [p for b in blocks for p in b]
    if any(len(b) == 0 for b in blocks) or sorted(flat) != list(range(n)):
        raise StateError("party-set", f"blocks {blocks} do not partition {n} parties")
    return blocks


def bipartitions(n_parties: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All ``2**(n-1) - 1`` bipartitions, the first block always holding party 0."""
    rest = range(1, n_parties)
    out = []
    for r in range(0, n_parties - 1):
        for extra in itertools.combinations(rest, r):
            a = (0,) + extra
            b = tuple(p for p in range(n_parties) if p not in a)
            out.append((a, b))
    return out


def _block_view(A: np.ndarray, dims, blocks):
    """Permute the rows of ``A`` so blocks are contiguous; reshape to block dims."""
    order = [p for b in blocks for p in b]
    r = A.shape[1]
    t = A.reshape(tuple(dims) + (r,)).transpose(order + [len(dims)])
    bdims = tuple(int(np.prod([dims[p] for p in b])) for b in blocks)
    return t.reshape(bdims + (r,)), bdims


def _deterministic_starts(T: np.ndarray, bdims) -> list[list[np.ndarray]]:
    """Basis, marginal-eigenvector and top-eigenvector-unfolding starts."""
    K = len(bdims)
    r = T.shape[-1]
    starts = []

    # computational-basis product states, largest diagonal entries first
    D = int(np.prod(bdims))
    diag = np.sum(np.abs(T.reshape(D, r)) ** 2, axis=1)
    n_basis = min(D, tol.MAX_BASIS_STARTS)
    for flat in np.argsort(-diag, kind="stable")[:n_basis]:
        idx = np.unravel_index(flat, bdims)
        starts.append([np.eye(d, dtype=complex)[i] for d, i in zip(bdims, idx)])

    # top eigenvectors of single-block marginals
    marg = []
    for k in range(K):
        m = np.moveaxis(T, k, 0).reshape(bdims[k], -1)
        marg.append(np.linalg.eigh(m @ m.conj().T)[1][:, -1])
    starts.append(marg)

    # leading left singular vector of each unfolding of the top eigenvector
    top = T[..., 0]
    hosvd = []
    for k in range(K):
        m = np.moveaxis(top, k, 0).reshape(bdims[k], -1)
        hosvd.append(np.linalg.svd(m)[0][:, 0])
    starts.append(hosvd)
    return starts


@functools.lru_cache(maxsize=64)
def _random_starts_cached(bdims: tuple, n_starts: int, seed: int) -> tuple:
    root = np.random.SeedSequence(seed)
    out = []
    for i in range(n_starts):
        rng = np.random.default_rng(np.random.SeedSequence(root.entropy, spawn_key=(i,)))
        z = rng.standard_normal((2, sum(bdims)))
        z = z[0] + 1j * z[1]
        vecs = np.split(z, np.cumsum(bdims)[:-1])
        out.append(tuple(v / np.linalg.norm(v) for v in vecs))
    for start in out:
        for v in start:
            v.setflags(write=False)
    return tuple(out)


def _random_starts(bdims, config: OptimizerConfig) -> list:
    return list(_random_starts_cached(tuple(bdims), int(config.n_starts), int(config.seed)))


def _top_eig(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Largest eigenvalue and its eigenvector for a stack of Hermitian matrices."""
    if M.shape[-1] != 2:
        w, v = np.linalg.eigh(M)
        return w[:, -1], v[:, :, -1]
    a = M[:, 0, 0].real
    c = M[:, 1, 1].real
    b = M[:, 0, 1]
    half = 0.5 * (a - c)
    lam = 0.5 * (a + c) + np.hypot(half, np.abs(b))
    # two candidate eigenvectors; keep the better conditioned one
    v1 = np.stack([b, lam - a], axis=1)
    v2 = np.stack([lam - c, b.conj()], axis=1)
    n1 = np.linalg.norm(v1, axis=1)
    n2 = np.linalg.norm(v2, axis=1)
    use1 = n1 >= n2
    v = np.where(use1[:, None], v1, v2)
    n = np.where(use1, n1, n2)
    degenerate = n < 1e-300
    v[degenerate] = [1.0, 0.0]
    n[degenerate] = 1.0
    return lam, v / n[:, None]


_EIN = string.ascii_lowercase.replace("s", "").replace("z", "")


def _contract_except(T: np.ndarray, factors: list[np.ndarray], k: int) -> np.ndarray:
    """``W[s, a, r] = sum_{others} T[..., a, ..., r] prod_j conj(phi_j[s])``."""
    K = len(factors)
    letters = _EIN[:K]
    ops = [T]
    terms = [letters + "z"]
    for j in range(K):
        if j != k:
            ops.append(factors[j].conj())
            terms.append("s" + letters[j])
    spec = ",".join(terms) + "->s" + letters[k] + "z"
    return np.einsum(spec, *ops, optimize=K > 2)


@dataclass
class _Batch:
    values: np.ndarray
    factors: list
    iterations: np.ndarray
    converged: np.ndarray
    trace: list = field(repr=False)

    def history(self, start: int) -> np.ndarray:
        """Objective after every block update for one start (initial value first)."""
        out = []
        for idx, vals in self.trace:
            hit = np.nonzero(idx == start)[0]
            if hit.size:
                out.append(vals[hit[0]])
        return np.array(out)


def alternating_maximize(T: np.ndarray, starts: list[list[np.ndarray]],
                         max_sweeps: int = tol.DEFAULT_MAX_SWEEPS,
                         sweep_tol: float = tol.DEFAULT_SWEEP_TOL) -> _Batch:
    """Run the alternating top-eigenvector iteration from every start.

    Args:
        T: Factor of ``rho`` reshaped to ``block_dims + (rank,)``.
        starts: One list of block vectors per start.

    Returns:
        Per-start final objectives, factors, sweep counts, convergence flags
        and objective histories (initial value, then one entry per block
        update).
    """
    K = T.ndim - 1
    S = len(starts)
    factors = [np.array([s[k] for s in starts], dtype=complex) for k in range(K)]
    for k in range(K):
        factors[k] /= np.linalg.norm(factors[k], axis=1, keepdims=True)

    W = _contract_except(T, factors, 0)
    proj = np.einsum("sar,sa->sr", W, factors[0].conj())
    value = np.sum(np.abs(proj) ** 2, axis=1)

    trace = [(np.arange(S), value.copy())]
    iterations = np.zeros(S, dtype=int)
    converged = np.zeros(S, dtype=bool)
    active = np.arange(S)
    sub = list(factors)

    for _ in range(max_sweeps):
        prev = value[active]
        for k in range(K):
            W = _contract_except(T, sub, k)
            M = W @ W.conj().transpose(0, 2, 1)
            cur, sub[k] = _top_eig(M)
            trace.append((active, cur))
        iterations[active] += 1
        value[active] = cur
        done = (cur - prev) < sweep_tol
        for k in range(K):
            factors[k][active] = sub[k]
        converged[active[done]] = True
        keep = ~done
        if not keep.any():
            break
        active = active[keep]
        sub = [f[keep] for f in sub]

    return _Batch(value, factors, iterations, converged, trace)


def _run_blocks(state: State, blocks, config: OptimizerConfig):
    A = _factor(state)
    T, bdims = _block_view(A, state.dims, blocks)
    starts = _deterministic_starts(T, bdims) + _random_starts(bdims, config)
    batch = alternating_maximize(T, starts, config.max_sweeps, config.tol)
    best = int(np.argmax(batch.values))
    diag = OptimizerDiagnostics(
        n_starts=len(starts),
        best_start_index=best,
        iterations=int(batch.iterations[best]),
        converged=bool(batch.converged[best]),
        history=batch.history(best),
    )
    ans = ProductAnsatz(
        factors=tuple(f[best].copy() for f in batch.factors),
        blocks=blocks,
        party_dims=tuple(state.dims),
        diagnostics=diag,
    )
    return float(batch.values[best]), ans


# --- public operations ------------------------------------------------------

def global_fidelity(rho: State) -> float:
    """Largest eigenvalue of the state (1 for pure states)."""
    if isinstance(rho, PureState):
        return 1.0
    return float(min(eig_hermitian(rho)[0][0], 1.0))


def local_fidelity(rho: State, variant: str = "full",
                   config: OptimizerConfig | None = None) -> tuple[float, ProductAnsatz]:
    """Best overlap ``<phi|rho|phi>`` over product states.

    ``variant="full"`` maximizes over fully product states; ``"ngen"`` over
    states that are product across at least one bipartition (the best over
    all bipartitions is returned). The two coincide for two parties.
    """
    config = config or OptimizerConfig()
    variant = _variant(variant)
    n = rho.n_parties
    if variant == FULL or n <= 2:
        return _run_blocks(rho, tuple((p,) for p in range(n)), config)

    best_val, best_ans, total_starts = -np.inf, None, 0
    for cut in bipartitions(n):
        val, ans = _run_blocks(rho, cut, config)
        total_starts += ans.diagnostics.n_starts
        if val > best_val:
            best_val, best_ans = val, ans
    d = best_ans.diagnostics
    diag = replace(d, n_starts=total_starts)
    return best_val, replace(best_ans, diagnostics=diag)


def shared_purity(rho: State, variant: str = "full",
                  config: OptimizerConfig | None = None) -> SharedPurityResult:
    """``F_G - F_L`` for the chosen product-state set."""
    variant = _variant(variant)
    fg = global_fidelity(rho)
    fl, ans = local_fidelity(rho, variant, config)
    fl = float(np.clip(fl, 0.0, fg))
    return SharedPurityResult(fg, fl, fg - fl, variant, ans.diagnostics, ans)


def _normalize_bipartition(bipartition, n: int) -> tuple:
    if len(bipartition) == 2 and all(isinstance(b, (tuple, list, np.ndarray)) for b in bipartition):
        a, b = (tuple(int(p) for p in x) for x in bipartition)
    else:
        a = tuple(int(p) for p in bipartition)
        b = tuple(p for p in range(n) if p not in a)
    if not a or not b:
        raise StateError("party-set", "both sides of a bipartition must be nonempty")
    _check_blocks((a, b), n)
    return a, b


def schmidt(psi: PureState, bipartition) -> SchmidtData:
    """Schmidt coefficients of a pure state across ``A:B``.

    ``bipartition`` is either the pair ``(A, B)`` or just ``A``.
    """
    if not isinstance(psi, PureState):
        raise TypeError("schmidt() needs a PureState")
    a, b = _normalize_bipartition(bipartition, psi.n_parties)
    da = int(np.prod([psi.dims[p] for p in a]))
    m = permute_parties(psi, a + b).vector.reshape(da, -1)
    s = np.linalg.svd(m, compute_uv=False)
    return SchmidtData((a, b), s)


def pure_state_shared_purity(psi: PureState, variant: str = "full",
                             config: OptimizerConfig | None = None) -> float:
    """Shared purity of a pure state.

    Full-product: one minus the best product overlap (geometric measure),
    from the optimizer. n-gen: one minus the largest squared Schmidt
    coefficient over all bipartitions, computed exactly.
    """
    variant = _variant(variant)
    if variant == NGEN:
        if psi.n_parties < 2:
            return 0.0
        best = max(schmidt(psi, cut).coefficients[0] ** 2 for cut in bipartitions(psi.n_parties))
        return float(max(0.0, 1.0 - best))
    fl, _ = local_fidelity(psi, FULL, config)
    return float(max(0.0, 1.0 - min(fl, 1.0)))
