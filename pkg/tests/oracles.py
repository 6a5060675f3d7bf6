"""Independent reference computations used by the test-suite.

None of these share code paths with the package beyond the state types.
"""
from __future__ import annotations

import numpy as np
from scipy import optimize

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.array([[1, 0], [0, -1]], dtype=complex)


# --- exact diagonalization of the XY ring -----------------------------------

def _site_op(op, i, n):
    return np.kron(np.kron(np.eye(2 ** i), op), np.eye(2 ** (n - i - 1)))


def xy_ring_ground_state(gamma, lam, n):
    """Ground state of the unfrustrated ring ``-1/2 sum[(1+g)XX + (1-g)YY] + lam sum Z``.

    Returns ``(energies, ground_state)``; callers check the gap.
    """
    D = 2 ** n
    H = np.zeros((D, D), dtype=complex)
    for i in range(n):
        j = (i + 1) % n
        H -= 0.5 * ((1 + gamma) * _site_op(X, i, n) @ _site_op(X, j, n)
                    + (1 - gamma) * _site_op(Y, i, n) @ _site_op(Y, j, n))
        H += lam * _site_op(Z, i, n)
    w, v = np.linalg.eigh(H)
    return w, v[:, 0]


def xy_ed_two_site(gamma, lam, n):
    """Nearest-neighbour correlators and 2-site state from exact diagonalization.

    A sublattice rotation maps the unfrustrated ring onto the antiferromagnetic
    sign convention: T_xx and T_yy flip sign and the 2-site state is conjugated
    by ``Z x I``.
    """
    w, psi = xy_ring_ground_state(gamma, lam, n)
    t = psi.reshape(4, -1)
    rho = t @ t.conj().T
    zi = np.kron(Z, np.eye(2))
    rho = zi @ rho @ zi
    corr = {
        "t_xx": np.real(np.trace(rho @ np.kron(X, X))),
        "t_yy": np.real(np.trace(rho @ np.kron(Y, Y))),
        "t_zz": np.real(np.trace(rho @ np.kron(Z, Z))),
        "m_z": np.real(np.trace(rho @ np.kron(Z, np.eye(2)))),
    }
    return corr, rho, w[1] - w[0]


# --- brute-force best product overlaps --------------------------------------

def _bloch(theta, phi):
    return np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


def _top_eig_2x2(M):
    a = M[..., 0, 0].real
    c = M[..., 1, 1].real
    b = np.abs(M[..., 0, 1])
    return 0.5 * (a + c) + np.sqrt(0.25 * (a - c) ** 2 + b ** 2)


def _refine(f, x0):
    res = optimize.minimize(lambda x: -f(x), x0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
    return max(-res.fun, f(x0))


def best_product_two_qubit_mixed(rho, grid=200):
    """max <a b|rho|a b> over qubit product states.

    Scans party A's Bloch sphere on a ``grid x grid`` mesh; for each ``a`` the
    best ``b`` is the top eigenvector of ``<a|rho|a>`` (closed form). The best
    few grid points are then polished with Nelder-Mead.
    """
    r = np.asarray(rho).reshape(2, 2, 2, 2)

    def cond(th, ph):
        a = _bloch(th, ph)
        M = np.einsum("...i,ijkl,...k->...jl", a.conj(), r, a)
        return _top_eig_2x2(M)

    th, ph = np.meshgrid(np.linspace(0, np.pi, grid), np.linspace(0, 2 * np.pi, grid, endpoint=False),
                         indexing="ij")
    vals = cond(th, ph)
    best = np.argsort(vals.ravel())[-5:]
    f = lambda x: float(cond(np.asarray(x[0]), np.asarray(x[1])))
    return max(_refine(f, np.array([th.ravel()[i], ph.ravel()[i]])) for i in best)


def best_product_pure_qubits(psi, n, grid=None):
    """max |<a_1 ... a_n|psi>|^2 for an n-qubit pure state (n = 2, 3, 4).

    The first ``n - 2`` qubits are scanned over Bloch-sphere meshes; the last
    two are optimized exactly through the top singular value of the
    contracted 2x2 matrix. Best mesh points are polished with Nelder-Mead.
    """
    t = np.asarray(psi).reshape((2,) * n)
    if n == 2:
        return float(np.linalg.svd(t, compute_uv=False)[0] ** 2)
    k = n - 2
    grid = grid or {1: 60, 2: 22}[k]

    def value(angles):
        angles = np.atleast_2d(angles)
        m = np.broadcast_to(t, (len(angles),) + t.shape)
        for j in range(k):
            a = _bloch(angles[:, 2 * j], angles[:, 2 * j + 1])
            m = np.einsum("pi,pi...->p...", a.conj(), m)
        # m has shape (p, 2, 2): largest singular value squared
        M = m @ np.conj(np.swapaxes(m, -1, -2))
        return _top_eig_2x2(M)

    axes = []
    for _ in range(k):
        axes += [np.linspace(0, np.pi, grid), np.linspace(0, 2 * np.pi, grid, endpoint=False)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2 * k)
    vals = value(mesh)
    best = np.argsort(vals)[-8:]
    f = lambda x: float(value(np.asarray(x))[0])
    return max(_refine(f, mesh[i]) for i in best)
