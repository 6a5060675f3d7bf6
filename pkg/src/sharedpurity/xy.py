"""Nearest-neighbour shared purity in the anisotropic XY ring.

Hamiltonian (periodic, ``lam = h / J``)::

    H = J/2 sum_i [(1 + gamma) X_i X_{i+1} + (1 - gamma) Y_i Y_{i+1}] + h sum_i Z_i

The two-site reduced state of the ground state is fixed by four numbers
(``T_xx, T_yy, T_zz, M_z``). In the thermodynamic limit they are integrals
over momentum; for a finite ring of ``N`` sites the integrals become
averages over ``phi_m = (2m - 1) pi / N``.

``M_z`` is the ground-state ``<Z>``, which tends to -1 at strong field. For
odd ``N`` the momentum sums describe the unfrustrated chain (the ring with
a sublattice rotation on the XY couplings); the shared purity is the same
either way since the two differ by a local unitary.
"""
from __future__ import annotations

import csv
import functools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from ._parallel import pmap
from ._tolerances import QUAD_ABS_TOL
from .fidelity import OptimizerConfig, shared_purity
from .states import DensityOperator, eig_hermitian

__all__ = [
    "LAMBDA_C",
    "DEFAULT_N_LIST",
    "XYError",
    "QuadratureError",
    "XYParams",
    "CorrelatorSet",
    "XYPoint",
    "ScalingFit",
    "correlators_thermodynamic",
    "correlators_finite",
    "rho_ab",
    "lambda_grid",
    "sweep",
    "locate_minimum",
    "fit_power_law",
    "scaling_fit",
    "write_sweep_csv",
]

LAMBDA_C = 1.0
DEFAULT_N_LIST = (55, 65, 75, 85, 95, 105, 115, 125)
THERMODYNAMIC = math.inf


class XYError(ValueError):
    pass


class QuadratureError(XYError):
    pass


@dataclass(frozen=True)
class XYParams:
    gamma: float
    lam: float
    n_sites: float = THERMODYNAMIC

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise XYError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.n_sites != THERMODYNAMIC:
            n = int(self.n_sites)
            if n != self.n_sites or n < 5 or n % 2 == 0:
                raise XYError(f"n_sites must be an odd integer >= 5, got {self.n_sites}")

    @property
    def thermodynamic(self) -> bool:
        return self.n_sites == THERMODYNAMIC


@dataclass(frozen=True)
class CorrelatorSet:
    t_xx: float
    t_yy: float
    t_zz: float
    m_z: float

    def __post_init__(self):
        for name in ("t_xx", "t_yy", "t_zz", "m_z"):
            if abs(getattr(self, name)) > 1 + 1e-9:
                raise XYError(f"|{name}| = {abs(getattr(self, name))} exceeds 1")


@dataclass(frozen=True, eq=False)
class XYPoint:
    params: XYParams
    correlators: CorrelatorSet
    rho: DensityOperator = field(repr=False)
    f_global: float
    f_local: float
    s_p: float
    converged: bool = True
    ds_p_dlambda: float | None = None


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line through ``(log10 N, log10(lambda_c - lambda_c^N))``."""

    lambda_c_n: dict
    slope: float
    intercept: float
    residual: float
    monotone: bool = True
    gamma: float | None = None

    @property
    def flagged(self) -> bool:
        return not self.monotone

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "lambda_c": LAMBDA_C,
            "lambda_c_n": {str(k): v for k, v in self.lambda_c_n.items()},
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "monotone": self.monotone,
            "flagged": self.flagged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# --- correlators ------------------------------------------------------------

def _energy(phi, gamma, lam):
    return np.sqrt(gamma ** 2 * np.sin(phi) ** 2 + (lam - np.cos(phi)) ** 2)


def _g_integrand(phi, gamma, lam, R):
    return (gamma * np.sin(R * phi) * np.sin(phi) - np.cos(phi) * (np.cos(phi) - lam)) / _energy(phi, gamma, lam)


def _mz_integrand(phi, gamma, lam):
    return (np.cos(phi) - lam) / _energy(phi, gamma, lam)


def _average(func, args: tuple, name: str) -> float:
    gamma, lam = args[:2]
    # Lambda is smallest near phi = 0 when lam ~ 1; give the integrator that scale
    width = abs(lam - 1.0) / gamma
    points = [width] if 0.0 < width < math.pi else None
    val, err = integrate.quad(func, 0.0, math.pi, args=args, epsabs=1e-13, epsrel=0.0,
                              limit=1000, points=points)
    if not np.isfinite(val) or err > QUAD_ABS_TOL * math.pi:
        raise QuadratureError(f"quadrature for {name} at gamma={gamma}, lambda={lam} "
                              f"did not reach {QUAD_ABS_TOL} (error estimate {err:.2e})")
    return val / math.pi


def correlators_thermodynamic(gamma: float, lam: float) -> CorrelatorSet:
    """Correlators of the infinite chain by adaptive quadrature."""
    XYParams(gamma, lam)
    g_plus = _average(_g_integrand, (gamma, lam, 1), "G(+1)")
    g_minus = _average(_g_integrand, (gamma, lam, -1), "G(-1)")
    m_z = _average(_mz_integrand, (gamma, lam), "M_z")
    return CorrelatorSet(g_minus, g_plus, m_z ** 2 - g_plus * g_minus, m_z)


def correlators_finite(gamma: float, lam: float, n_sites: int) -> CorrelatorSet:
    """Correlators of an ``n_sites`` ring from discrete momentum averages."""
    XYParams(gamma, lam, n_sites)
    phi = (2 * np.arange(1, n_sites + 1) - 1) * math.pi / n_sites
    if np.min(_energy(phi, gamma, lam)) == 0.0:
        raise XYError(f"gapless momentum mode at gamma={gamma}, lambda={lam}, N={n_sites}")
    g_plus = float(np.mean(_g_integrand(phi, gamma, lam, 1)))
    g_minus = float(np.mean(_g_integrand(phi, gamma, lam, -1)))
    m_z = float(np.mean(_mz_integrand(phi, gamma, lam)))
    return CorrelatorSet(g_minus, g_plus, m_z ** 2 - g_plus * g_minus, m_z)


def correlators(gamma: float, lam: float, n_sites=THERMODYNAMIC) -> CorrelatorSet:
    if n_sites is None or n_sites == THERMODYNAMIC:
        return correlators_thermodynamic(gamma, lam)
    return correlators_finite(gamma, lam, int(n_sites))


def rho_ab(c: CorrelatorSet) -> DensityOperator:
    """Two-site density matrix assembled from the correlators."""
    a_p = (1 + c.t_zz) / 4
    a_m = (1 - c.t_zz) / 4
    b_p = (c.t_xx + c.t_yy) / 4
    b_m = (c.t_xx - c.t_yy) / 4
    m = np.array([
        [a_p + c.m_z / 2, 0, 0, b_m],
        [0, a_m, b_p, 0],
        [0, b_p, a_m, 0],
        [b_m, 0, 0, a_p - c.m_z / 2],
    ], dtype=complex)
    lam_min = eig_hermitian(m)[0][-1]
    if lam_min < -1e-9:
        raise XYError(f"correlators give a non-positive two-site state (min eigenvalue {lam_min:.3e})")
    return DensityOperator((2, 2), m)


# --- sweeps -----------------------------------------------------------------

def lambda_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Uniform grid on ``[lo, hi]`` placed so that ``lambda = 1`` falls midway between points."""
    k0 = math.ceil((lo - LAMBDA_C) / step - 0.5 - 1e-9)
    k1 = math.floor((hi - LAMBDA_C) / step - 0.5 + 1e-9)
    return LAMBDA_C + (np.arange(k0, k1 + 1) + 0.5) * step


def _point(lam: float, gamma: float, n_sites, config: OptimizerConfig) -> XYPoint:
    c = correlators(gamma, lam, n_sites)
    rho = rho_ab(c)
    r = shared_purity(rho, "full", config)
    return XYPoint(XYParams(gamma, lam, n_sites), c, rho, r.f_global, r.f_local, r.s_p, r.converged)


def sweep(gamma: float, lambdas: Sequence[float], n_sites=THERMODYNAMIC,
          config: OptimizerConfig | None = None, jobs: int = 1) -> list[XYPoint]:
    """Shared purity and its field derivative along a strictly increasing grid.

    The derivative uses central differences inside the grid and one-sided
    differences at the two ends.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or lambdas.size < 2 or np.any(np.diff(lambdas) <= 0):
        raise XYError("lambda grid must be strictly increasing with at least two points")
    if n_sites is None:
        n_sites = THERMODYNAMIC
    config = config or OptimizerConfig()
    pts = pmap(functools.partial(_point, gamma=gamma, n_sites=n_sites, config=config),
               [float(x) for x in lambdas], jobs)
    deriv = np.gradient(np.array([p.s_p for p in pts]), lambdas)
    out = []
    for p, d in zip(pts, deriv):
        object.__setattr__(p, "ds_p_dlambda", float(d))
        out.append(p)
    return out


def locate_minimum(lambdas: Sequence[float], values: Sequence[float]) -> float:
    """Grid argmin refined by the parabola through it and its two neighbours."""
    x = np.asarray(lambdas, dtype=float)
    y = np.asarray(values, dtype=float)
    i = int(np.argmin(y))
    if i == 0 or i == len(y) - 1:
        raise XYError("minimum of the derivative sits on the edge of the lambda window")
    x0, x1, x2 = x[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 ** 2 * (y0 - y1) + x1 ** 2 * (y2 - y0) + x0 ** 2 * (y1 - y2)) / denom
    if a <= 0:
        return float(x1)
    return float(-b / (2 * a))


def fit_power_law(lambda_c_n: dict, gamma: float | None = None) -> ScalingFit:
    """Fit ``lambda_c - lambda_c^N = k N^slope`` on log-log axes."""
    ns = np.array(sorted(lambda_c_n), dtype=float)
    lc = np.array([lambda_c_n[n] for n in sorted(lambda_c_n)], dtype=float)
    if ns.size < 2:
        raise XYError("need at least two system sizes")
    if np.any(lc >= LAMBDA_C):
        raise XYError("every finite-size critical point must lie below lambda_c = 1")
    x = np.log10(ns)
    y = np.log10(LAMBDA_C - lc)
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    monotone = bool(np.all(np.diff(lc) > 0))
    return ScalingFit({int(n): float(v) for n, v in zip(ns, lc)}, float(slope),
                      float(intercept), rms, monotone, gamma)


def scaling_fit(gamma: float = 0.8, n_list: Sequence[int] = DEFAULT_N_LIST,
                lambda_window: tuple[float, float] = (0.9, 1.05), step: float = 2e-3,
                config: OptimizerConfig | None = None, jobs: int = 1,
                return_sweeps: bool = False):
    """Locate the minimum of ``dS_P/dlambda`` for each ring size and fit the shift."""
    found = {}
    sweeps = {}
    grid = lambda_grid(*lambda_window, step)
    for n in n_list:
        pts = sweep(gamma, grid, int(n), config, jobs)
        sweeps[int(n)] = pts
        found[int(n)] = locate_minimum(grid, [p.ds_p_dlambda for p in pts])
    fit = fit_power_law(found, gamma)
    return (fit, sweeps) if return_sweeps else fit


def _num(x) -> str:
    return repr(float(x))


SWEEP_COLUMNS = ["gamma", "n_sites", "lambda", "t_xx", "t_yy", "t_zz", "m_z",
                 "f_global", "f_local", "s_p", "ds_p_dlambda"]


def write_sweep_csv(points: Sequence[XYPoint], path_or_file) -> None:
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for p in points:
            c = p.correlators
            n = "inf" if p.params.thermodynamic else int(p.params.n_sites)
            w.writerow([_num(p.params.gamma), n] + [_num(v) for v in (
                p.params.lam, c.t_xx, c.t_yy, c.t_zz, c.m_z, p.f_global, p.f_local, p.s_p)]
                + ["" if p.ds_p_dlambda is None else _num(p.ds_p_dlambda)])
    finally:
        if own:
            fh.close()
