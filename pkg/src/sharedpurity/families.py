"""Parametric state families with closed-form shared purity where known.

Family tags and parameter keys::

    bell_product_admixture  p
    bell_mixture            p
    noisy_pure              p, theta
    noisy_ghz_n             p, d, N
    generalized_ghz         theta, phi
    generalized_w           theta1, theta2, phi1, phi2
    ghz_class               delta, theta1, theta2, theta3, phi
    w_class                 phi1, phi2, phi3

Construction accepts the closure of each parameter range; :func:`sample_class`
draws from the half-open ranges used for random sampling.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .states import DensityOperator, PureState, StateError

__all__ = [
    "FAMILIES",
    "PURE_FAMILIES",
    "FamilySpec",
    "build",
    "pure_state",
    "oracle_shared_purity",
    "oracle_fidelities",
    "sample_class",
]

PI = math.pi
_SLACK = 1e-12

# closed parameter ranges accepted by build()
_RANGES = {
    "bell_product_admixture": {"p": (0.0, 1.0)},
    "bell_mixture": {"p": (0.0, 1.0)},
    "noisy_pure": {"p": (0.0, 1.0), "theta": (0.0, PI / 4)},
    "noisy_ghz_n": {"p": (0.0, 1.0), "d": (2, 64), "N": (2, 12)},
    "generalized_ghz": {"theta": (0.0, PI), "phi": (0.0, 2 * PI)},
    "generalized_w": {"theta1": (0.0, PI / 2), "theta2": (0.0, PI / 2),
                      "phi1": (0.0, 2 * PI), "phi2": (0.0, 2 * PI)},
    "ghz_class": {"delta": (0.0, PI / 4), "theta1": (0.0, PI / 2), "theta2": (0.0, PI / 2),
                  "theta3": (0.0, PI / 2), "phi": (0.0, 2 * PI)},
    "w_class": {"phi1": (0.0, PI / 2), "phi2": (0.0, PI / 2), "phi3": (0.0, PI / 2)},
}
_INTEGER_PARAMS = {"d", "N"}

FAMILIES = tuple(_RANGES)
PURE_FAMILIES = ("generalized_ghz", "generalized_w", "ghz_class", "w_class")

# sampling ranges: (low, high, kind) with kind in {"(]", "()", "[)"}
_SAMPLING = {
    "ghz_class": {"delta": (0.0, PI / 4, "(]"), "theta1": (0.0, PI / 2, "(]"),
                  "theta2": (0.0, PI / 2, "(]"), "theta3": (0.0, PI / 2, "(]"),
                  "phi": (0.0, 2 * PI, "[)")},
    "w_class": {"phi1": (0.0, PI / 2, "()"), "phi2": (0.0, PI / 2, "()"),
                "phi3": (0.0, PI / 2, "(]")},
    "generalized_ghz": {"theta": (0.0, PI, "()"), "phi": (0.0, 2 * PI, "[)")},
    "generalized_w": {"theta1": (0.0, PI / 2, "()"), "theta2": (0.0, PI / 2, "()"),
                      "phi1": (0.0, 2 * PI, "[)"), "phi2": (0.0, 2 * PI, "[)")},
}
SAMPLED_FAMILIES = tuple(_SAMPLING)


@dataclass(frozen=True)
class FamilySpec:
    """A family tag plus its named parameters."""

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in _RANGES:
            raise StateError("family", f"unknown family {self.family!r}; expected one of {FAMILIES}")
        ranges = _RANGES[self.family]
        missing = set(ranges) - set(self.params)
        extra = set(self.params) - set(ranges)
        if missing or extra:
            raise StateError("parameters", f"{self.family} needs exactly {sorted(ranges)}")
        clean = {}
        for key, (lo, hi) in ranges.items():
            val = self.params[key]
            if key in _INTEGER_PARAMS:
                if int(val) != val:
                    raise StateError("parameter-range", f"{key} must be an integer")
                val = int(val)
            else:
                val = float(val)
            if not (lo - _SLACK <= val <= hi + _SLACK):
                raise StateError("parameter-range", f"{key}={val} outside [{lo}, {hi}]")
            clean[key] = val
        if self.family == "noisy_ghz_n" and clean["d"] ** clean["N"] > 4096:
            raise StateError("parameter-range", "d**N larger than 4096")
        if self.family == "ghz_class" and _ghz_class_denominator(clean) <= _SLACK:
            raise StateError("normalization", "GHZ-class normalization factor diverges")
        object.__setattr__(self, "params", clean)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "FamilySpec":
        return cls(obj["family"], dict(obj.get("params", {})))


# --- constructors -----------------------------------------------------------

_S2 = 1 / math.sqrt(2)
PSI_MINUS = np.array([0, _S2, -_S2, 0], dtype=complex)
PSI_PLUS = np.array([0, _S2, _S2, 0], dtype=complex)


def _ghz_class_denominator(q: dict) -> float:
    return 1 + 2 * math.cos(q["delta"]) * math.sin(q["delta"]) * math.cos(q["theta1"]) \
        * math.cos(q["theta2"]) * math.cos(q["theta3"]) * math.cos(q["phi"])


def ghz_class_normalization(spec: FamilySpec) -> float:
    """The factor ``K`` that normalizes a GHZ-class state."""
    return 1.0 / _ghz_class_denominator(spec.params)


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def pure_state(spec: FamilySpec) -> PureState:
    """State vector for the pure three-qubit families."""
    q = spec.params
    f = spec.family
    if f == "generalized_ghz":
        v = math.cos(q["theta"]) * _ket("000") + np.exp(1j * q["phi"]) * math.sin(q["theta"]) * _ket("111")
    elif f == "generalized_w":
        s1, c1 = math.sin(q["theta1"]), math.cos(q["theta1"])
        s2, c2 = math.sin(q["theta2"]), math.cos(q["theta2"])
        v = (s1 * c2 * _ket("001") + s1 * s2 * np.exp(1j * q["phi1"]) * _ket("010")
             + c1 * np.exp(1j * q["phi2"]) * _ket("100"))
    elif f == "ghz_class":
        xi = [np.array([math.cos(q[k]), math.sin(q[k])]) for k in ("theta1", "theta2", "theta3")]
        prod = np.kron(np.kron(xi[0], xi[1]), xi[2])
        raw = math.cos(q["delta"]) * _ket("000") + np.exp(1j * q["phi"]) * math.sin(q["delta"]) * prod
        v = math.sqrt(ghz_class_normalization(spec)) * raw
    elif f == "w_class":
        p1, p2, p3 = q["phi1"], q["phi2"], q["phi3"]
        a = math.sin(p1) * math.sin(p2) * math.sin(p3)
        b = math.cos(p1) * math.sin(p2) * math.sin(p3)
        c = math.cos(p2) * math.sin(p3)
        d = math.cos(p3)
        v = a * _ket("001") + b * _ket("010") + c * _ket("100") + d * _ket("000")
    else:
        raise StateError("family", f"{f} is not a pure-state family")
    return PureState((2, 2, 2), v)


def build(spec: FamilySpec) -> DensityOperator:
    """Density operator for any family."""
    q = spec.params
    f = spec.family
    if f in PURE_FAMILIES:
        v = pure_state(spec).vector
        return DensityOperator((2, 2, 2), np.outer(v, v.conj()))
    if f == "bell_product_admixture":
        p = q["p"]
        m = (1 - p) * np.outer(PSI_MINUS, PSI_MINUS.conj())
        m[0, 0] += p
        return DensityOperator((2, 2), m)
    if f == "bell_mixture":
        p = q["p"]
        m = p * np.outer(PSI_MINUS, PSI_MINUS.conj()) + (1 - p) * np.outer(PSI_PLUS, PSI_PLUS.conj())
        return DensityOperator((2, 2), m)
    if f == "noisy_pure":
        p, th = q["p"], q["theta"]
        psi = math.cos(th) * _ket("00") + math.sin(th) * _ket("11")
        return DensityOperator((2, 2), p * np.outer(psi, psi.conj()) + (1 - p) * np.eye(4) / 4)
    if f == "noisy_ghz_n":
        p, d, n = q["p"], q["d"], q["N"]
        D = d ** n
        psi = np.zeros(D, dtype=complex)
        step = sum(d ** k for k in range(n))  # index of |j j ... j> is j * step
        psi[np.arange(d) * step] = 1 / math.sqrt(d)
        return DensityOperator((d,) * n, p * np.outer(psi, psi.conj()) + (1 - p) * np.eye(D) / D)
    raise AssertionError(f)


# --- closed forms -----------------------------------------------------------

def _admixture_branches(p: float) -> tuple[float, float]:
    return (1 - p) * (1 - 2 * p) / (2 - 3 * p), 0.0


def oracle_shared_purity(spec: FamilySpec) -> float | None:
    """Closed-form shared purity, or ``None`` where no formula is known."""
    q = spec.params
    f = spec.family
    if f == "bell_product_admixture":
        p = q["p"]
        low, high = _admixture_branches(p)
        if p == 0.5:
            if abs(low - high) > 1e-12:
                raise AssertionError("admixture branches disagree at p = 1/2")
            return high
        return low if p < 0.5 else high
    if f == "bell_mixture":
        return abs(q["p"] - 0.5)
    if f == "noisy_pure":
        fth = max(math.cos(q["theta"]) ** 2, math.sin(q["theta"]) ** 2)
        return q["p"] * (1 - fth)
    if f == "noisy_ghz_n":
        return q["p"] * (1 - 1 / q["d"])
    if f == "generalized_ghz":
        return 1 - max(math.cos(q["theta"]) ** 2, math.sin(q["theta"]) ** 2)
    return None


def oracle_fidelities(spec: FamilySpec) -> tuple[float, float] | None:
    """Closed-form ``(F_G, F_L)`` for the mixed families."""
    q = spec.params
    f = spec.family
    if f == "bell_product_admixture":
        p = q["p"]
        fg = max(p, 1 - p)
        fl = (1 - p) ** 2 / (2 - 3 * p) if p < 0.5 else p
        return fg, fl
    if f == "bell_mixture":
        return max(q["p"], 1 - q["p"]), 0.5
    if f == "noisy_pure":
        p = q["p"]
        fth = max(math.cos(q["theta"]) ** 2, math.sin(q["theta"]) ** 2)
        return (3 * p + 1) / 4, p * fth + (1 - p) / 4
    if f == "noisy_ghz_n":
        p, d, n = q["p"], q["d"], q["N"]
        return p + (1 - p) / d ** n, p / d + (1 - p) / d ** n
    return None


# --- sampling ---------------------------------------------------------------

def _map_unit(u: np.ndarray, lo: float, hi: float, kind: str) -> np.ndarray:
    """Map ``u`` in ``[0, 1)`` onto the interval described by ``kind``."""
    if kind == "[)":
        return lo + (hi - lo) * u
    if kind == "(]":
        return hi - (hi - lo) * u
    # open interval: reflect the rare exact endpoint
    x = lo + (hi - lo) * u
    return np.where(x <= lo, 0.5 * (lo + hi), x)


def sample_class(tag: str, n: int, seed=None) -> list[FamilySpec]:
    """Draw ``n`` parameter sets uniformly over a family's sampling ranges.

    Draws are row-major, so the first ``m`` samples for a seed do not depend
    on ``n``.
    """
    if tag not in _SAMPLING:
        raise StateError("family", f"cannot sample {tag!r}; expected one of {SAMPLED_FAMILIES}")
    if n < 1:
        raise ValueError("n must be >= 1")
    ranges = _SAMPLING[tag]
    rng = np.random.default_rng(seed)
    u = rng.random((n, len(ranges)))
    cols = {key: _map_unit(u[:, j], *ranges[key]) for j, key in enumerate(ranges)}
    return [FamilySpec(tag, {k: float(cols[k][i]) for k in ranges}) for i in range(n)]
