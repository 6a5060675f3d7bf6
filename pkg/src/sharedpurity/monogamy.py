"""Shared-purity monogamy scores of three-qubit pure states.

A state is monogamous when ``S_P(rho_12) + S_P(rho_13) <= S_P(1:23)``, i.e.
when the score ``delta = S_P(1:23) - S_P(rho_12) - S_P(rho_13)`` is
nonnegative. The squared score uses the squares of the three terms.
"""
from __future__ import annotations

import csv
import functools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._parallel import pmap
from .families import FamilySpec, pure_state, sample_class
from .fidelity import OptimizerConfig, schmidt, shared_purity
from .states import PureState, partial_trace

__all__ = [
    "MONOGAMY_TOL",
    "MonogamyRecord",
    "FractionEstimate",
    "monogamy_score",
    "score_samples",
    "estimate_fraction",
    "fraction_non_monogamous",
    "write_records_csv",
]

# scores within this distance of zero count as the (monogamous) boundary
MONOGAMY_TOL = 1e-9
MAX_UNCONVERGED_FRACTION = 1e-3


@dataclass(frozen=True)
class MonogamyRecord:
    s_p_1_23: float
    s_p_12: float
    s_p_13: float
    converged: bool = True
    spec: FamilySpec | None = None

    @property
    def delta(self) -> float:
        return self.s_p_1_23 - self.s_p_12 - self.s_p_13

    @property
    def delta_sq(self) -> float:
        return self.s_p_1_23 ** 2 - self.s_p_12 ** 2 - self.s_p_13 ** 2

    @property
    def monogamous(self) -> bool:
        return self.delta >= -MONOGAMY_TOL

    @property
    def monogamous_sq(self) -> bool:
        return self.delta_sq >= -MONOGAMY_TOL


@dataclass(frozen=True)
class FractionEstimate:
    family: str
    n_samples: int
    n_non_monogamous: int
    squared: bool
    seed: int | None
    n_unconverged: int = 0

    @property
    def fraction(self) -> float:
        return self.n_non_monogamous / self.n_samples

    @property
    def std_err(self) -> float:
        f = self.fraction
        return math.sqrt(f * (1 - f) / self.n_samples)

    @property
    def flagged(self) -> bool:
        return self.n_unconverged >= MAX_UNCONVERGED_FRACTION * self.n_samples

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n_samples": self.n_samples,
            "n_non_monogamous": self.n_non_monogamous,
            "fraction": self.fraction,
            "std_err": self.std_err,
            "squared": self.squared,
            "seed": self.seed,
            "n_unconverged": self.n_unconverged,
            "flagged": self.flagged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def monogamy_score(psi, config: OptimizerConfig | None = None) -> MonogamyRecord:
    """Score a three-party pure state (a :class:`PureState` or pure-family spec).

    The 1:23 term is exact (one minus the top squared Schmidt coefficient);
    the two pairwise terms run the full-product optimizer on the marginals.
    """
    spec = None
    if isinstance(psi, FamilySpec):
        spec, psi = psi, pure_state(psi)
    if not isinstance(psi, PureState) or psi.n_parties != 3:
        raise ValueError("monogamy_score needs a three-party pure state")
    s_123 = max(0.0, 1.0 - float(schmidt(psi, ((0,), (1, 2))).coefficients[0]) ** 2)
    r12 = shared_purity(partial_trace(psi, (0, 1)), "full", config)
    r13 = shared_purity(partial_trace(psi, (0, 2)), "full", config)
    return MonogamyRecord(s_123, r12.s_p, r13.s_p, r12.converged and r13.converged, spec)


def _score_spec(spec: FamilySpec, config: OptimizerConfig) -> MonogamyRecord:
    return monogamy_score(spec, config)


def score_samples(tag: str, n: int, seed=None, config: OptimizerConfig | None = None,
                  jobs: int = 1) -> list[MonogamyRecord]:
    specs = sample_class(tag, n, seed)
    return pmap(functools.partial(_score_spec, config=config or OptimizerConfig()), specs, jobs)


def estimate_fraction(records: Sequence[MonogamyRecord], squared: bool = False,
                      family: str = "", seed=None) -> FractionEstimate:
    bad = sum(not (r.monogamous_sq if squared else r.monogamous) for r in records)
    unconverged = sum(not r.converged for r in records)
    return FractionEstimate(family, len(records), bad, squared, seed, unconverged)


def fraction_non_monogamous(tag: str, n: int, seed=None, squared: bool = False,
                            config: OptimizerConfig | None = None,
                            jobs: int = 1) -> FractionEstimate:
    """Fraction of sampled states violating the (squared) monogamy inequality."""
    if n < 100:
        raise ValueError("need at least 100 samples")
    records = score_samples(tag, n, seed, config, jobs)
    return estimate_fraction(records, squared, tag, seed)


def _num(x) -> str:
    """Shortest round-tripping text for a number."""
    return repr(int(x)) if isinstance(x, (int, np.integer)) else repr(float(x))


CSV_TAIL = ["s_p_1_23", "s_p_12", "s_p_13", "delta", "delta_sq", "neg_delta",
            "monogamous", "monogamous_sq", "converged"]


def write_records_csv(records: Sequence[MonogamyRecord], path_or_file) -> None:
    """Per-sample CSV: spec parameters, the three shared purities and both scores."""
    keys: list[str] = []
    for r in records:
        if r.spec is not None:
            keys.extend(k for k in r.spec.params if k not in keys)
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "family"] + keys + CSV_TAIL)
        for i, r in enumerate(records):
            params = r.spec.params if r.spec is not None else {}
            w.writerow([i, r.spec.family if r.spec else ""]
                       + [_num(params[k]) if k in params else "" for k in keys]
                       + [_num(r.s_p_1_23), _num(r.s_p_12), _num(r.s_p_13), _num(r.delta),
                          _num(r.delta_sq), _num(-r.delta), int(r.monogamous),
                          int(r.monogamous_sq), int(r.converged)])
    finally:
        if own:
            fh.close()
