"""How shared purity distributes among three qubits.

The monogamy score is

    delta = S_P(1:23) - S_P(12) - S_P(13)

and a state is monogamous when delta >= 0. The first term is exact (one
minus the top squared Schmidt coefficient); the pairwise terms need the
local-fidelity optimizer on the two-qubit marginals.

The last section shows how sensitive the non-monogamous fractions are to the
quality of that optimization. A coarse search over random product states
underestimates the local fidelity, which inflates the pairwise shared purity
and makes far more states look non-monogamous than actually are.
"""
import numpy as np

from sharedpurity.families import FamilySpec, pure_state, sample_class
from sharedpurity.fidelity import global_fidelity
from sharedpurity.monogamy import estimate_fraction, monogamy_score, score_samples
from sharedpurity.states import PureState, partial_trace

# The W state is the standard example of a violation.
w = PureState((2, 2, 2), np.array([0, 1, 1, 0, 1, 0, 0, 0]) / np.sqrt(3))
r = monogamy_score(w)
print("W state")
print(f"  S_P(1:23) = {r.s_p_1_23:.6f}, S_P(12) = {r.s_p_12:.6f}, S_P(13) = {r.s_p_13:.6f}")
print(f"  delta = {r.delta:.6f} (exactly -1/9 = {-1 / 9:.6f}), monogamous: {r.monogamous}")

# Generalized GHZ states have separable marginals, so delta is the full 1:23 term.
for theta in (0.2, np.pi / 4, 1.2):
    r = monogamy_score(FamilySpec("generalized_ghz", {"theta": theta, "phi": 0.7}))
    print(f"generalized GHZ theta={theta:.3f}: delta = {r.delta:.6f} "
          f"(min(cos^2, sin^2) = {min(np.cos(theta) ** 2, np.sin(theta) ** 2):.6f})")

# Sampled classes, with the exact optimizer.
n = 1000
print(f"\nfractions of non-monogamous states over {n} uniform samples (seed 1)")
for family in ("ghz_class", "w_class", "generalized_ghz", "generalized_w"):
    recs = score_samples(family, n, seed=1)
    plain = estimate_fraction(recs, False, family, 1)
    sq = estimate_fraction(recs, True, family, 1)
    deltas = np.array([x.delta for x in recs])
    print(f"  {family:16s} delta<0: {plain.fraction:6.3f} +/- {plain.std_err:.3f}   "
          f"squared: {sq.fraction:6.3f}   min delta {deltas.min():+.2e}")


# --- effect of a coarse local-fidelity search ---------------------------------

def random_product_search(rho2, n_trials, rng):
    """Best <ab|rho|ab> over ``n_trials`` random Haar product states."""
    a = rng.normal(size=(n_trials, 2)) + 1j * rng.normal(size=(n_trials, 2))
    b = rng.normal(size=(n_trials, 2)) + 1j * rng.normal(size=(n_trials, 2))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    v = (a[:, :, None] * b[:, None, :]).reshape(n_trials, 4)
    return float(np.max(np.real(np.einsum("ni,ij,nj->n", v.conj(), rho2, v))))


def coarse_delta(spec, rng, n_trials=20000):
    psi = pure_state(spec)
    s123 = monogamy_score(spec).s_p_1_23
    pair = []
    for keep in ([0, 1], [0, 2]):
        rho2 = partial_trace(psi, keep)
        pair.append(global_fidelity(rho2) - random_product_search(rho2.matrix, n_trials, rng))
    return s123 - sum(pair)


print("\nsame samples, local fidelity from 2 x 10^4 random product states instead")
rng = np.random.default_rng(0)
m = 200
for family in ("ghz_class", "w_class", "generalized_w"):
    specs = sample_class(family, m, seed=1)
    coarse = np.array([coarse_delta(s, rng) for s in specs])
    exact = np.array([x.delta for x in score_samples(family, m, seed=1)])
    print(f"  {family:16s} coarse fraction {np.mean(coarse < 0):.3f}   "
          f"exact fraction {np.mean(exact < -1e-9):.3f}")
