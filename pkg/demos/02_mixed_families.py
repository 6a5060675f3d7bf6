"""Mixed two-qubit families and their closed forms.

Four families have exact shared-purity formulas. This script evaluates the
numerical optimizer on each of them and prints the curves next to the
formula, so the kinks and zeros can be seen in plain text.
"""
import numpy as np

from sharedpurity.families import FamilySpec, build, oracle_fidelities, oracle_shared_purity
from sharedpurity.fidelity import shared_purity


def table(family, fixed, key, values):
    print(f"\n{family} {fixed or ''}")
    print(f"  {key:>6}  {'F_G':>8}  {'F_L':>8}  {'S_P':>8}  {'formula':>8}  {'|gap|':>8}")
    worst = 0.0
    for x in values:
        spec = FamilySpec(family, dict(fixed, **{key: x}))
        res = shared_purity(build(spec))
        exact = oracle_shared_purity(spec)
        worst = max(worst, abs(res.s_p - exact))
        print(f"  {x:6.3f}  {res.f_global:8.5f}  {res.f_local:8.5f}  {res.s_p:8.5f}  "
              f"{exact:8.5f}  {abs(res.s_p - exact):8.1e}")
    return worst


grid = np.linspace(0, 1, 11)

# Singlet mixed with |00>: entangled for every p < 1, yet the shared purity
# vanishes once the product component dominates (p >= 1/2).
w1 = table("bell_product_admixture", {}, "p", grid)

# Mixture of two Bell states: a V with its tip at p = 1/2, where the state
# becomes separable.
w2 = table("bell_mixture", {}, "p", grid)

# A partially entangled pure state in white noise. At theta = pi/4 it is the
# Werner state and the shared purity is p/2.
w3 = table("noisy_pure", {"theta": np.pi / 4}, "p", grid)
w4 = table("noisy_pure", {"theta": np.pi / 10}, "p", grid)

# Noisy GHZ states of N qudits: linear in p with slope 1 - 1/d, independent of N.
w5 = table("noisy_ghz_n", {"d": 3, "N": 3}, "p", grid)

print(f"\nlargest deviation from the formulas: {max(w1, w2, w3, w4, w5):.2e}")

# The fidelities themselves also have closed forms.
spec = FamilySpec("bell_product_admixture", {"p": 0.25})
res = shared_purity(build(spec))
print(f"\nadmixture at p = 1/4: numerical (F_G, F_L) = ({res.f_global:.6f}, {res.f_local:.6f}), "
      f"exact {tuple(round(v, 6) for v in oracle_fidelities(spec))}")
