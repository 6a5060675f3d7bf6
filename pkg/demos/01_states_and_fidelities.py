"""A first look at shared purity.

Shared purity compares two overlaps of a state rho:

* the global fidelity, the best overlap with *any* pure state (the top
  eigenvalue of rho), and
* the local fidelity, the best overlap with a pure *product* state.

Their difference measures how much of the state's purity lives only in
correlations between the parties. Run with ``python demos/01_states_and_fidelities.py``.
"""
import numpy as np

from sharedpurity import (
    DensityOperator,
    PureState,
    global_fidelity,
    haar_random_pure,
    local_fidelity,
    partial_trace,
    schmidt,
    shared_purity,
    tensor,
)
from sharedpurity.fidelity import pure_state_shared_purity

s2 = 1 / np.sqrt(2)

# A singlet is as pure as a state gets, yet no product state overlaps it by
# more than one half.
singlet = PureState((2, 2), [0, s2, -s2, 0])
res = shared_purity(singlet.density())
print("singlet")
print(f"  F_G = {res.f_global:.6f}  F_L = {res.f_local:.6f}  S_P = {res.s_p:.6f}")

# Its marginal is maximally mixed: all of the purity is shared.
print("  marginal of party 0:\n", np.round(partial_trace(singlet, [0]).matrix.real, 6))

# Product states share nothing, whether pure or mixed.
prod = tensor(haar_random_pure((2,), seed=1), haar_random_pure((3,), seed=2))
print(f"\nrandom product pure state: S_P = {shared_purity(prod.density()).s_p:.2e}")

mixed = tensor(DensityOperator((2,), np.diag([0.8, 0.2])), DensityOperator.maximally_mixed((2,)))
r = shared_purity(mixed)
print(f"product of mixed states: F_G = {r.f_global:.3f}, F_L = {r.f_local:.3f}, S_P = {r.s_p:.2e}")

# For three parties there are two notions of "local": fully product states,
# or states that are product across at least one cut. The W state shows the
# difference clearly.
w = PureState((2, 2, 2), np.array([0, 1, 1, 0, 1, 0, 0, 0]) / np.sqrt(3))
print("\nW state")
for cut in [((0,), (1, 2)), ((1,), (0, 2)), ((2,), (0, 1))]:
    c = schmidt(w, cut).coefficients
    print(f"  cut {cut}: Schmidt coefficients {np.round(c, 6)}")
print(f"  fully product S_P = {pure_state_shared_purity(w, 'full'):.6f}  (5/9 = {5 / 9:.6f})")
print(f"  n-gen S_P         = {pure_state_shared_purity(w, 'ngen'):.6f}  (1/3 = {1 / 3:.6f})")

# The optimizer also returns the product state it found, so the value can be
# checked directly.
val, ansatz = local_fidelity(w.density(), "full")
v = ansatz.vector()
print(f"  best product overlap {val:.6f}; recomputed {abs(np.vdot(v, w.vector)) ** 2:.6f}")
print(f"  diagnostics: {ansatz.diagnostics.to_dict()}")

# Global fidelity of a noisy state is just its top eigenvalue.
noisy = DensityOperator((2, 2), 0.6 * singlet.density().matrix + 0.4 * np.eye(4) / 4)
print(f"\nnoisy singlet: F_G = {global_fidelity(noisy):.3f} (expected 0.7)")
