"""Finite rings: where does the derivative peak, and how fast does it move?

On a ring of N sites the minimum of dS_P/dlambda sits slightly below the
critical field. Fitting the shift lambda_c - lambda_c^N against N on log-log
axes gives the scaling exponent of the finite-size precursor.
"""
import numpy as np

from sharedpurity.xy import DEFAULT_N_LIST, correlators_finite, correlators_thermodynamic, \
    fit_power_law, scaling_fit

# Momentum sums converge exponentially fast in the gapped phase and only
# algebraically at the transition.
for lam in (0.5, 1.0):
    b = correlators_thermodynamic(0.8, lam)
    for n in (25, 55, 125):
        a = correlators_finite(0.8, lam, n)
        print(f"lambda={lam}, N={n:4d}: |T_xx(N) - T_xx(inf)| = {abs(a.t_xx - b.t_xx):.2e}")

for gamma in (0.8, 1.0):
    fit, sweeps = scaling_fit(gamma, return_sweeps=True)
    print(f"\ngamma = {gamma}")
    for n in DEFAULT_N_LIST:
        print(f"  N={n:4d}  lambda_c^N = {fit.lambda_c_n[n]:.6f}  "
              f"shift = {1 - fit.lambda_c_n[n]:.3e}")
    print(f"  slope {fit.slope:.4f}, intercept {fit.intercept:.4f}, rms residual {fit.residual:.1e}, "
          f"monotone {fit.monotone}")

# A finer derivative grid moves the estimate only slightly.
fine = scaling_fit(0.8, step=5e-4)
print(f"\ngamma = 0.8 with a 5e-4 grid: slope {fine.slope:.4f}")

# Sanity check of the fitting step on a planted law.
planted = fit_power_law({n: 1 - 2 * n ** -1.4 for n in DEFAULT_N_LIST})
print(f"planted lambda_c^N = 1 - 2 N^-1.4: slope {planted.slope:.6f}, "
      f"intercept {planted.intercept:.6f} (log10 2 = {np.log10(2):.6f})")
