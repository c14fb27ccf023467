"""Two scaling laws of the gaussian decay rate.

For a coherent state on the stable island the gaussian rate obeys
Gamma = c * J * delta^2: quadratic in the perturbation at fixed spin and
linear in the spin at fixed perturbation.  Both exponents come out of
log-log / linear fits over a parameter ladder, and the normalized rate
Gamma / (J delta^2) is constant across the whole grid.
"""

from kickedecho import (
    fidelity_series,
    fit_gaussian,
    gamma_g_normalized,
    grid_state_location,
    scaling_exponent,
    spin_coherent_state,
    top_floquet,
)

KICK = 1.1
THETA, PHI = grid_state_location(52)

print("Gamma(delta) at J = 200:")
deltas = [2e-4, 1e-3, 5e-3]
rates = []
for delta, horizon in zip(deltas, (3000, 1500, 500)):
    u, u_pert = top_floquet(200.0, KICK), top_floquet(200.0, KICK + delta)
    state = spin_coherent_state(200.0, THETA, PHI)
    fit = fit_gaussian(fidelity_series(u, u_pert, state, horizon))
    rates.append(fit.params["gamma"])
    print(f"  delta = {delta:7.1e}  Gamma = {fit.params['gamma']:.3e}  r^2 = {fit.r_squared:.5f}")
fit = scaling_exponent(deltas, rates, mode="log")
print(f"  log-log slope = {fit.exponent:.4f} (expected 2), r^2 = {fit.r_squared:.6f}")
print()

print("Gamma(J) at delta = 5e-3:")
spins = [50.0, 100.0, 200.0, 400.0]
rates = []
for j in spins:
    u, u_pert = top_floquet(j, KICK), top_floquet(j, KICK + 5e-3)
    state = spin_coherent_state(j, THETA, PHI)
    fit = fit_gaussian(fidelity_series(u, u_pert, state, 500))
    rates.append(fit.params["gamma"])
    print(f"  J = {j:5.0f}  Gamma = {fit.params['gamma']:.3e}")
fit = scaling_exponent(spins, rates, mode="linear")
print(f"  linear slope = {fit.prefactor:.3e} per unit J, r^2 = {fit.r_squared:.6f}")
print()

print("normalized rate Gamma / (J delta^2) for the runs above:")
for j, rate in zip(spins, rates):
    print(f"  J = {j:5.0f}  gamma_norm = {gamma_g_normalized(rate, j, 5e-3):.4f}")
