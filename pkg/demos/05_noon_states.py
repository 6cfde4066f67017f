"""NOON states as amplifiers.

A star register with one central spin and N - 1 satellites picks up phase
N - 1 times faster on the satellites, and the gradient phase scales with
the effective gyromagnetic ratio.  The same diffusion constant can then be
measured with g^2 times less gradient encoding.
"""

import numpy as np

from aaqip import noon

for central, sat, n in (("31P", "1H", 9), ("13C", "1H", 3)):
    ge, g = noon.effective_gamma(noon.StarSystem.from_species(central, sat, n))
    print(f"{central} + {n} x {sat}: gamma_eff = {ge:.4e} rad/T/s, g = {g:.3f}, g^2 = {g * g:.0f}")

print("\nNOON phase for phi_z = pi/9:", [round(noon.noon_phase(N, np.pi / 9) / np.pi, 6) for N in range(2, 11)])

ge = noon.effective_gamma(noon.StarSystem.from_species("31P", "1H", 9))[0]
p = noon.DiffusionParams(6.24e-10, 2e-3, 0.1, ge)
G = np.linspace(0, 0.045, 16)
rng = np.random.default_rng(0)
S = noon.diffusion_signal(G, p) * (1 + 0.01 * rng.standard_normal(G.size))
D, sD = noon.fit_diffusion(G, S, p.delta, p.Delta, ge)
print(f"\nfitted D = {D:.4e} +- {noon.confidence_halfwidth(sD, G.size):.1e} m^2/s (95%)")

prof = noon.RfiProfile(10e3, 0.018, 0.009)
nu = np.linspace(8e3, 12e3, 201)
fit = noon.rfi_fit(nu, noon.rfi_pdf(nu, prof), 10e3)
print(f"RFI widths recovered: {fit.lambda_minus:.5f}, {fit.lambda_plus:.5f}")

# the correlation map only fixes lambda / lambda0^2
ax = np.linspace(0.4, 1.6, 128)
h, q = np.meshgrid(ax, ax, indexing="ij")
truth = noon.RfiCorrProfile(0.005, (0.226, 0.114), (0.028, 0.095))
free = noon.corr_fit(h, q, noon.rfi_corr_pdf(h, q, truth))
pinned = noon.corr_fit(h, q, noon.rfi_corr_pdf(h, q, truth), lambda0=0.005)
print("ratios (truth):", np.round(truth.ratios(), 1).tolist())
print("ratios (fit):  ", np.round(free.ratios(), 1).tolist())
print("widths with lambda0 pinned:", [round(v, 6) for v in (*pinned.lam_H, *pinned.lam_P)])
