"""Compare CPMG, UDD and RUDD with seven finite-width pulses.

All three fit in the same window as a seven-pulse CPMG train.  The filter
function F(w) weights the bath spectrum; the area under F/w^2 is a rough
single-number score of how much low-frequency noise leaks through.
"""

import numpy as np

from aaqip import dd

tau, tau_pi = 2e-6, 4.27e-6
seqs = {k: dd.make_sequence(k, 7, tau, tau_pi) for k in ("cpmg", "udd", "rudd")}
for name, s in seqs.items():
    print(f"{name:5s} T={s.total_T * 1e6:.2f} us  centers (us):", np.round(s.centers * 1e6, 2).tolist())

print("\nUDD with eight pulses no longer fits:")
try:
    dd.make_sequence("udd", 8, tau, tau_pi)
except dd.NegativeDelayError as exc:
    print("  ", exc)

w = np.geomspace(1e3, 1e7, 5)
print("\nomega       " + "  ".join(f"{k:>10s}" for k in seqs))
for wi in w:
    print(f"{wi:9.2e}   " + "  ".join(f"{float(dd.filter_function(s, wi)):10.3e}" for s in seqs.values()))

print("\narea under F/w^2 versus pulse count")
for n in range(3, 11):
    row = [dd.ff_area(dd.make_sequence(k, n, tau, tau_pi, strict=False)) for k in ("cpmg", "udd", "rudd")]
    print(n, "  ".join(f"{a:.3e}" for a in row))

# coherence under a Lorentzian bath with a 20 krad/s correlation rate
S = dd.SpectralDensity("lorentzian", amplitude=2e3, width=2e4)
print("\nLorentzian bath")
for name, s in seqs.items():
    chi, W = dd.coherence_decay(s, S)
    print(f"{name:5s} chi = {chi:.4e}  W = {W:.6f}")
chi, W = dd.coherence_decay(dd.free_evolution(seqs["cpmg"].total_T), S)
print(f"free  chi = {chi:.4e}  W = {W:.6f}")
