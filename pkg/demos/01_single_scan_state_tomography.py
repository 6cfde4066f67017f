"""Reconstruct a two-qubit state from one spectrum.

One spin of the synthetic three-fluorine register is left maximally mixed
and used as an ancilla.  A delay / pulse / delay / pulse program spreads the
unknown state over all observable lines, so a single readout fixes all 15
deviation coordinates.  The delays come from the genetic search.
"""

import numpy as np

from aaqip import aaqst
from aaqip.core import embed, evolve, state_fidelity
from aaqip.measurement import NoiseSpec, add_noise, single_quantum_lines
from aaqip.sysfile import data_path, load_system

system = load_system(data_path("synthetic_3f_aaqst.json"))
model = aaqst.two_delay_model()

print("experiments needed with one ancilla:", aaqst.min_experiments(2, 1))
print("...and with no ancilla:", aaqst.min_experiments(2, 0))

params, cond = aaqst.optimize_delays(system, model, budget=60, seed=3)
print(f"delays {params[0] * 1e3:.4f} ms, {params[1] * 1e3:.4f} ms -> condition number {cond:.3f}")

(u,) = model.unitaries(system, params)
M = aaqst.build_constraint_matrix(system, [u])
print("constraint matrix", M.entries.shape, "rank", M.rank())

# a random traceless Hermitian target on the two system spins
rng = np.random.default_rng(7)
a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
rho = a + a.conj().T
rho -= np.trace(rho) / 4 * np.eye(4)

spins = aaqst.tomography_spins(system)
anc = [s for s in range(3) if s not in spins]
full = embed(np.kron(rho, np.eye(2) / 2), spins + anc, 3)
lines = single_quantum_lines(evolve(full, u), 3)

for eta in (0.0, 0.01, 0.05):
    got = aaqst.reconstruct_state(M, add_noise(lines, NoiseSpec(eta, seed=1)))
    print(f"eta={eta:<5} fidelity {state_fidelity(got, rho):.6f}")
