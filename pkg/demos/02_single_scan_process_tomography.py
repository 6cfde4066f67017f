"""Characterize single-qubit processes with one readout.

A Bell pair between the system spin and an encoding ancilla carries every
input at once.  After the process acts, the joint state is read with the
single-scan state tomography above, and the chi matrix follows from a
linear solve.
"""

import numpy as np

from aaqip import sspt
from aaqip.measurement import NoiseSpec
from aaqip.sysfile import data_path, load_system

system = load_system(data_path("synthetic_3f_sspt.json"))

print("gate          noiseless   mean over 50 seeds at eta=0.05")
for name, u in sspt.GATES.items():
    target = sspt.chi_of_kraus([u])
    f0 = sspt.gate_fidelity(sspt.run_sspt(system, sspt.unitary_channel(u)), target)
    fn = np.mean([sspt.gate_fidelity(sspt.run_sspt(system, sspt.unitary_channel(u), NoiseSpec(0.05, s)), target)
                  for s in range(50)])
    print(f"{name:12s}  {f0:.8f}  {fn:.4f}")

# twirling: averaging z-rotations shrinks coherences by sinc(2 phi)
print("\nphi/pi   chi_EE   chi_ZZ   (1+sinc)/2")
for phi in np.pi * np.array([0.0, 0.1, 0.25, 0.4, 0.64, 1.0, 1.3, 3.43]):
    chi = sspt.run_sspt(system, sspt.twirl_channel(phi))
    s = np.sinc(2 * phi / np.pi)
    print(f"{phi / np.pi:5.2f}  {chi[0, 0].real:7.4f}  {chi[3, 3].real:7.4f}  {(1 + s) / 2:7.4f}")

print("\nreadout ancillas for n system qubits:", [sspt.readout_ancillas(n) for n in range(1, 6)])
