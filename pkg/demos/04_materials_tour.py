"""Survey of the built-in spin systems and their usable transitions.

Each material carries a full crystal-field + hyperfine Hamiltonian; a
working qubit is one adjacent level pair brought to resonance with the
spectrometer frequency by the static field.  `resonance_fields` finds
those fields, `reduce_to_tls` collapses the pair to an effective driven
two-level system whose `drive_scale` multiplies h_d and h_i (matrix
elements grow with S, so high-spin transitions are driven faster at the
same power).
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from drivenspin import (
    ForbiddenTransitionError,
    build_hamiltonian,
    material,
    material_names,
    reduce_to_tls,
    resonance_fields,
)

F0 = 9600.0  # spectrometer frequency, MHz
B_RANGE = (200.0, 600.0)

print(f"probe frequency {F0} MHz, field window {B_RANGE[0]}-{B_RANGE[1]} mT\n")

for name in material_names():
    sys = material(name, cubic_a=55.5) if name == "MnMgO" else material(name)
    roots = resonance_fields(sys, F0, B_RANGE)
    print(f"{name}: S = {sys.S}, I = {sys.I}, dim = {sys.dim} -> {len(roots)} resonance(s)")
    for B, pair in roots:
        try:
            tls = reduce_to_tls(sys, B, pair)
        except ForbiddenTransitionError:
            print(f"    B = {B:7.2f} mT   levels {pair}   (forbidden: no drive matrix element)")
            continue
        print(f"    B = {B:7.2f} mT   levels {pair}   drive_scale = {tls.drive_scale:.3f}")
    print()

# level diagram for the richest system: Mn2+ in MgO (S = 5/2, I = 5/2)
mn = material("MnMgO", cubic_a=55.5)
fields = np.linspace(*B_RANGE, 241)
levels = np.array([np.linalg.eigvalsh(build_hamiltonian(mn, B)) for B in fields])

fig, ax = plt.subplots(figsize=(7, 5))
ax.plot(fields, levels / 1e3, lw=0.6, color="C0")
for B, pair in resonance_fields(mn, F0, B_RANGE):
    E = np.linalg.eigvalsh(build_hamiltonian(mn, B))
    ax.plot([B, B], [E[pair[0]] / 1e3, E[pair[1]] / 1e3], "r-", lw=1.4)
ax.set_xlabel("B0 (mT)")
ax.set_ylabel("energy (GHz)")
ax.set_title(f"Mn2+:MgO levels; red bars: {F0 / 1e3:.1f} GHz transitions")

out = pathlib.Path(__file__).with_suffix(".png")
fig.tight_layout()
fig.savefig(out, dpi=120)
print(f"wrote {out}")
