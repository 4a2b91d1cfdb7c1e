"""Write a model to hr.dat, read it back, and check nothing changed.

Any Wannier90 ``*_hr.dat`` file can be loaded the same way with
``to_model(read_hr(path), fermi_shift=...)``.
"""

import tempfile
from pathlib import Path

import numpy as np

from bzdos import reference
from bzdos.lt import lt_dos
from bzdos.wannier import from_model, read_hr, to_model, write_hr

graphene = reference.make_graphene(1.0)
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "graphene_hr.dat"
    path.write_text(write_hr(from_model(graphene.model, header="graphene t=1")))
    print(path.read_text().splitlines()[:6])
    back = to_model(read_hr(path))

k = np.random.default_rng(0).uniform(-0.5, 0.5, (20, 2))
print("max |dH| over 20 k-points:", np.abs(back.hamiltonian(k) - graphene.model.hamiltonian(k)).max())
print("LT DOS at E=0.5:", lt_dos(graphene.model, 0.5, 200).value, lt_dos(back, 0.5, 200).value)
