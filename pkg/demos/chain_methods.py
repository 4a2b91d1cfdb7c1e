"""Compare the four integrators on the tight-binding chain.

Run: python demos/chain_methods.py
"""

import numpy as np

from bzdos import reference
from bzdos.bcd import bcd_dos
from bzdos.iai import AdaptiveConfig, iai_dos
from bzdos.lt import lt_dos
from bzdos.ptr import ptr_dos

chain = reference.make_chain(1.0)

for E in (0.0, 1.9, 1.99):
    exact = chain.exact_dos(E)
    print(f"E = {E}  exact DOS = {exact:.12f}")
    for N in (50, 100, 200, 400, 800):
        b = bcd_dos(chain.model, E, N=N).value
        t = lt_dos(chain.model, E, N).value
        print(f"  N={N:4d}  bcd rel err {abs(b / exact - 1):.2e}   lt rel err {abs(t / exact - 1):.2e}")
    # smeared methods converge to the Lorentzian-broadened DOS, not the exact one
    eta = 0.01
    p = ptr_dos(chain.model, E, eta, 4000).value
    q = iai_dos(chain.model, E, eta, AdaptiveConfig(1e-10))
    print(f"  eta={eta}: ptr {p:.8f}, iai {q.value:.8f} ({q.n_evals} evals), "
          f"closed form {reference.chain_smeared_dos(E, eta):.8f}")
