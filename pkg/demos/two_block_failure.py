"""The deformation can push a pole the wrong way; the diagnostic catches it.

Two linear bands with slopes +1 and -2 cross at k=0.  The Gaussian-weighted
gradient is dominated by the steeper band, so the shallow band's pole ends
up above the real axis and its contribution flips sign.
"""

from bzdos import reference
from bzdos.bcd import bcd_diagnose, bcd_dos, deformation

toy = reference.make_two_block_toy(1.0, 2.0)
print("exact DOS        ", toy.exact_dos(0.0))
print("deformed estimate", bcd_dos(toy.model, 0.0, N=400).value)
print("h(0)             ", deformation(toy.model, 0.0, 0.0)[0])

report = bcd_diagnose(toy.model, 0.0, N=100)
print(report.summary(limit=5))

chain = reference.make_chain()
print("\nchain at E=0.5:", bcd_diagnose(chain.model, 0.5).summary(limit=0))
