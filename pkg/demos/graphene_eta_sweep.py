"""Smearing width trade-off for graphene at E=0.5.

For each evaluation budget the best eta balances the smearing bias against
the grid error, which shrinks like exp(-c eta N).
The grid error oscillates in N, so at small budgets a lucky cancellation can
make a single pick look better than the trend.

The bias here is linear in eta: the first-order term is proportional to
Re G'(E), which only vanishes at special points such as the chain at E=0.
"""

from bzdos.study import StudySpec, optimal_eta_sweep

spec = StudySpec(system="graphene", energies=(0.5,))
etas = [0.4, 0.2, 0.1, 0.05, 0.025]
best, rows = optimal_eta_sweep(spec, etas, [400, 1600, 6400, 25600, 102400])

for budget, (eta, err) in best.items():
    print(f"budget {budget:6d}: best eta {eta:<6} error {err:.2e}")
