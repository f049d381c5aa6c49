"""Where nonempty minimizers of P(F) - kappa m(F) appear.

Scans kappa on a 3x3 grid square and prints the onset, which lands on h_1.
At kappa = h_1 the largest minimizer is the maximal Cheeger set.

    python3 demos/curvature_threshold.py
"""
from pmspaces import catalog, dinkelbach_h1, kappa_threshold_scan, maximal_minimal_cheeger

space, omega = catalog.unit_square(3, exact=True)
h1 = dinkelbach_h1(space, omega).value
scan = kappa_threshold_scan(space, omega, step="1/4")
for row in scan.rows[::2]:
    mark = "*" if row.nontrivial else " "
    print(f"{mark} kappa = {str(row.kappa):>5}  min J = {str(row.min_value):>6}  |max minimizer| = {int(row.maximal.sum())}")
lo, hi = scan.threshold
print(f"onset in ({lo}, {hi}], h_1 = {h1}")

E_max, minimal = maximal_minimal_cheeger(space, omega, h1)
print(f"maximal Cheeger set has {int(E_max.sum())} cells, {len(minimal)} minimal one(s)")
