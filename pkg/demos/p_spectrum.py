"""p-eigenvalues and torsion against the Cheeger constant.

For a few p, compares lambda_{1,p} with the guaranteed lower bound
(h_1/(2p))^p and the sharper (h_1/p)^p, and the torsion bound on h_1.

    python3 demos/p_spectrum.py
"""
from pmspaces import catalog, dinkelbach_h1, lambda_11, lambda_1p, torsion

space, omega = catalog.unit_square(6)
h1 = float(dinkelbach_h1(space, omega).value)
print(f"6x6 grid square, h_1 = {h1:.6f}, lambda_11 = {float(lambda_11(space, omega, samples=200).value):.6f}")
print(f"{'p':>4} {'lambda_1p':>11} {'(h1/2p)^p':>11} {'(h1/p)^p':>11} {'torsion cap':>12}")
for p in (1.5, 2.0, 3.0):
    eig = lambda_1p(space, omega, p, seed=0, restarts=6, h1=h1)
    tor = torsion(space, omega, p, h1=h1)
    print(f"{p:4.1f} {eig.value:11.5f} {eig.meta['bound_hard']:11.5f} {eig.meta['bound_sharp']:11.5f} "
          f"{tor.bounds['bound_hard']:12.5f}")
