"""N-Cheeger clusters on a twin dumbbell.

Two complete-graph lobes joined by a thin bridge.  One and two chambers
pick whole lobes, so h_2 is almost exactly 2 h_1; a third chamber has to
split a lobe and costs far more.

    python3 demos/cheeger_clusters.py
"""
from pmspaces import brute_force_hN, catalog, dinkelbach_h1, lambda_N, verify_cluster_inequalities
from pmspaces.cheeger import ClusterTable

space, omega = catalog.build_dumbbell(lobes=2, lobe_size=4, bridge="1/100", exact=True)
print(f"twin dumbbell: {space.n} points, |omega| = {int(omega.sum())}")

h1 = dinkelbach_h1(space, omega)
print(f"  h_1 = {h1.value}  (Dinkelbach, {len(h1.trace)} steps)")
table = ClusterTable(space, omega, 3)
for N in (1, 2, 3):
    cert = brute_force_hN(space, omega, N, table)
    chambers = [space.members(C) for C in cert.cluster.chambers]
    print(f"  h_{N} = {cert.value}  Lambda_{N} = {lambda_N(space, omega, N, table).value}  chambers {chambers}")

report = verify_cluster_inequalities(space, omega, 3, table)
print("  verified:", ", ".join(report["checks"]))

# with a closed bridge the two lobes decouple and h_2 = 2 h_1 exactly
space0, omega0 = catalog.build_dumbbell(lobes=2, lobe_size=4, bridge=0, exact=True)
a, b = brute_force_hN(space0, omega0, 1).value, brute_force_hN(space0, omega0, 2).value
print(f"bridge 0: h_1 = {a}, h_2 = {b}, ratio {b / a}")
