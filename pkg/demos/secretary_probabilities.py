"""Exact acceptance probabilities of the two-choice secretary rule, checked
against brute force over every arrival order of a small instance."""

from ropack.analysis import p_first_asymptotic, probability_report
from ropack.simulator import enumerate_exact

n, cn, dn = 7, 2, 7
report = probability_report(n, cn, dn)
brute = enumerate_exact(n, cn, dn)

print(f"n={n}, sample {cn}, stop at {dn}; {brute.permutations} orders enumerated")
for i in range(1, 5):
    exact = report.p_first[i]
    print(f"  best-{i} packed first: {exact} (enumeration {brute.p_first[i]})")
print(f"  best two packed together: {report.p_pair[1, 2]} (enumeration {brute.p_pair[1, 2]})")

c, d = 0.42291, 0.64570
print("large-n limits at the knapsack parameters:")
for i in range(1, 5):
    print(f"  p_{i} -> {p_first_asymptotic(c, d, i):.5f}")
