"""Projected error elements shrink exponentially with the ancilla under generic coding.

Run with ``python3 demos/04_random_coding.py`` (about ten seconds).
"""
from zenoprotect.random_coding import sparsity_audit, suppression_sweep

ns = [4, 5, 6, 7, 8]
res = suppression_sweep(ns, k=1, seeds=10, switch_factor=8)
print(" n   source        mean |P C^dag E C P|   2^(k-n)")
for n in ns:
    for source in ("haar", "nonholonomic"):
        vals = [r.mean_abs for r in res.records if r.n == n and r.coding_source == source]
        print(f"{n:2d}   {source:12s}  {sum(vals) / len(vals):.4e}            {2.0 ** (1 - n):.4e}")
print("slopes of log2(mean) vs n - k (unit Frobenius-norm E):", res.slopes)
print("same fit for unit operator-norm E:", res.operator_norm_slopes)

audit = sparsity_audit(ns)
print("one- plus two-qubit Pauli family sizes:", audit["generator_count"], f"exponent {audit['exponent']:.2f}")
print("non-zeros per row of their sum:", audit["row_nonzeros"], f"exponent {audit['row_exponent']:.2f}")
