"""Find a two-dimensional code space for three random error generators on C^8.

Run with ``python3 demos/01_code_search.py``.
"""
import numpy as np

from zenoprotect import complete_coding_matrix, find_code, hamming_bound
from zenoprotect.error_model import GeneratorSet
from zenoprotect.zeno import AncillaLayout, effective_hamiltonian

I, A, M = 2, 4, 3
N = I * A
print(f"N = {N}, I = {I}, A = {A}, M = {M}; Hamming bound satisfied: {hamming_bound(A, M)}")

gens = GeneratorSet.random(N, M, seed=1)
code = find_code(gens, I, tol=1e-10, seed=0)
print(f"converged={code.converged} after {code.iterations} iterations, residual {code.residual:.2e}")

# the residual falls roughly geometrically once the iterate is near the solution set
hist = np.array(code.residual_history)
for j in range(0, len(hist), max(1, len(hist) // 8)):
    print(f"  iter {j:5d}  max constraint {hist[j]:.3e}")

# every generator has a vanishing I x I block on the codewords
W = code.codewords
for m, e in enumerate(gens):
    print(f"E{m + 1}: max |<w_i|E|w_j>| = {np.max(np.abs(W.conj() @ e @ W.T)):.2e}")

coding = complete_coding_matrix(code, seed=0)
h = effective_hamiltonian(coding, gens, AncillaLayout(I, A), [0.7, -0.2, 1.1])
print(f"effective Hamiltonian on the information space: ||h_e|| = {np.linalg.norm(h, 2):.2e}")

# with too many generators for the ancilla, the search warns and usually stalls
crowded = GeneratorSet.random(4, 3, seed=2)
bad = find_code(crowded, 2, max_iter=500, seed=0)
print(f"N=4, I=2, M=3 (bound violated): converged={bad.converged}, residual {bad.residual:.2e}")
