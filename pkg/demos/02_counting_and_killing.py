"""
Counting symmetries and generalized Killing tensors
===================================================

The closed-form counts bound the number of symmetry operators of order at
most q.  The Killing solver computes the underlying tensor spaces as exact
nullspaces, so each count can be checked directly.
"""

from schrosym import count_table, killing_basis
from schrosym.expr_io import format_poly

for n in range(1, 5):
    rows = [count_table(n, q) for q in range(5)]
    print(f"n={n}  N_hat:", [r.N_hat for r in rows], " N_tilde:", [r.N_tilde for r in rows])

# rank-1 Killing vectors of the plane: two translations and one rotation
kb = killing_basis(2, 1, 1)
print("\nKilling vectors of the plane, dimension", kb.dimension)
for t in kb.tensors:
    print("  ", {idx: format_poly(f) for idx, f in sorted(t.items())})

# S_{j,q} as the dimension of rank-j tensors of order q - j + 1
n, q = 3, 2
table = count_table(n, q)
dims = [killing_basis(n, j, q - j + 1).dimension for j in range(q + 1)]
print(f"\nn={n}, q={q}: S_j closed form {list(table.S)}, nullspace dims {dims}")
