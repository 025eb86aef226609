"""Unlabeled trees on k vertices and the union of their spectra."""
from qperc.trees import enumerate_trees

for k in range(1, 9):
    cat = enumerate_trees(k)
    print(f"k = {k}: {len(cat.trees):3d} trees, {cat.lambda_k.size:3d} distinct eigenvalues, "
          f"largest {cat.lambda_k.max():.4f}")

cat = enumerate_trees(4)
for g, spec in zip(cat.trees, cat.spectra):
    print("edges", [tuple(e) for e in g.edges.tolist()], "spectrum", (spec.round(4) + 0.0).tolist())
