"""The strategy catalog and the size of the scheme space.

A strategy is one compression method with a full hyperparameter
assignment; a scheme chains strategies sequentially. This walk-through
prints the catalog composition, shows canonical ids, and sizes the
search space with and without filtering.
"""

from compsearch import build_catalog, scheme_children, space_size, START

catalog = build_catalog()
print(f"catalog: {len(catalog)} strategies")
for method_id, count in sorted(catalog.count_by_method().items()):
    method = catalog.methods[method_id]
    hps = ", ".join(method.hyperparameters)
    print(f"  {method_id}: {count:5d}  ({hps})")

# canonical ids sort their hyperparameters numerically, so every
# assignment has exactly one spelling
example = catalog.strategies[1300]
print(f"\nexample strategy: {example.canonical_id}")
print(f"  method {example.method}, assignment {dict(example.assignment)}")
roundtrip = catalog.parse_canonical_id(example.canonical_id)
assert roundtrip.canonical_id == example.canonical_id

print(f"\nscheme space, L = 0..5 (chains up to that length, START included):")
for max_len in range(6):
    print(f"  L={max_len}: {space_size(len(catalog), max_len)} schemes")

# a whitelist filter cuts the space down to something exhaustively
# checkable; this one keeps the two smallest method families
small = build_catalog({"methods": ["C3", "C4"]})
print(f"\nfiltered catalog (C3 + C4): {len(small)} strategies")
print(f"  L=2 space: {space_size(len(small), 2)} schemes")

ids = [s.canonical_id for s in small.strategies]
children = scheme_children(START, ids, max_len=2)
print(f"  START has {len(children)} one-step children, e.g. {children[0][0]}")
