"""Replaying the hand proofs as exact identities.

Each catalog step is a pair (left, right) with left o right equal to the
point, plus the relations that pair is supposed to justify.  Replay checks
every instance exactly, then confirms the final relation families span all
of ker J.  A single wrong coefficient is caught at the step that carries it.
"""

from dataclasses import replace
from fractions import Fraction

from jordet import QQ, load_bundled, run_catalog

for name, n, point in (("t22", 3, (1,)), ("t22", 4, (1,)), ("t23", 3, (1, 2)), ("t23", 4, (1, 2))):
    rep = run_catalog(name, n, point, QQ)
    print(f"{name} n={n} point={point}: success={rep.success}, "
          f"{rep.instantiations_checked} instances, "
          f"relations span {rep.relation_span_dim}/{rep.kernel_dim}")

# Drop the factor 1/2 from the very first witness and watch replay object.
cat = load_bundled("t22")
first = cat.steps[0]
broken = cat.replace_step(replace(first, left=((Fraction(1), ("s", "s")),)))
rep = run_catalog(broken, 3, (1,), QQ)
f = rep.first_failure
print(f"\ntampered: success={rep.success}; first failure at {f.step_id} {f.anchor}")
print(f"  {f.detail}")
