"""Unit vector families with decaying variation, certified and converted.

Run as: python3 demos/property_a_certificates.py
"""

import json

from coarsekit import (
    a_infinity_family,
    ball_cover,
    ball_space,
    certificate,
    convert_down_to_1,
    family_from_covers,
    shrink_to_irreducible,
    variation_report,
    zn_spec,
)

space = ball_space(zn_spec(1), 24)

print("== tent family: closed-form bound K/n in the sup norm ==")
tents = a_infinity_family(space, range(2, 7))
report = variation_report(tents, [1, 2])
for K in (1, 2):
    row = ", ".join(f"n={n}: {report.measured[K][n]:.4f}" for n in tents.schedule())
    print(f"  K={K}  {row}")
print(f"  decay everywhere: {report.ok()}")

print()
print("== cover family: bound 8*K*m^(1/p)/n from shrunk ball covers ==")
covers = {n: shrink_to_irreducible(ball_cover(space, 2 * n), n) for n in (2, 4, 6)}
family = family_from_covers(covers, p=2)
report = variation_report(family, [1, 2])
cert = certificate(family, report)
print(f"  audit pass: {cert['audit']['pass']}")
print("  certificate keys:", ", ".join(sorted(cert)))
print(json.dumps(cert["bounds"], indent=2)[:200], "...")

print()
print("== dropping the exponent to l_1 keeps a certified bound ==")
dropped = convert_down_to_1(family)
report1 = variation_report(dropped, [1])
n = 4
print(f"  p=2 bound at n={n}: {family.variation_bound(n, 1):.4f}")
print(f"  p=1 bound at n={n}: {dropped.variation_bound(n, 1):.4f}  (2^(1/q) * p times larger)")
print(f"  measured at p=1:   {report1.measured[1][n]:.4f}")
