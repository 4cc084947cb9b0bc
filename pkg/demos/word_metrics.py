"""Windows into infinite groups: balls, norms, and a distorted subgroup.

Run as: python3 demos/word_metrics.py
"""

from coarsekit import (
    ball_space,
    distortion_profile,
    heisenberg_center,
    heisenberg_spec,
    lamplighter_spec,
    log_log_slope,
    word_norm_table,
    zn_spec,
)

print("== finite windows on infinite groups ==")
for token, spec, radius in (
    ("line", zn_spec(1), 8),
    ("plane", zn_spec(2), 8),
    ("lamplighter", lamplighter_spec(), 5),
    ("heisenberg", heisenberg_spec(), 6),
):
    space = ball_space(spec, radius)
    print(f"{token:12s} radius {radius}: {len(space):5d} points, diameter {space.diameter()}")

print()
print("== lamplighter: carrying a lamp costs the round trip ==")
table = word_norm_table(lamplighter_spec(), 6)
lamps = sorted(
    (w for w in table if w.head == (0,) and len(w.config) == 1),
    key=lambda w: w.config[0][0],
)
for w in lamps:
    pos = w.config[0][0][0]
    print(f"  lamp at {pos:+d}: word norm {table[w]}  (2*|pos|+1 = {2 * abs(pos) + 1})")

print()
print("== the center of the Heisenberg group is quadratically distorted ==")
member, gens = heisenberg_center()
pairs = distortion_profile(heisenberg_spec(), member, gens, 16)
print("  inner norm -> ambient norm:", pairs[:8], "...")
print(f"  log-log slope {log_log_slope(pairs):.3f}  (0.5 means ambient ~ sqrt(inner))")
