"""Frozen numeric tables used by the move and invariant engines.

THIS FILE IS GENERATED by tools/derive_tables.py; do not edit by hand.
The derivation script calibrates the tables on abstract local models
and pins them against golden data; tests/test_calibration.py re-runs
the derivation and fails loudly on any drift.

This stub marks the tables as absent so that imports work during the
derivation bootstrap.
"""

TABLES_FROZEN = False

# Maw turning through a vertex passage, doubled to stay integral.
# Key: (p, q, din, dout) where p/q say whether the in/out wing is its
# edge's preferred wing, and din/dout compare the preferred wing's
# induced direction with the toward-vertex / away-from-vertex sense.
MAW_TURN2 = None

# Doubled gleam increments of the 1->2 move, per role r1..r6, plus the
# doubled gleam of the created region r7.
ONE_TWO_GLEAM2 = None

# Sign-reading polarity per role (r1..r7): +1 means "toward the site
# vertex counts as +" on the role's reference dart.
ONE_TWO_POLARITY = None

# (signs r1..r6 with r1=+, r7 sign) -> case label "1".."12b".
ONE_TWO_CASE_OF_SIGNS = None

# case label -> ([dEul], [dgl], [dc1]) as {role: coefficient} dicts at
# unit scale for dEul and half scale kept doubled for dgl/dc1.
ONE_TWO_TABLE = None

# 12 rows (signs r1..r6 with r1=+) -> admissible r7 signs "+"/"-"/"+-".
ONE_TWO_BRANCHABILITY = None

# Golden branched-version classifications of the local ball models.
LUNE_VERSION_ORBITS = None
MP23_VERSION_ORBITS = None
