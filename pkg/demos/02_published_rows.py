"""Rebuild upper bounds from published type-share brackets.

A regression table often reports only the estimated bracket for the share of
always-takers of the outcome (AP) and never-takers (NP). Those four numbers
pin down the joint distribution, so the persuasion-rate upper bounds can be
recomputed and compared with what was printed.

Run with ``python demos/02_published_rows.py``.
"""

from persuasion_bounds import ate_upper, reconstruct_joint, theta_r_upper, theta_upper

# (AP lower, AP upper, NP lower, NP upper) and printed (ATE, APR, R-APR) in percent.
ROWS = {
    "All": ((0.7988, 0.8025, 0.1944, 0.1975), (0.68, 3.37, 0.84)),
    "Age < 50": ((0.7804, 0.7862, 0.2090, 0.2138), (1.06, 4.83, 1.34)),
    "Age >= 50": ((0.8130, 0.8152, 0.1830, 0.1848), (0.40, 2.13, 0.49)),
    "U.S.": ((0.8730, 0.8765, 0.1206, 0.1235), (0.65, 5.09, 0.74)),
    "U.K.": ((0.8359, 0.8393, 0.1580, 0.1607), (0.61, 3.69, 0.72)),
}

print(f"{'row':<10}{'ATE':>14}{'APR':>14}{'R-APR':>14}   (rebuilt / printed, percent)")
for name, (bracket, printed) in ROWS.items():
    dist = reconstruct_joint(*bracket)
    rebuilt = [100 * f(dist) for f in (ate_upper, theta_upper, theta_r_upper)]
    print(f"{name:<10}" + "".join(f"{r:>8.2f}/{p:<5.2f}" for r, p in zip(rebuilt, printed)))

# The brackets are rounded to four decimals, so small discrepancies are
# expected. They grow when the bracket is narrow relative to the rounding.
