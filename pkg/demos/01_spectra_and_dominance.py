"""Walkthrough: building spectra and testing who dominates whom.

We build a small family of power spectral densities, look at their
autocovariances, and then ask the central structural question: is there a
member that every other member dominates under the white-noise floor?
"""

import numpy as np

from robustspec import (
    UncertaintySet,
    autocovariance,
    discrete_dominance_integral,
    find_dominated,
    lower_envelope,
    make_psd,
)
from robustspec.dominance import flat_psd_criterion, sigma2_dominance_margin

GRID = 1024
SIGMA2 = 1.0

print("=" * 70)
print("1. A family of candidate signal spectra")
print("=" * 70)

flat = make_psd("flat", grid_size=GRID, level=1.0, label="flat-1")
ar1 = make_psd("rational_ar1", grid_size=GRID, variance=2.0, pole=0.5, label="ar1")
bump = make_psd(
    "raised_cosine", grid_size=GRID, peak=4.0, center=1.0, width=2.5, label="bump"
)
members = (flat, ar1, bump)

for psd in members:
    c = autocovariance(psd, 4)
    print(f"  {psd.label:8s} power={c[0]:.3f}  autocov[0:5]={np.round(c, 3)}")

print()
print("=" * 70)
print("2. Pairwise dominance margins (positive = row dominates column)")
print("=" * 70)

labels = [p.label for p in members]
print(f"{'':10s}" + "".join(f"{l:>10s}" for l in labels))
for a in members:
    row = ""
    for b in members:
        margin, _ = sigma2_dominance_margin(a, b, SIGMA2)
        row += f"{margin:10.4f}"
    print(f"{a.label:10s}" + row)

print()
print("=" * 70)
print("3. Searching the set for a dominated member")
print("=" * 70)

idx, report = find_dominated(UncertaintySet(members=members), SIGMA2)
if idx is None:
    print("  no member is dominated by all the others")
else:
    print(f"  dominated member: {members[idx].label}")
    print(f"  margins: {np.round(report.per_member_margins, 4)}")
    print(f"  boundedness min: {report.boundedness_min:.4f}")

env = lower_envelope(UncertaintySet(members=members))
with_env = UncertaintySet(members=members + (env,))
idx, report = find_dominated(with_env, SIGMA2)
print(f"  after adding the lower envelope: dominated = {with_env.members[idx].label}")

print()
print("=" * 70)
print("4. The flat-spectrum sufficient criterion")
print("=" * 70)

rho = 1.0
for psd in members:
    ok = flat_psd_criterion(psd, rho, SIGMA2)
    print(f"  flat level {rho * SIGMA2:g} dominated by {psd.label:8s}: {ok}")

print()
print("=" * 70)
print("5. Why no dominated element exists in general (two-point example)")
print("=" * 70)

p0 = np.array([0.5, 0.5])
p1 = np.array([0.9, 0.1])
p2 = np.array([0.1, 0.9])
print(f"  E[ratio] one way : {discrete_dominance_integral(p0, p1, p2):.6f}  (> 1)")
print(f"  E[ratio] reversed: {discrete_dominance_integral(p0, p2, p1):.6f}  (> 1)")
print("  neither distribution dominates the other.")
