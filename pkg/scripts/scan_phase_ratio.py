"""Brute-force scan fixing the constants c1, c2 of the phase-ratio law.

With r = min(|x|, |y|) / max(|x|, |y|) the ratio against the min-law reduces
to (1 - r^beta) / (1 - r^2), which decreases from 1 (r -> 0) to beta/2
(r -> 1). The scan confirms this on a dense grid; the shipped constants are
c1 = min(beta)/2 = 1/4 and c2 = 1.
"""

import numpy as np

from rpslab.normal_form import min_law, phase_ratio

BETAS = (0.5, 0.9, 0.99)

if __name__ == "__main__":
    ax = np.logspace(-6, 6, 1201)
    x, y = np.meshgrid(ax, np.concatenate([ax, -ax]), indexing="ij")
    keep = np.abs(x) != np.abs(y)
    x, y = x[keep], y[keep]
    lo, hi = np.inf, -np.inf
    for b in BETAS:
        q = phase_ratio(x, y, b) / min_law(x, y, b)
        print(f"beta={b}: min {q.min():.6f} (beta/2 = {b / 2}), max {q.max():.6f} over {q.size} pairs")
        lo, hi = min(lo, q.min()), max(hi, q.max())
    print(f"c1 = {min(BETAS) / 2} (scan min {lo:.6f}), c2 = 1.0 (scan max {hi:.6f})")
