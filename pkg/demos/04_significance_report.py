"""
04_significance_report.py

Kruskal-Wallis followed by Dunn's pairwise test with Bonferroni
adjustment, on synthetic result samples shaped like repeated runs.
"""

import numpy as np

from crpenergy.stats import ResultSample, dunn_bonferroni, kruskal_wallis, summarize

rng = np.random.default_rng(0)
samples = [
    ResultSample("GP-R", rng.normal(2.02e6, 1.5e4, 30)),
    ResultSample("GRH-R", rng.normal(2.05e6, 1.5e4, 30)),
    ResultSample("GP-U", rng.normal(2.10e6, 2.0e4, 30)),
    ResultSample("TLP", rng.normal(2.41e6, 1.0, 30)),
]

print(f"{'method':7s} {'min':>10s} {'median':>10s} {'max':>10s} {'sd':>8s}")
for s in samples:
    mn, med, mx, sd = summarize(s)
    print(f"{s.method:7s} {mn:10.0f} {med:10.0f} {mx:10.0f} {sd:8.0f}")

h, p = kruskal_wallis(samples)
print(f"\nKruskal-Wallis H = {h:.2f}, p = {p:.3g}")
if p < 0.05:
    d = dunn_bonferroni(samples)
    print("\n        " + "  ".join(f"{m:>6s}" for m in d.methods))
    for m, row in zip(d.methods, d.relations):
        print(f"{m:7s} " + "  ".join(f"{c:>6s}" for c in row))
    print("\n'>' = row uses significantly less energy than column")
