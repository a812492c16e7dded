"""Desk-scale sweep: how often can optimality be certified as noise grows?

Reproduces the benchmark's headline table: per noise level and point count,
the fraction of trials whose solution was certified optimal, plus recall
against a multi-start oracle.  Takes about half a minute.
"""

from epicert import ExperimentGrid, run_grid, summarize
from epicert.certifier import CertifierConfig

grid = ExperimentGrid(
    master_seed=7,
    noise_levels=(0.1, 0.5, 1.0, 2.5),
    point_counts=(10, 20, 50, 100, 200),
    trials_per_cell=40,
    certifier=CertifierConfig(relative_gap=True, tau_gap=1e-3),
)
results = run_grid(grid, progress=False)
rows = summarize(results)

print(f"{'noise px':>9} {'points':>7} {'certified':>10} {'recall':>7} {'rot err med':>12}")
for row in rows:
    recall = "n/a" if row["recall"] is None else f"{row['recall']:.2f}"
    print(
        f"{row['noise_px']:>9} {row['n_points']:>7} {row['certified_fraction']:>10.2f} "
        f"{recall:>7} {row['rotation_error_median_deg']:>11.4f}d"
    )

flagged = sum(r.oracle_flagged for r in results.records)
print(f"\n{len(results.records)} trials, {flagged} oracle disagreements flagged")
print("certification stays near one at survey noise and erodes as noise and")
print("point count push the problem away from the zero-residual regime")
