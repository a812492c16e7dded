"""Initialization quality vs convergence effort.

The refinement reaches the same optimum from an informed linear estimate, a
fixed canonical element, or a random one; only the iteration count changes.
Prints the effort distribution per initializer and one descent trace each.
"""

import numpy as np

from epicert import (
    SceneConfig,
    build_data_matrix,
    eight_point,
    generate,
    identity_init,
    random_essential,
    solve_rtr,
)

INITS = {
    "8pt": lambda pairs, seed: eight_point(pairs),
    "identity": lambda pairs, seed: identity_init(),
    "random": lambda pairs, seed: random_essential(seed),
}

iters = {name: [] for name in INITS}
final = {name: [] for name in INITS}
for seed in range(60):
    problem = generate(SceneConfig(n_points=100, noise_px=0.5, seed=1000 + seed))
    data = build_data_matrix(problem.pairs)
    for name, make in INITS.items():
        report = solve_rtr(data, make(problem.pairs, seed))
        iters[name].append(report.outer_iterations)
        final[name].append(report.final_cost)

print(f"{'init':>9} {'median':>7} {'p90':>5} {'max':>4}   agreement with best cost")
best = np.minimum.reduce([np.array(final[n]) for n in INITS])
for name in INITS:
    agree = np.mean(np.array(final[name]) <= best * (1 + 1e-6) + 1e-15)
    print(
        f"{name:>9} {np.median(iters[name]):>7.0f} {np.percentile(iters[name], 90):>5.0f} "
        f"{max(iters[name]):>4d}   {agree:.2%}"
    )

print("\nexample descent (cost per accepted iteration):")
problem = generate(SceneConfig(n_points=100, noise_px=0.5, seed=1234))
data = build_data_matrix(problem.pairs)
for name, make in INITS.items():
    trace = solve_rtr(data, make(problem.pairs, 5)).cost_trace
    shown = ", ".join(f"{c:.2e}" for c in trace[:8])
    more = " ..." if len(trace) > 8 else ""
    print(f"{name:>9}: {shown}{more}")
