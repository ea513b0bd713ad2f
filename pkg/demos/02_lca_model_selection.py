"""Plant the four-class profile model, sweep K by BIC and compare profiles."""
import numpy as np

from mmfuse import lca, synthgen

spec = synthgen.fig3_spec(3000, seed=0)
Y, z = synthgen.sample_matrix(spec)
best, rows = lca.select_k(Y, lca.LcaConfig(seed=0))

print(" K      logL          BIC")
for r in rows:
    mark = "  <- chosen" if r.K == best.model.K else ""
    print(f"{r.K:2d} {r.log_likelihood:12.2f} {r.bic:12.2f}{mark}")

profiles = lca.binary_profiles(best.model)
names = list(synthgen.FIG3_PROFILES)
planted = synthgen.fig3_profiles()
for k, prof in enumerate(profiles):
    match = next((names[i] for i, p in enumerate(planted) if np.array_equal(p, prof)), "no planted match")
    print(f"class {k + 1} (weight {best.model.weights[k]:.3f}): {match}")
