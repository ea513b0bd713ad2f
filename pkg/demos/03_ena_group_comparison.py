"""Two outcome groups with a planted network shift: means rotation and Mann-Whitney on MR1."""
from mmfuse import ena, synthgen
from mmfuse.model import OutcomeGroups

vectors, ratings, direction = synthgen.two_group_adjacency(23, 33, dim=136, shift_sd=1.0, seed=1)
groups = OutcomeGroups.from_ratings(ratings, "task")
kept, centered, mean = ena.normalize_and_center([ena.AdjacencyVector(u, v) for u, v in vectors.items()])
space = ena.means_rotation(centered, [v.unit_id for v in kept], groups, mean)

print(f"variance explained: MR1 {space.variance_explained[0]:.3f}, SVD2 {space.variance_explained[1]:.3f}")
print(f"|cos(MR1, planted direction)| = {abs(space.axes[0] @ direction):.3f}")
for c in ena.compare_groups(space, groups):
    verdict = "significant" if c.significant else "not significant"
    print(f"{c.axis}: U={c.U:g} p={c.p:.2e} r={c.r:+.3f} "
          f"(Mdn A={c.median_a:+.3f}, B={c.median_b:+.3f}) {verdict} at {c.alpha_adjusted}")
