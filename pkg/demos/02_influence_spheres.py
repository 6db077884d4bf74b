"""
Influence spheres on a small synthetic trace
============================================

A node's sphere collects everyone it reaches either directly or through
one or two go-betweens. The score rewards a sphere that is both strong and
evenly spread.
"""

from sorec import SynthConfig, generate_synthetic
from sorec.centrality import SoRecConfig, compute_sorec, rank_nodes

config = SynthConfig(node_count=24, communities=3, hub_nodes=(0, 8, 16),
                     window_length=2000, seed=11)
trace = generate_synthetic(config)
print(f"{len(trace.records)} contacts among {len(trace.nodes)} nodes over {trace.window.length} slots")

result = compute_sorec(trace, SoRecConfig(max_intermediates=2))

# Direct relations only exist for pairs that met; indirect ones fill the gaps
direct = (result.srs.values > 0).sum() // 2
indirect = (result.in_srs > 0).sum() // 2
print(f"pairs with direct relation: {direct}, with indirect relation: {indirect}")

hub = config.hub_nodes[0]
sphere = result.spheres[hub]
strongest = sorted(sphere.strengths.items(), key=lambda kv: -kv[1])[:5]
print(f"\nnode {hub}: {len(sphere.friends)} friends, total strength {sphere.total_weight:.3f}")
for friend, w in strongest:
    print(f"  {friend:3d}  w={w:.4f}")

print("\ntop 8 by SoReC (planted hubs are 0, 8, 16):")
for entry in rank_nodes(result.scores).entries[:8]:
    print(f"  node {entry.node:3d}  score {entry.score:.4f}  rank {entry.rank:g}")
