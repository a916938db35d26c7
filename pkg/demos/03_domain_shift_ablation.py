"""Does adaptive prototype adjustment help under domain shift?

Unseen-class instances are generated from a perturbed copy of the
ground-truth map, so their features are systematically displaced from
what the seen-class training distribution suggests. The full method
(prototype adjustment plus the centroid regularizer) is compared with an
ablation that trains the same closed-form mapping but never touches the
semantic space (gamma1 = gamma2 = 0, alpha = 0).
"""

from dataclasses import replace

import numpy as np

from zsadjust import HyperParams, SynthSpec, evaluate, split, synthesize, train


def hit1(seen, table, hp, unseen):
    model, adjusted, _ = train(seen, table, hp)
    return evaluate(model, unseen, adjusted, ks=(1,)).hit_at[1]


full = HyperParams()
ablation = replace(full, gamma1=0.0, gamma2=0.0, alpha=0.0)

print(f"{'seed':>5} {'adjusted':>9} {'ablation':>9} {'gain':>8}")
gains = []
for seed in range(10):
    spec = SynthSpec(d_v=100, d_s=85, seen_count=20, unseen_count=20,
                     per_class=20, noise_sigma=0.05, shift_sigma=0.1,
                     seed=seed)
    dataset, table, _ = synthesize(spec)
    seen, unseen = split(dataset, table)
    h_full = hit1(seen, table, full, unseen)
    h_abl = hit1(seen, table, ablation, unseen)
    gains.append(h_full - h_abl)
    print(f"{seed:>5} {h_full:>9.3f} {h_abl:>9.3f} {h_full - h_abl:>+8.3f}")

wins = sum(g >= 0 for g in gains)
print(f"\nadjustment matched or beat the ablation in {wins}/10 seeds; "
      f"mean Hit@1 gain {np.mean(gains):+.4f}")
