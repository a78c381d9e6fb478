"""Loss-based variational training with experience replay.

Percept-action pairs are collected into a replay buffer; each flush sums the
simplified loss over the batch (binary KL against ReLU-cutoff targets built
from glow and reward) and runs a fixed number of adaptive-moment steps on
the mesh phases by finite differences. Writes the per-flush training log.
"""

import sys

import numpy as np

from photonps import io
from photonps.mesh import random_mesh
from photonps.training import (
    AdamState,
    ReplayBuffer,
    ReplayEntry,
    TrainConfig,
    glow_update,
    mesh_handle,
    replay_flush,
    simplified_target,
    training_log_row,
)

rng = np.random.default_rng(0)
dim = 4
rewarded = {0: 3, 1: 2}  # percept mode -> rewarded action mode
config = TrainConfig(gamma=0.0, eta=1.0, reward_scale=0.1, action_count=dim,
                     learning_rate=0.05, optimizer_steps=10)

handle = mesh_handle(random_mesh(dim, rng))
adam = AdamState()
buffer = ReplayBuffer(capacity=1000)
glow = {}
log = []
for flush in range(1, 26):
    pairs = list(rewarded.items())
    probs = handle.probabilities(pairs)
    for _ in range(60):
        s = int(rng.choice(list(rewarded)))
        p_all = handle.probabilities([(s, a) for a in range(dim)])
        a = int(rng.choice(dim, p=p_all / p_all.sum()))
        reward = config.reward(flush) if a == rewarded[s] else -config.reward(flush)
        glow = glow_update(glow, (s, a), config.eta)
        p_prev = float(handle.probabilities([(s, a)])[0])
        buffer.add(ReplayEntry(s, a, reward, glow[(s, a)], p_prev,
                               simplified_target(p_prev, glow[(s, a)], reward, config)))
    handle, losses = replay_flush(buffer, handle, config, adam)
    now = handle.probabilities(pairs)
    log.append(training_log_row(flush, losses[-1],
                                dict(zip(pairs, now)), float(np.sum(now)),
                                config.learning_rate))
    print(f"flush {flush:2d}: loss {losses[-1]:8.4f}, "
          + " ".join(f"p({s}->{a})={p:.3f}" for (s, a), p in zip(pairs, now)))

if len(sys.argv) > 1:
    io.write_csv(sys.argv[1], log)
    print("training log written to", sys.argv[1])
