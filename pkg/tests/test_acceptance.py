"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report; every tolerance and time budget is pinned here.
"""

import time

import numpy as np

from helpers import random_ordered_dag
from photonps import ecm
from photonps.causal_diamond import (
    LayerEvaluator,
    brute_force_diamond,
    circuit_probabilities,
    fast_layer_eval,
    find_causal_diamond,
)
from photonps.circuits import CircuitGraph
from photonps.linalg import TWO_PI, haar_random_unitary
from photonps.mesh import build_unitary, clements_decompose, mzi_unitary, random_mesh
from photonps.quantum_agent import QuantumAgent, forward, layer_probabilities, policy
from photonps.training import (
    ReplayEntry,
    TrainConfig,
    gradient,
    loss_simplified,
    mesh_handle,
    simplified_target,
)
from photonps.experiments import gso as gso_exp
from photonps.experiments import pairs as pairs_exp
from photonps.experiments import transfer as transfer_exp
from photonps.experiments import wavelength as wavelength_exp


def report(number, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {number}: {detail}", flush=True)
    assert ok, f"criterion {number}: {detail}"


def test_criterion_01_decomposition_roundtrip():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for i in range(200):
        dim = 2 + (i % 15)
        u = haar_random_unitary(dim, rng)
        err = float(np.linalg.norm(build_unitary(clements_decompose(u)) - u))
        worst = max(worst, err)
    elapsed = time.perf_counter() - start
    report(1, worst < 1e-9 and elapsed < 10.0,
           f"200 Haar roundtrips dims 2-16, worst error {worst:.2e} "
           f"(< 1e-9), {elapsed:.1f}s (< 10s)")


def test_criterion_02_bar_and_cross_states():
    bar = np.abs(mzi_unitary(0.0, np.pi) - np.array([[-1, 0], [0, 1]])).max()
    cross = np.abs(mzi_unitary(0.0, 0.0) - np.array([[0, 1j], [1j, 0]])).max()
    report(2, bar < 1e-14 and cross < 1e-14,
           f"bar defect {bar:.1e}, cross defect {cross:.1e} (< 1e-14)")


def test_criterion_03_router_bijectivity():
    rng = np.random.default_rng(103)
    failures = 0
    for _ in range(100):
        n = int(rng.integers(3, 21))
        g = random_ordered_dag(n, rng)
        order = ecm.topological_order(g)
        r = ecm.route(g, order, rng=rng)
        recovered = ecm.router_inverse(r)
        same = (
            len(recovered.vertices) == len(g.vertices)
            and ecm.ordered_edge_positions(recovered, ecm.topological_order(recovered))
            == ecm.ordered_edge_positions(g, order)
        )
        failures += not same
    report(3, failures == 0,
           f"100 random ordered DAGs (<= 20 vertices) recovered exactly, "
           f"{failures} failures")


def test_criterion_04_causal_diamond_locality():
    rng = np.random.default_rng(104)
    circuit = CircuitGraph.square(12, rng)
    worst = 0.0
    for _ in range(20):
        s, a = int(rng.integers(12)), int(rng.integers(12))
        cd = find_causal_diamond(circuit, s, a)
        exterior = [k for k in range(len(circuit.cells)) if k not in cd.diamond]
        base = circuit_probabilities(circuit, [(s, a)])[0]
        saved = [(circuit.cells[k].theta1, circuit.cells[k].theta2) for k in exterior]
        for _ in range(100):
            for k in exterior:
                circuit.cells[k].theta1 = rng.uniform(0, TWO_PI)
                circuit.cells[k].theta2 = rng.uniform(0, TWO_PI)
            delta = abs(circuit_probabilities(circuit, [(s, a)])[0] - base)
            worst = max(worst, delta)
        for k, (t1, t2) in zip(exterior, saved):
            circuit.cells[k].theta1, circuit.cells[k].theta2 = t1, t2
    report(4, worst < 1e-12,
           f"20 pairs x 100 exterior re-randomizations, worst |dp_sa| "
           f"{worst:.2e} (< 1e-12)")


def test_criterion_05_leaking_oracle_and_speed():
    rng = np.random.default_rng(105)
    mismatches = 0
    checked = 0
    for seed in range(36):
        sub = np.random.default_rng(seed)
        kind = seed % 3
        if kind == 0:
            circuit = CircuitGraph.square(int(sub.integers(4, 9)), sub)
        elif kind == 1:
            circuit = CircuitGraph.triangular(int(sub.integers(4, 8)), sub)
        else:
            circuit = CircuitGraph.random(int(sub.integers(4, 9)),
                                          int(sub.integers(3, 7)), sub)
        if len(circuit.cells) > 30:
            continue
        for _ in range(4):
            s, a = int(sub.integers(circuit.dim)), int(sub.integers(circuit.dim))
            fast = find_causal_diamond(circuit, s, a)
            diamond, leaking = brute_force_diamond(circuit, s, a)
            mismatches += not (fast.diamond == diamond and fast.leaking == leaking)
            checked += 1

    bench = CircuitGraph.square(8, rng)
    t_fast = min(
        _time_once(lambda: [find_causal_diamond(bench, s, a)
                            for s in range(8) for a in range(8)])
        for _ in range(5)
    )
    t_brute = min(
        _time_once(lambda: [brute_force_diamond(bench, s, a)
                            for s in range(8) for a in range(8)])
        for _ in range(3)
    )
    ratio = t_brute / t_fast
    report(5, mismatches == 0 and checked >= 100 and ratio >= 10.0,
           f"{checked} pairs on circuits <= 30 cells match the path oracle "
           f"exactly; one-pass {ratio:.1f}x faster at 8x8 (>= 10x)")


def _time_once(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def test_criterion_06_fast_layer_eval():
    rng = np.random.default_rng(106)
    circuit = CircuitGraph.square(16, rng)
    pairs = [(0, 15)]
    worst = 0.0
    ev = LayerEvaluator(circuit, pairs)
    for _ in range(1000):
        pos = int(rng.integers(len(circuit.layers)))
        ev.seek(pos)
        members = circuit.layer_cells(circuit.layers[pos])
        k = members[int(rng.integers(len(members)))]
        t1, t2 = rng.uniform(0, TWO_PI, 2)
        probe = ev.probabilities({k: (t1, t2)})[0][0]
        cell = circuit.cells[k]
        saved = (cell.theta1, cell.theta2)
        cell.theta1, cell.theta2 = t1, t2
        full = circuit_probabilities(circuit, pairs)[0]
        cell.theta1, cell.theta2 = saved
        worst = max(worst, abs(probe - full))

    grid = np.linspace(0, TWO_PI, 8, endpoint=False)

    def sweep_fast():
        ev2 = fast_layer_eval(circuit, pairs)
        for pos, layer in enumerate(circuit.layers):
            if pos:
                ev2.advance()
            for k in circuit.layer_cells(layer):
                for theta in grid:
                    ev2.probabilities({k: (theta, circuit.cells[k].theta2)})

    def sweep_naive():
        for layer in circuit.layers:
            for k in circuit.layer_cells(layer):
                cell = circuit.cells[k]
                saved = cell.theta1
                for theta in grid:
                    cell.theta1 = theta
                    circuit_probabilities(circuit, pairs)
                cell.theta1 = saved

    t_fast = _time_once(sweep_fast)
    t_naive = _time_once(sweep_naive)
    ratio = t_naive / t_fast
    report(6, worst < 1e-10 and ratio >= 10.0,
           f"1000 single-layer edits match rebuild within {worst:.2e} "
           f"(< 1e-10); 16-mode sweep speedup {ratio:.1f}x (>= 10x)")


def test_criterion_07_gso_convergence():
    start = time.perf_counter()
    _, log = gso_exp.gso_curve(dim=10, alpha=1.1, steps=500, seed=107,
                               stop_p=0.99, stop_competitor=0.01)
    elapsed = time.perf_counter() - start
    final = log[-1]
    worst_defect = max(row["unitarity_defect"] for row in log)
    ok = (final["p_sa"] > 0.99 and final["max_competitor"] < 0.01
          and len(log) <= 500 and worst_defect < 1e-9 and elapsed < 5.0)
    report(7, ok,
           f"p_sa {final['p_sa']:.4f} (> 0.99), competitors "
           f"{final['max_competitor']:.4f} (< 0.01) after {len(log)} updates "
           f"(<= 500), defect {worst_defect:.1e} (< 1e-9), {elapsed:.1f}s (< 5s)")


def test_criterion_08_causal_diamond_training():
    start = time.perf_counter()
    circuit, log = pairs_exp.causal_diamond_curve(
        12, pairs_exp.FOUR_PAIR_TASK, seed=0, sweeps=200, tunable="leaking",
        merit_mode="geometric_mean", stop_at=0.9)
    elapsed = time.perf_counter() - start
    probs = circuit_probabilities(circuit, pairs_exp.FOUR_PAIR_TASK)
    ok = min(probs) > 0.9 and len(log) <= 200 and elapsed < 60.0
    report(8, ok,
           f"four-pair 12x12 task: min p_sa {min(probs):.3f} (> 0.9) after "
           f"{len(log)} leaking-node sweeps (<= 200), {elapsed:.1f}s (< 60s)")


def test_criterion_09_transfer_learning_separation():
    start = time.perf_counter()
    summary = transfer_exp.run_transfer_experiment("desk-scale", seed=0)
    elapsed = time.perf_counter() - start
    stage1 = summary["stage1"]
    task_accs = [t["weighted_accuracy"] for t in summary["tasks"]]
    classical = summary["classical"]
    bound = 8.0 / 9.0
    ok = (
        stage1["converged"]
        and stage1["min_overlap"] > 0.98
        and stage1["max_marginal_deviation"] < 0.05
        and len(task_accs) >= 5
        and all(acc >= 0.95 for acc in task_accs)
        and all(acc > bound for acc in task_accs)
        and classical["raw_accuracy"] <= bound + 3 * classical["raw_sigma"]
        and elapsed < 900.0
    )
    report(9, ok,
           f"stage-1 overlap {stage1['min_overlap']:.4f} (> 0.98), marginals "
           f"within {stage1['max_marginal_deviation']:.4f} (< 0.05); "
           f"{len(task_accs)} tasks weighted accuracy min {min(task_accs):.4f} "
           f"(>= 0.95 > 8/9); classical raw {classical['raw_accuracy']:.4f} "
           f"(<= 8/9 + 3 sigma); {elapsed:.0f}s (< 900s)")


def test_criterion_10_multiwavelength():
    rng_seed = 110
    fid_rows = wavelength_exp.fidelity_scan(dims=(4, 8, 12), delta_lambdas=(0.02,),
                                            samples=100, seed=rng_seed)
    means = [row["mean_fidelity"] for row in fid_rows]
    monotone = means[0] > means[1] > means[2]
    circuit, log = wavelength_exp.multiwavelength_train(seed=0, stop_at=0.8)
    probs = circuit_probabilities(circuit, wavelength_exp.TEN_MODE_PAIRS,
                                  lambdas=list(wavelength_exp.TRAIN_LAMBDAS))
    trained = min(probs) > 0.8
    report(10, monotone and trained,
           f"mean fidelity at fixed offset falls {means[0]:.3f} > {means[1]:.3f} "
           f"> {means[2]:.3f} through dims (4, 8, 12); trained min p_sa over "
           f"3 wavelengths {min(probs):.3f} (> 0.8) with shared phases")


def test_criterion_11_conservation():
    rng = np.random.default_rng(111)
    worst = 0.0
    for _ in range(30):
        dim = int(rng.integers(3, 10))
        backend = random_mesh(dim, rng)
        agent = QuantumAgent(backend, {m: m for m in range(dim)},
                             {m: (m,) for m in range(dim)})
        s = int(rng.integers(dim))
        amps = forward(agent, s)
        worst = max(worst, abs(float(np.sum(np.abs(amps) ** 2)) - 1.0))
        table = layer_probabilities(agent, s)
        worst = max(worst, float(np.abs(table.sum(axis=0) - 1.0).max()))
        dist = policy(agent, s)
        worst = max(worst, abs(float(dist.probabilities.sum()) - 1.0))
    report(11, worst < 1e-12,
           f"30 randomized agents: forward norms, trace columns and policies "
           f"normalized within {worst:.2e} (< 1e-12)")


def test_criterion_12_loss_self_consistency():
    rng = np.random.default_rng(112)
    bad_targets = 0
    for _ in range(10_000):
        cfg = TrainConfig(gamma=float(rng.uniform(0, 1)),
                          action_count=int(rng.integers(2, 10)))
        t = simplified_target(float(rng.uniform(0, 1)), float(rng.uniform(0, 1)),
                              float(rng.uniform(-5, 5)), cfg)
        bad_targets += not (0.0 <= t <= 1.0)

    params = random_mesh(4, rng)
    handle = mesh_handle(params)
    cfg = TrainConfig(action_count=4)
    batch = [ReplayEntry(0, 3, 0.1, 1.0, 0.25, 0.4),
             ReplayEntry(1, 2, 0.1, 1.0, 0.25, 0.3),
             ReplayEntry(2, 0, 0.1, 1.0, 0.25, 0.2)]

    def loss(theta):
        return loss_simplified(handle, batch, cfg, theta=theta)

    worst_rel = 0.0
    size = handle.theta.size
    for _ in range(50):
        theta = rng.uniform(0.0, TWO_PI, size)
        g1 = gradient(loss, theta, step=1e-5)
        g2 = gradient(loss, theta, step=5e-6)
        rel = float(np.linalg.norm(g1 - g2) / (np.linalg.norm(g2) + 1e-12))
        worst_rel = max(worst_rel, rel)
    report(12, bad_targets == 0 and worst_rel < 1e-4,
           f"10^4 cutoff targets all in [0,1] ({bad_targets} violations); "
           f"step-halved gradients at 50 random points agree within "
           f"{worst_rel:.2e} (< 1e-4)")
