"""Command-line surface: every harness as a subcommand with machine-readable
outputs.

Exit codes: 0 success, 1 I/O or parse failure, 2 validation/domain failure.
Every run writes its resolved configuration and seed next to the results, and
never overwrites an existing output directory without --force.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import causal_diamond, io, mesh, quantum_agent
from .errors import NonUnitaryError, StructureError
from .experiments import gso as gso_exp
from .experiments import pairs as pairs_exp
from .experiments import transfer as transfer_exp
from .experiments import wavelength as wavelength_exp
from .linalg import unitarity_defect

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2


def _prepare_out(args) -> Path:
    out = Path(args.out)
    if out.exists() and any(out.iterdir()) and not args.force:
        raise FileExistsError(f"output directory {out} is not empty (use --force)")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, args, extra=None):
    manifest = {
        "subcommand": args.command,
        "seed": args.seed,
        "profile": getattr(args, "profile", None),
        "arguments": {k: v for k, v in vars(args).items()
                      if k not in ("func", "command") and v is not None},
    }
    manifest.update(extra or {})
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, default=str)


def _load_config(path):
    if path is None:
        return {}
    text = Path(path).read_bytes()
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text.decode())
    return json.loads(text)


def cmd_decompose(args) -> int:
    try:
        u = io.load_unitary(args.unitary)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read unitary: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        params = mesh.clements_decompose(u)
    except NonUnitaryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = _prepare_out(args)
    io.save_mesh(out / "mesh.json", params)
    error = float(np.linalg.norm(mesh.build_unitary(params) - u))
    _write_manifest(out, args, {"roundtrip_frobenius_error": error})
    print(f"decomposed {u.shape[0]}x{u.shape[0]} unitary into "
          f"{len(params.cells)} cells; roundtrip Frobenius error {error:.3e}")
    return EXIT_OK


def cmd_build(args) -> int:
    try:
        params = io.load_mesh(args.mesh)
    except (OSError, ValueError, KeyError, StructureError) as exc:
        print(f"error: cannot read mesh parameters: {exc}", file=sys.stderr)
        return EXIT_IO
    out = _prepare_out(args)
    u = mesh.build_unitary(params)
    io.save_unitary(out / "unitary.json", u)
    _write_manifest(out, args, {"unitarity_defect": unitarity_defect(u)})
    print(f"built {params.dim}x{params.dim} unitary; defect {unitarity_defect(u):.3e}")
    return EXIT_OK


def cmd_trace(args) -> int:
    try:
        circuit = io.load_circuit(args.checkpoint)
    except (OSError, ValueError, KeyError, StructureError) as exc:
        print(f"error: cannot read checkpoint: {exc}", file=sys.stderr)
        return EXIT_IO
    if not 0 <= args.percept < circuit.dim:
        print(f"error: percept mode {args.percept} outside [0, {circuit.dim})",
              file=sys.stderr)
        return EXIT_INVALID
    agent = quantum_agent.QuantumAgent(
        circuit, {args.percept: args.percept},
        {m: (m,) for m in range(circuit.dim)},
    )
    probs = quantum_agent.layer_probabilities(agent, args.percept)
    sums = probs.sum(axis=0)
    worst = float(np.abs(sums - 1.0).max())
    if worst > 1e-12:
        print(f"error: layer probability columns sum to 1 within {worst:.3e} > 1e-12",
              file=sys.stderr)
        return EXIT_INVALID
    out = _prepare_out(args)
    rows = [
        {"layer": layer, "mode": m, "probability": repr(float(probs[m, layer]))}
        for layer in range(probs.shape[1]) for m in range(circuit.dim)
    ]
    io.write_csv(out / "trace.csv", rows)
    _heatmap_svg(out / "trace.svg", probs)
    _write_manifest(out, args, {"column_sum_max_deviation": worst})
    print(f"traced percept mode {args.percept} through {probs.shape[1] - 1} layers; "
          f"column sums within {worst:.2e} of 1")
    return EXIT_OK


def _heatmap_svg(path, probs):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    im = ax.imshow(probs, aspect="auto", origin="upper", cmap="viridis")
    ax.set_xlabel("layer")
    ax.set_ylabel("output mode")
    fig.colorbar(im, ax=ax, label="probability")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _curve_svg(path, rows, x_key, y_keys, xlabel, ylabel):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [row[x_key] for row in rows]
    for key in y_keys:
        ax.plot(xs, [row[key] for row in rows], label=key)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_diamond(args) -> int:
    try:
        circuit = io.load_circuit(args.circuit)
    except (OSError, ValueError, KeyError, StructureError) as exc:
        print(f"error: cannot read circuit: {exc}", file=sys.stderr)
        return EXIT_IO
    cd = causal_diamond.find_causal_diamond(circuit, args.source, args.sink)
    out = _prepare_out(args)

    def cells(indices):
        return [
            {"cell": k, "layer": circuit.cells[k].layer,
             "modes": list(circuit.cells[k].modes)}
            for k in sorted(indices)
        ]

    report = {
        "pair": {"s": args.source, "a": args.sink},
        "diamond_cells": cells(cd.diamond),
        "surface_cells": cells(cd.surface),
        "leaking_cells": cells(cd.leaking),
    }
    with open(out / "diamond.json", "w") as fh:
        json.dump(report, fh, indent=1)
    _write_manifest(out, args)
    print(f"diamond of ({args.source} -> {args.sink}): {len(cd.diamond)} cells, "
          f"{len(cd.leaking)} leaking")
    return EXIT_OK


def cmd_wavelength_scan(args) -> int:
    dims = [int(d) for d in args.dims.split(",")]
    deltas = [float(d) for d in args.deltas.split(",")]
    rows = wavelength_exp.fidelity_scan(dims, deltas, samples=args.samples,
                                        seed=args.seed)
    out = _prepare_out(args)
    io.write_csv(out / "fidelity_scan.csv", rows)
    if args.plot:
        _curve_svg(out / "fidelity_scan.svg",
                   [r for r in rows if r["delta_lambda"] == deltas[0]],
                   "dim", ["mean_fidelity"], "dim", "fidelity")
    _write_manifest(out, args)
    print(f"scanned {len(dims)} sizes x {len(deltas)} wavelength offsets "
          f"({args.samples} meshes each)")
    return EXIT_OK


def cmd_train(args) -> int:
    config = _load_config(args.config)
    out = _prepare_out(args)
    if args.method == "gso":
        dim = int(config.get("dim", 10))
        alpha = float(config.get("alpha", 1.1))
        steps = int(config.get("steps", 500))
        u, log = gso_exp.gso_curve(dim, alpha, steps, seed=args.seed)
        io.write_csv(out / "gso_curve.csv", log)
        io.save_unitary(out / "checkpoint_unitary.json", u)
        if args.plot:
            _curve_svg(out / "gso_curve.svg", log, "step",
                       ["p_sa", "max_competitor"], "step", "probability")
        summary = {"method": "gso", "dim": dim, "alpha": alpha,
                   "final_p_sa": log[-1]["p_sa"], "steps_run": len(log)}
    elif args.method == "causal-diamond":
        if args.scenario == "multiwavelength":
            circuit, log = wavelength_exp.multiwavelength_train(
                seed=args.seed, sweeps=int(config.get("sweeps", 120)))
        else:
            dim = int(config.get("dim", 12))
            pairs = [tuple(map(tuple, p)) for p in config["pairs"]] \
                if "pairs" in config else pairs_exp.FOUR_PAIR_TASK
            circuit, log = pairs_exp.causal_diamond_curve(
                dim, pairs, seed=args.seed,
                sweeps=int(config.get("sweeps", 200)),
                tunable=config.get("tunable", "leaking"),
                stop_at=config.get("stop_at", 0.9))
        io.write_csv(out / "learning_curve.csv", log)
        io.save_circuit(out / "checkpoint_circuit.json", circuit)
        if args.plot:
            keys = [k for k in log[0] if k.startswith("p_")]
            _curve_svg(out / "learning_curve.svg", log, "sweep", keys,
                       "sweep", "p_sa")
        summary = {"method": "causal-diamond", "scenario": args.scenario,
                   "sweeps_run": len(log), "final_merit": log[-1]["merit"]}
    elif args.method == "loss":
        if args.scenario != "transfer":
            print(f"error: method 'loss' supports scenario 'transfer', "
                  f"got {args.scenario!r}", file=sys.stderr)
            return EXIT_INVALID
        result = transfer_exp.run_transfer_experiment(
            args.profile, seed=args.seed,
            classical_eval_rounds=int(config.get("classical_eval_rounds", 100000)))
        for label, log in result["logs"].items():
            io.write_csv(out / f"task_{label}.csv", log)
        summary = {k: v for k, v in result.items() if k not in ("logs", "agent")}
    else:
        print(f"error: unknown method {args.method!r}", file=sys.stderr)
        return EXIT_INVALID
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=1, default=str)
    _write_manifest(out, args, {"config": config})
    print(f"training finished; results in {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photonps",
        description="Photonic projective-simulation agents: decomposition, "
                    "training, tracing and causal-diamond analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="RNG seed (recorded in outputs)")
        p.add_argument("--out", default="photonps-out", help="output directory")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")

    p = sub.add_parser("decompose", help="unitary JSON -> mesh phase settings")
    p.add_argument("unitary")
    common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("build", help="mesh phase settings -> unitary JSON")
    p.add_argument("mesh")
    common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("train", help="run a training harness")
    p.add_argument("--method", required=True, choices=("loss", "causal-diamond", "gso"))
    p.add_argument("--scenario", default="pairs",
                   choices=("pairs", "transfer", "multiwavelength"))
    p.add_argument("--config", help="JSON or TOML config file")
    p.add_argument("--profile", default="desk-scale",
                   choices=tuple(transfer_exp.PROFILES))
    p.add_argument("--plot", action="store_true", help="emit SVG learning curves")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("trace", help="layer-wise photon position probabilities")
    p.add_argument("checkpoint", help="mesh or circuit JSON")
    p.add_argument("--percept", type=int, required=True, help="input mode")
    common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("diamond", help="causal-diamond report for an (s, a) pair")
    p.add_argument("circuit", help="mesh or circuit JSON")
    p.add_argument("-s", "--source", type=int, required=True)
    p.add_argument("-a", "--sink", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_diamond)

    p = sub.add_parser("wavelength-scan",
                       help="fidelity of effective unitaries vs size and wavelength")
    p.add_argument("--dims", default="4,8,12")
    p.add_argument("--deltas", default="0.01,0.02,0.05,0.15")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--plot", action="store_true")
    common(p)
    p.set_defaults(func=cmd_wavelength_scan)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (StructureError, NonUnitaryError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
