"""Command-line front end reproducing the theory tables and simulation runs.

Each command writes its tabular output as CSV (12 significant digits,
'#'-comment header) plus a JSON run manifest adjacent to the outputs.
Angles accept plain radians or pi-fraction tokens like pi/2 or 3pi/8;
grids use start:stop:count.  Exit codes: 0 ok, 2 usage/I-O, 3 numerical
target not reached, 4 validation failure.
"""

import argparse
import hashlib
import json
import math
import os
import re
import sys
import time

import numpy as np

from . import __version__
from .designs import (
    clifford_design,
    frame_potential,
    load_design,
    moment_operator,
    optimize_design,
    save_design,
)
from .errors import DesignFormatError, InfeasibleDesignError
from .estimation import estimation_fidelity, fidelity_scan, triple_fidelity
from .groups import (
    clifford_group_2q,
    pauli_group_projective,
    restricted_clifford_group_2q,
    save_group,
)
from .mub import measurement_of, mub_triple
from .simulate import (
    SimConfig,
    equivalence_scan_phase,
    equivalence_scan_random,
    random_subset_analysis,
    simulate_protocol,
)

EXIT_OK = 0
EXIT_IO = 2
EXIT_TARGET = 3
EXIT_VALIDATION = 4

_ANGLE_RE = re.compile(r"^(?P<num>[+-]?[\d.]*)\s*pi\s*(?:/\s*(?P<den>[\d.]+))?$")


def parse_angle(token):
    token = token.strip().lower().replace("π", "pi")
    m = _ANGLE_RE.match(token)
    if m:
        num = float(m.group("num")) if m.group("num") not in ("", "+", "-") else (
            -1.0 if m.group("num") == "-" else 1.0
        )
        den = float(m.group("den")) if m.group("den") else 1.0
        return num * math.pi / den
    return float(token)


def parse_angle_list(text):
    """Comma list of angles, or start:stop:count grid (endpoints inclusive)."""
    if ":" in text:
        start_s, stop_s, count_s = text.split(":")
        start, stop = parse_angle(start_s), parse_angle(stop_s)
        count = int(count_s)
        return list(np.linspace(start, stop, count))
    return [parse_angle(tok) for tok in text.split(",")]


DEFAULT_Z_GRID = "0,pi/8,pi/4,3pi/8,pi/2,5pi/8,3pi/4,7pi/8,pi"


def _outdir():
    return os.environ.get("MUBEST_OUTDIR", ".")


def _resolve(path):
    if path is None:
        return None
    if os.path.isabs(path) or os.path.dirname(path):
        return path
    return os.path.join(_outdir(), path)


class ManifestWriter:
    def __init__(self, command, parameters, seed=None):
        self.command = command
        self.parameters = parameters
        self.seed = seed
        self.outputs = []
        self.t0 = time.time()

    @property
    def digest(self):
        payload = json.dumps(
            {
                "command": self.command,
                "parameters": self.parameters,
                "seed": self.seed,
                "tool_version": __version__,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def write_csv(self, path, header_fields, columns, rows):
        path = _resolve(path)
        with open(path, "w") as fh:
            fh.write(f"# manifest={self.digest}\n")
            for k, v in header_fields.items():
                fh.write(f"# {k}={v}\n")
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(
                    ",".join(
                        "" if v is None else
                        f"{v:.12g}" if isinstance(v, float) else str(v)
                        for v in row
                    )
                    + "\n"
                )
        self.outputs.append(path)
        return path

    def add(self, path):
        self.outputs.append(path)

    def finalize(self):
        if not self.outputs:
            return
        manifest = {
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "output_paths": self.outputs,
            "tool_version": __version__,
            "manifest_hash": self.digest,
            "wall_time_s": round(time.time() - self.t0, 3),
        }
        path = self.outputs[0] + ".manifest.json"
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=1)

    def mark_failed(self):
        for path in self.outputs:
            if os.path.exists(path):
                open(path + ".failed", "w").close()


def _load_or_build_design(source):
    if source in (None, "clifford"):
        return clifford_design(restricted_clifford_group_2q())
    return load_design(source)


# ---------------------------------------------------------------------------
# commands

def cmd_groups(args):
    expected = {"pauli": 16, "clifford": 11520, "restricted": 960}[args.which]
    builders = {
        "pauli": lambda: pauli_group_projective(2),
        "clifford": clifford_group_2q,
        "restricted": restricted_clifford_group_2q,
    }
    group = builders[args.which]()
    print(f"order={len(group)}")
    if args.out:
        save_group(group, _resolve(args.out))
    if len(group) != expected:
        print(f"error: expected order {expected}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.out:
        mw = ManifestWriter("groups", {"which": args.which, "out": args.out})
        mw.add(_resolve(args.out))
        mw.finalize()
    return EXIT_OK


def cmd_design(args):
    mw = ManifestWriter(
        "design",
        {"subcommand": args.subcommand, "K": args.K, "iters": args.iters,
         "target": args.target, "out": args.out},
        seed=args.seed,
    )
    if args.subcommand == "clifford":
        design = clifford_design(restricted_clifford_group_2q())
    else:
        design = optimize_design(
            K=args.K, d=4, t=4, seed=args.seed, max_iters=args.iters,
            step=args.step, target=args.target,
        )
    phi4 = frame_potential(design, 4)
    _, ratio = moment_operator(design, 4)
    print(f"K={design.size} phi4={phi4:.10f} symmetric_ratio={ratio:.6f}")
    if args.out:
        save_design(design, _resolve(args.out))
        mw.add(_resolve(args.out))
        mw.finalize()
    if args.subcommand == "optimize" and args.target is not None and phi4 > args.target:
        print(f"error: phi4={phi4:.10f} did not reach target {args.target}",
              file=sys.stderr)
        return EXIT_TARGET
    return EXIT_OK


def cmd_fidelity(args):
    x = parse_angle(args.x)
    y_values = parse_angle_list(args.y_list)
    z_values = parse_angle_list(args.z_list)
    design = _load_or_build_design(args.design) if args.mode == "empirical" else None
    mw = ManifestWriter(
        "fidelity",
        {"x": x, "y_list": y_values, "z_list": z_values, "mode": args.mode,
         "copies": args.copies, "design": args.design, "out": args.out},
    )
    if args.copies == 3:
        rows = fidelity_scan(x, y_values, z_values, mode=args.mode, design=design,
                             estimator_source=args.estimator_source,
                             threads=args.threads)
        for _, y, z, f in rows:
            print(f"x={x:.6f} y={y:.6f} z={z:.6f} F={f:.12g}")
    else:
        pair = {"AB": (0, 1), "AC": (0, 2), "BC": (1, 2)}[args.pair]
        rows = []
        for y in y_values:
            for z in z_values:
                triple = mub_triple(x, y, z)
                ms = [measurement_of(b) for b in triple.bases]
                f = estimation_fidelity(
                    [ms[pair[0]], ms[pair[1]]], mode=args.mode, design=design,
                    estimator_source=args.estimator_source,
                ).fidelity
                rows.append((x, y, z, f))
                print(f"x={x:.6f} y={y:.6f} z={z:.6f} F={f:.12g}")
    if args.out:
        mw.write_csv(args.out, {"mode": args.mode, "copies": args.copies},
                     ["x", "y", "z", "F"], rows)
        mw.finalize()
    return EXIT_OK


def cmd_simulate(args):
    x, y, z = parse_angle(args.x), parse_angle(args.y), parse_angle(args.z)
    design = _load_or_build_design(args.design)
    cfg = SimConfig(seed=args.seed, m_block=args.M, blocks=args.blocks)
    triple = mub_triple(x, y, z)
    report = simulate_protocol(triple, design, cfg, mode=args.mode)
    print(f"F = {report.mean_fidelity:.6f} +- {report.std_of_mean:.6f}"
          f" (block std {report.std:.6f})")
    if args.out:
        mw = ManifestWriter(
            "simulate",
            {"x": x, "y": y, "z": z, "M": args.M, "blocks": args.blocks,
             "design": args.design, "mode": args.mode, "out": args.out},
            seed=args.seed,
        )
        path = _resolve(args.out)
        with open(path, "w") as fh:
            json.dump(report.to_dict(include_counts=args.counts), fh, indent=1)
        mw.add(path)
        blocks_csv = path + ".blocks.csv"
        mw.write_csv(
            blocks_csv, {"x": x, "y": y, "z": z},
            ["block", "fidelity"],
            [(b, float(f)) for b, f in enumerate(report.per_block_fidelities)],
        )
        mw.finalize()
    return EXIT_OK


def cmd_equivalence(args):
    base = mub_triple(math.pi / 2, math.pi / 2, math.pi / 2)
    design = _load_or_build_design(args.design)
    mode = "empirical" if args.design not in (None, "clifford") else "ideal"
    if args.mode:
        mode = args.mode
    cfg = None if args.exact else SimConfig(
        seed=args.seed, m_block=args.M, blocks=args.blocks
    )
    mw = ManifestWriter(
        "equivalence",
        {"design": args.design, "mode": mode, "exact": args.exact,
         "phi_grid": args.phi_grid, "n_unitaries": args.n_unitaries,
         "out": args.out},
        seed=args.seed,
    )
    if args.phi_grid:
        grid = parse_angle_list(args.phi_grid)
        rows = equivalence_scan_phase(grid, base, design, cfg, mode=mode)
        for phi, exact, sim, std in rows:
            sim_s = "" if sim is None else f" simulated={sim:.6f} std={std:.6f}"
            print(f"phi={phi:.6f} exact={exact:.12g}{sim_s}")
        if args.out:
            mw.write_csv(args.out, {"mode": mode},
                         ["phi", "exact_F", "simulated_F", "std"], rows)
            mw.finalize()
    else:
        exact_s, sim_s = equivalence_scan_random(
            args.n_unitaries, base, design, cfg, mode=mode,
            unitary_seed=args.seed,
        )
        rows = [("exact", exact_s.maximal, exact_s.minimal, exact_s.average,
                 exact_s.std, exact_s.max_deviation)]
        print(f"exact: max={exact_s.maximal:.6f} min={exact_s.minimal:.6f}"
              f" avg={exact_s.average:.6f} std={exact_s.std:.6f}"
              f" max_dev={exact_s.max_deviation:.6f}")
        if sim_s is not None:
            rows.append(("simulated", sim_s.maximal, sim_s.minimal, sim_s.average,
                         sim_s.std, sim_s.max_deviation))
            print(f"simulated: max={sim_s.maximal:.6f} min={sim_s.minimal:.6f}"
                  f" avg={sim_s.average:.6f} std={sim_s.std:.6f}"
                  f" max_dev={sim_s.max_deviation:.6f}")
        if args.out:
            mw.write_csv(
                args.out, {"n_unitaries": args.n_unitaries, "mode": mode},
                ["kind", "maximal", "minimal", "average", "std", "max_deviation"],
                rows,
            )
            mw.finalize()
    return EXIT_OK


def cmd_subsets(args):
    x, y, z = parse_angle(args.x), parse_angle(args.y), parse_angle(args.z)
    design = _load_or_build_design(args.design)
    cfg = SimConfig(seed=args.seed, m_block=args.M, blocks=args.blocks)
    report = simulate_protocol(mub_triple(x, y, z), design, cfg)
    sizes = [int(s) for s in args.sizes.split(",")]
    results = random_subset_analysis(
        report, sizes, trials=args.trials, seed=args.subset_seed
    )
    rows = [(size, mean, std) for size, (mean, std) in results.items()]
    for size, mean, std in rows:
        print(f"K={size} mean={mean:.6f} std={std:.6f}")
    if args.out:
        mw = ManifestWriter(
            "subsets",
            {"x": x, "y": y, "z": z, "sizes": sizes, "trials": args.trials,
             "M": args.M, "blocks": args.blocks, "out": args.out},
            seed=args.seed,
        )
        mw.write_csv(args.out, {"x": x, "y": y, "z": z, "trials": args.trials},
                     ["K", "mean", "std"], rows)
        mw.finalize()
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mubest",
        description="Three-copy MUB estimation fidelities: designs, exact theory, "
                    "and seeded Monte-Carlo simulation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("groups", help="generate Pauli/Clifford/restricted groups")
    p.add_argument("--which", choices=["pauli", "clifford", "restricted"],
                   required=True)
    p.add_argument("--out", help="write serialized group matrices (JSON)")
    p.set_defaults(func=cmd_groups)

    p = sub.add_parser("design", help="build a 4-design (Clifford orbit or numerical)")
    p.add_argument("subcommand", choices=["clifford", "optimize"])
    p.add_argument("--K", type=int, default=200, help="number of states (optimize)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=100000, help="max iterations")
    p.add_argument("--step", type=float, default=1.0, help="initial step length")
    p.add_argument("--target", type=float, default=None,
                   help="stop when phi_4 reaches this value")
    p.add_argument("--out", help="design file path (.json or .csv)")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("fidelity", help="exact estimation-fidelity scan")
    p.add_argument("--x", default="pi/2")
    p.add_argument("--y-list", default="pi/2,0")
    p.add_argument("--z-list", default=DEFAULT_Z_GRID)
    p.add_argument("--mode", choices=["ideal", "empirical"], default="ideal")
    p.add_argument("--copies", type=int, choices=[2, 3], default=3)
    p.add_argument("--pair", choices=["AB", "AC", "BC"], default="AB",
                   help="measurement pair for --copies 2")
    p.add_argument("--estimator-source", choices=["matched", "ideal"],
                   default="matched",
                   help="'ideal' scores the ideal-Q estimator against Q' "
                        "(empirical mode only)")
    p.add_argument("--design", help="design file, or 'clifford' (empirical mode)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for the grid scan (output is identical "
                        "for any value)")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("simulate", help="seeded Monte-Carlo protocol run")
    p.add_argument("--x", default="pi/2")
    p.add_argument("--y", default="pi/2")
    p.add_argument("--z", default="pi/2")
    p.add_argument("--design", default="clifford",
                   help="design file path or 'clifford'")
    p.add_argument("--mode", choices=["ideal", "empirical"], default="ideal",
                   help="which Q defines the estimators")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--M", type=int, default=10000, help="repetitions per block")
    p.add_argument("--blocks", type=int, default=10)
    p.add_argument("--counts", action="store_true",
                   help="include the full outcome count table in the report")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equivalence",
                       help="controlled-phase / random-unitary equivalence scans")
    p.add_argument("--design", default="clifford")
    p.add_argument("--mode", choices=["ideal", "empirical"], default=None)
    p.add_argument("--exact", action="store_true", help="skip simulation")
    p.add_argument("--phi-grid", help="phase grid start:stop:count")
    p.add_argument("--n-unitaries", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--M", type=int, default=10000)
    p.add_argument("--blocks", type=int, default=10)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("subsets", help="random-subset resampling of a simulated run")
    p.add_argument("--x", default="pi/2")
    p.add_argument("--y", default="pi/2")
    p.add_argument("--z", default="pi/2")
    p.add_argument("--design", default="clifford")
    p.add_argument("--sizes", default="240,480,720")
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--subset-seed", type=int, default=0)
    p.add_argument("--M", type=int, default=10000)
    p.add_argument("--blocks", type=int, default=10)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_subsets)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, DesignFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InfeasibleDesignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TARGET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
