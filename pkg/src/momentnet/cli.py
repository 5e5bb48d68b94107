"""Command-line experiment runner.

Every subcommand writes one JSON (or CSV) document with full provenance, prints a
one-line summary and exits with 0 on success, 2 on invalid input and 3 on a
numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from importlib import metadata as importlib_metadata
from pathlib import Path

import numpy as np

from . import analysis, montecarlo, oracle
from .circuits import (
    Topology,
    TopologyError,
    build_pnet,
    circuit_moment,
    evolve,
    hea_topology,
    parse_pauli,
    qcnn_topology,
    random_topology,
    vectorize_pauli_obs,
)
from .commutant import BasisError, SamplingError, normalize_group, pgate
from .mps import DEFAULT_CUTOFF
from .tensor import DimensionError, NumericError

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3
SUM_TOL = 1e-10
ORACLE_TOL = 1e-10


class CLIError(ValueError):
    """Invalid combination of flags."""


def _version() -> str:
    try:
        return importlib_metadata.version("momentnet")
    except importlib_metadata.PackageNotFoundError:
        return "unknown"


def parse_layers(text: str | None) -> list[int] | None:
    """``"5"`` -> ``[5]``; ``"1..30"`` -> ``[1, ..., 30]``; ``"1,4,8"`` -> ``[1, 4, 8]``."""
    if text is None:
        return None
    text = text.strip()
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise CLIError(f"empty layer range {text!r}")
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise CLIError(f"cannot parse --layers {text!r}") from exc


def build_topology(args, n_layers: int | None = None) -> Topology:
    """Topology from ``--topology``, ``--n``, ``--layers`` and ``--group``."""
    source = args.topology
    group = normalize_group(args.group)
    if source.startswith("file:"):
        path = Path(source[5:])
        try:
            top = Topology.from_json(path.read_text(), name=path.name)
        except OSError as exc:
            raise CLIError(f"cannot read topology file: {exc}") from exc
        return top
    if args.n is None:
        raise CLIError("--n is required for generated topologies")
    if source == "hea":
        depth = n_layers if n_layers is not None else args.n
        return hea_topology(args.n, depth, group)
    if source == "qcnn":
        return qcnn_topology(args.n, group)
    if source == "qcnn-brick":
        return qcnn_topology(args.n, group, conv="brick")
    raise CLIError(f"unknown topology {source!r}")


def _provenance(args, topology: Topology | None = None, pnet=None) -> dict:
    out = {
        "version": _version(),
        "command": args.command,
        "flags": {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "out")},
        "threads": args.threads,
    }
    if topology is not None:
        out["topology"] = topology.to_dict()
        out["topology_name"] = topology.name
        out["topology_hash"] = topology.digest()
    if pnet is not None:
        out["gate_digests"] = pnet.metadata.get("gate_digests")
        out["basis"] = pnet.basis.group
        out["qcnn_pairing"] = pnet.metadata.get("qcnn_pairing")
    return out


def _finite(x):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _dump_json(doc: dict) -> str:
    return json.dumps(_finite(doc), sort_keys=True, indent=1) + "\n"


def _emit(args, text: str, summary: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


def _exact_strings(gate) -> list[list[str]] | None:
    if gate.exact is None:
        return None
    return [[str(x) for x in row] for row in gate.exact]


def cmd_pgate(args) -> int:
    g = pgate(args.group, args.t)
    doc = {
        "group": g.group,
        "t": g.t,
        "labels": list(g.labels),
        "index_order": "b*site1 + site2, matrix[out, in]",
        "matrix": g.element_matrix().tolist(),
        "matrix_orthonormal": g.matrix.tolist(),
        "exact": _exact_strings(g),
        "mpo_rank": g.mpo_rank,
        "idempotence_residual": g.idempotence_residual(),
        "digest": g.digest(),
        "provenance": _provenance(args),
    }
    if g.group == "O4" and g.t == 2:
        doc["note"] = "entry [BB, B1] = 7/36, fixed by the exact twirl projector"
    if args.format == "text":
        lines = [f"{g.group} t={g.t} labels={list(g.labels)}"]
        rows = doc["exact"] or [[f"{x:.12g}" for x in row] for row in doc["matrix"]]
        lines += ["  ".join(f"{x:>6}" for x in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        text = _dump_json(doc)
    _emit(args, text, f"pgate {g.group} t={g.t} digest={g.digest()}")
    return EXIT_OK


def cmd_purities(args) -> int:
    layers = parse_layers(args.layers)
    top = build_topology(args, layers[-1] if layers else None)
    p = build_pnet(top)
    obs = parse_pauli(args.obs or "Z1", top.n)
    cutoff = args.cutoff if args.cutoff is not None else analysis.PURITY_CUTOFF
    dist = analysis.k_purities(top, obs, rel_cutoff=cutoff, pnet=p, tilt=args.tilt)
    total = dist.total
    doc = {
        "n": top.n,
        "topology": top.to_dict(),
        "observable": obs,
        "k_purities": dist.values.tolist(),
        "max_bond": dist.metadata["max_bond"],
        "bond_profile": dist.metadata["bond_profile"],
        "argmax": dist.argmax,
        "sum": total,
        "sum_check": {"deviation": total - 1.0, "tolerance": SUM_TOL, "ok": abs(total - 1.0) <= SUM_TOL},
        "cutoff": cutoff,
        "tilt": args.tilt,
        "provenance": _provenance(args, top, p),
    }
    _emit(
        args,
        _dump_json(doc),
        f"purities n={top.n} sum-1={total - 1.0:.3e} argmax={dist.argmax} chi_max={dist.metadata['max_bond']}",
    )
    return EXIT_OK


def cmd_haar_purities(args) -> int:
    if args.n is None:
        raise CLIError("--n is required")
    dist = analysis.haar_purities(args.n)
    doc = {"n": args.n, "k_purities": dist.values.tolist(), "provenance": _provenance(args)}
    _emit(args, _dump_json(doc), f"haar-purities n={args.n} argmax={dist.argmax}")
    return EXIT_OK


def cmd_anticoncentrate(args) -> int:
    if args.topology != "hea":
        raise CLIError("anticoncentrate supports --topology hea")
    if args.n is None:
        raise CLIError("--n is required")
    layers = parse_layers(args.layers) or list(range(1, args.n + 1))
    group = normalize_group(args.group)
    cutoff = args.cutoff if args.cutoff is not None else DEFAULT_CUTOFF
    curve = analysis.anticoncentration_curve(args.n, layers, group, rel_cutoff=cutoff)
    zh = analysis.z_haar(args.n, group)
    top = hea_topology(args.n, max(layers), group)
    doc = {
        "n": args.n,
        "group": group,
        "layers": [c[0] for c in curve],
        "Z": [c[1] for c in curve],
        "max_bond": [c[2] for c in curve],
        "z_haar": zh,
        "cutoff": cutoff,
        "provenance": _provenance(args, top, build_pnet(top)),
    }
    last = curve[-1]
    _emit(args, _dump_json(doc), f"anticoncentrate n={args.n} Z({last[0]})={last[1]:.12g} z_haar={zh:.12g}")
    return EXIT_OK


def cmd_entropy_scan(args) -> int:
    layers = parse_layers(args.layers)
    top = build_topology(args, layers[-1] if layers and args.topology == "hea" else None)
    obs = parse_pauli(args.obs or "Z1", top.n)
    families = [f.strip().upper() for f in args.families.split(",") if f.strip()]
    cutoff = args.cutoff if args.cutoff is not None else DEFAULT_CUTOFF
    measure = {"vn": "S", "s": "S", "renyi2": "S2", "s2": "S2"}.get(args.measure.lower())
    if measure is None:
        raise CLIError(f"unknown measure {args.measure!r}")
    keep = layers if args.topology != "hea" else None
    rows = analysis.entropy_scan(
        top, obs, families=families, measures=(measure,), chi_budget=args.chi_budget, rel_cutoff=cutoff, layers=keep
    )
    if args.format == "json":
        doc = {
            "measure": measure,
            "rows": [
                {"layer": r.layer, "family": r.family, "index": r.index, "value": r.value} for r in rows
            ],
            "provenance": _provenance(args, top, build_pnet(top)),
        }
        text = _dump_json(doc)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["layer", "family", "index", "value"])
        for r in rows:
            w.writerow([r.layer, r.family, r.index, "skipped" if r.value is None else repr(float(r.value))])
        text = buf.getvalue()
    _emit(args, text, f"entropy-scan n={top.n} measure={measure} rows={len(rows)}")
    return EXIT_OK


def cmd_mc_compare(args) -> int:
    layers = parse_layers(args.layers)
    top = build_topology(args, layers[-1] if layers else None)
    p = build_pnet(top)
    obs = parse_pauli(args.obs or "Z1", top.n)
    tn = analysis.k_purities(top, obs, pnet=p)
    counts = [int(x) for x in str(args.samples).split(",") if x.strip()]
    if not counts or min(counts) < 1:
        raise CLIError("--samples must list positive integers")
    runs = []
    for n_s in counts:
        mc = montecarlo.mc_sample_purities(top, obs, n_s, seed=args.seed, pnet=p)
        d = mc.to_dict()
        for key in ("topology", "topology_hash", "gate_digests"):
            d.pop(key, None)
        d["kl"] = montecarlo.kl_divergence(tn.values, mc.estimates, n_s)
        runs.append(d)
    doc = {
        "n": top.n,
        "observable": obs,
        "tn": tn.values.tolist(),
        "mc": runs,
        "seed": args.seed,
        "sign_report": [montecarlo.sign_problem_report(pgate(g)).to_dict() for g in sorted(top.groups)],
        "provenance": _provenance(args, top, p),
    }
    kl = ", ".join(f"{r['n_s']}:{r['kl']:.3e}" for r in runs)
    _emit(args, _dump_json(doc), f"mc-compare n={top.n} KL[{kl}]")
    return EXIT_OK


def cmd_bond_profile(args) -> int:
    layers = parse_layers(args.layers)
    top = build_topology(args, layers[-1] if layers else None)
    p = build_pnet(top)
    obs = parse_pauli(args.obs or "Z1", top.n)
    cutoff = args.cutoff if args.cutoff is not None else DEFAULT_CUTOFF
    _, profile = evolve(p, vectorize_pauli_obs(obs, p.basis), rel_cutoff=cutoff)
    doc = {
        "n": top.n,
        "observable": obs,
        "bond_profile": profile,
        "max_bond": max(profile, default=1),
        "cutoff": cutoff,
        "provenance": _provenance(args, top, p),
    }
    _emit(args, _dump_json(doc), f"bond-profile n={top.n} chi_max={doc['max_bond']}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    n = args.n if args.n is not None else 4
    if not 2 <= n <= oracle.MAX_QUBITS:
        raise CLIError(f"oracle-check needs 2 <= n <= {oracle.MAX_QUBITS}")
    rng = np.random.default_rng(args.seed)
    group = normalize_group(args.group)
    groups = ["U4", "O4"] if group == "O4" else [group]
    count = int(args.samples) if args.samples is not None else 10
    cases = []
    for _ in range(count):
        top = random_topology(n, int(rng.integers(1, 7)), rng, groups)
        obs = "".join(rng.choice(list("IXYZ"), n))
        if set(obs) == {"I"}:
            obs = "Z" + obs[1:]
        bits = "".join(rng.choice(list("01"), n))
        tn = circuit_moment(top, bits, obs, t=args.t)
        ref = oracle.exact_moment_small(top, bits, obs, t=args.t)
        cases.append({"topology": top.to_dict(), "rho": bits, "observable": obs, "tn": tn, "oracle": ref,
                      "abs_diff": abs(tn - ref)})
    worst = max(c["abs_diff"] for c in cases)
    doc = {"cases": cases, "max_abs_diff": worst, "tolerance": ORACLE_TOL, "provenance": _provenance(args)}
    _emit(args, _dump_json(doc), f"oracle-check cases={count} max_abs_diff={worst:.3e}")
    return EXIT_OK if worst <= ORACLE_TOL else EXIT_NUMERIC


COMMANDS = {
    "pgate": cmd_pgate,
    "purities": cmd_purities,
    "haar-purities": cmd_haar_purities,
    "anticoncentrate": cmd_anticoncentrate,
    "entropy-scan": cmd_entropy_scan,
    "mc-compare": cmd_mc_compare,
    "bond-profile": cmd_bond_profile,
    "oracle-check": cmd_oracle_check,
}


def _threads_default() -> int | None:
    raw = os.environ.get("MOMENTNET_THREADS")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        return None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--topology", default="hea", help="hea | qcnn | qcnn-brick | file:PATH")
    common.add_argument("--n", type=int)
    common.add_argument("--layers", help="depth N, range a..b or list a,b,c")
    common.add_argument("--group", default="U4", help="U4 | O4 | FF_SO4")
    common.add_argument("--obs", help="Pauli observable, full (ZIII) or compact (Z1)")
    common.add_argument("--t", type=int, choices=(1, 2), default=2)
    common.add_argument("--cutoff", type=float, help="relative singular-value cutoff")
    common.add_argument("--samples", help="sample count(s), comma separated")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (stdout if omitted)")
    common.add_argument("--threads", type=int, default=_threads_default(), help="worker cap (env MOMENTNET_THREADS)")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--tilt", type=float, default=analysis.DEFAULT_TILT, help="sector tilt for purities")
    common.add_argument("--families", default="Q,E,M", help="entropy region families")
    common.add_argument("--measure", default="vn", help="vn | renyi2")
    common.add_argument("--chi-budget", type=int, default=64, dest="chi_budget")

    parser = argparse.ArgumentParser(prog="momentnet", description="Moment tensor-network experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_VALIDATION
    if args.format is None:
        args.format = "csv" if args.command == "entropy-scan" else "json"
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return COMMANDS[args.command](args)
    except (NumericError, FloatingPointError, np.linalg.LinAlgError, SamplingError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CLIError, TopologyError, DimensionError, BasisError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
