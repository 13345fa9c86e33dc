"""Command-line surface: evaluate functionals on JSON-described bodies, run
position solvers, and execute the verification catalog.

Exit codes: 0 all asserted checks pass, 1 a check failed, 2 usage or parse
error, 3 numerical error. Every emitted record embeds the seed, sample count
and a hash of the effective configuration so it can be re-run standalone.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import bodies, checks, positions, quadrature as quad
from .errors import BodySpecError, CgxError, UnknownCheck

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    seed: int = 20250809
    samples: int = 2**17
    tol: float = 1e-6
    windows: dict = field(default_factory=dict)
    constants: dict = field(default_factory=lambda: dict(checks.DEFAULT_CONSTANTS))
    out: str | None = None
    threads: int = 1

    def hash(self) -> str:
        payload = {
            "seed": self.seed,
            "samples": self.samples,
            "tol": self.tol,
            "windows": self.windows,
            "constants": self.constants,
            "windows_version": checks.WINDOWS_VERSION,
        }
        canon = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(canon).hexdigest()[:16]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def report_record(command, config: RunConfig, records, wall_time):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config_hash": config.hash(),
        "seed": config.seed,
        "records": _jsonable(records),
        "wall_time": wall_time,
    }


def _write_out(config, payload):
    if config.out:
        with open(config.out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)


def _load_body(path):
    try:
        with open(path) as fh:
            node = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BodySpecError(f"cannot parse body file {path}: {exc}") from exc
    return bodies.body_from_json(node)


def _rule_for(body, config):
    kind = "product_lowdim" if body.dim <= 3 else "antithetic"
    return quad.sphere_rule(body.dim, config.samples, config.seed, kind)


# -- eval --------------------------------------------------------------------------


def cmd_eval(args, config: RunConfig) -> int:
    body = _load_body(args.body)
    rule = _rule_for(body, config)
    q = args.quantity
    rec = {"quantity": q, "dim": body.dim, "seed": config.seed, "samples": config.samples}
    if q == "volume":
        est = quad.volume(body, rule)
        rec.update(value=est.value, std_error=est.std_error)
    elif q == "Mp":
        rec.update(value=quad.mean_norm(body, args.p, rule), p=args.p)
    elif q == "MRp":
        rec.update(value=quad.mean_radius(body, args.p, rule), p=args.p)
    elif q == "Mstar_p":
        rec.update(value=quad.mean_width(body, args.p, rule), p=args.p)
    elif q == "LK":
        rec.update(value=positions.isotropic_constant(body, rule))
    elif q == "dmv":
        if not args.body2:
            raise BodySpecError("dmv needs --body2")
        other = _load_body(args.body2)
        est = quad.dual_mixed_volume(body, other, args.p, rule)
        rec.update(value=est.value, std_error=est.std_error, p=args.p)
    elif q == "section":
        frame = quad.grassmann_sample(body.dim, args.m, 1, config.seed)[0]
        sub = quad.sphere_rule(
            args.m, min(config.samples, 2**12), config.seed,
            "product_lowdim" if args.m <= 3 else "antithetic",
        )
        est = quad.section_volume_est(body, frame, sub)
        rec.update(value=est.value, std_error=est.std_error, m=args.m,
                   frame=frame.columns.tolist())
    elif q == "moment":
        theta = np.zeros(body.dim)
        theta[0] = 1.0
        if args.theta:
            theta = bodies.unit_vector(np.array(json.loads(args.theta), dtype=float))
        est = quad.moment_p_est(body, theta, args.p, rule)
        rec.update(value=est.value, std_error=est.std_error, p=args.p, theta=theta.tolist())
    else:
        raise BodySpecError(f"unknown quantity {q!r}")
    payload = report_record(f"eval {q}", config, [rec], 0.0)
    se = rec.get("std_error")
    print(f"{q} = {rec['value']:.10g}" + (f" +- {se:.3g}" if se else ""))
    _write_out(config, payload)
    return 0


# -- position ----------------------------------------------------------------------


def cmd_position(args, config: RunConfig) -> int:
    kind = args.kind
    rec = {"kind": kind, "seed": config.seed}
    if kind == "lewis":
        if not args.atoms:
            raise BodySpecError("lewis needs --atoms FILE with p, weights, vectors")
        with open(args.atoms) as fh:
            data = json.load(fh)
        res, measure = positions.lewis_position(
            np.array(data["weights"], dtype=float),
            np.array(data["vectors"], dtype=float),
            float(data["p"]),
            tol=min(config.tol, 1e-8),
        )
        rec.update(matrix=res.matrix.tolist(), residual=res.residual,
                   iterations=res.iterations, trace=res.trace,
                   weight_sum=measure.weight_sum())
    else:
        body = _load_body(args.body)
        rule = _rule_for(body, config)
        if kind == "isotropic":
            res, lk = positions.isotropic_position(
                body, tol=config.tol, rule=rule, seed=config.seed
            )
            rec.update(L_K=lk)
        elif kind == "john":
            res = positions.john_position(body, seed=config.seed)
        elif kind == "lowner":
            res = positions.lowner_position(body, seed=config.seed)
        elif kind == "minsurf":
            res = positions.minimal_surface_position(body, tol=config.tol, seed=config.seed)
        else:
            raise BodySpecError(f"unknown position kind {kind!r}")
        rec.update(matrix=res.matrix.tolist(), residual=res.residual,
                   iterations=res.iterations, trace=res.trace)
    payload = report_record(f"position {kind}", config, [rec], 0.0)
    print(f"{kind}: residual {rec['residual']:.3e} after {rec['iterations']} iterations")
    for row in rec["matrix"]:
        print("  " + "  ".join(f"{v: .8f}" for v in row))
    if "L_K" in rec:
        print(f"L_K = {rec['L_K']:.8f}")
    _write_out(config, payload)
    return 0


# -- verify ------------------------------------------------------------------------


def _parse_overrides(pairs):
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise BodySpecError(f"override {pair!r} is not KEY=VALUE")
        key, raw = pair.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _apply_config_defaults(check_id, params, config: RunConfig):
    merged = dict(params)
    merged.setdefault("seed", config.seed)
    if check_id in config.windows:
        merged.setdefault("window", config.windows[check_id])
    if check_id in ("check_theorem2", "check_main2_sandwich"):
        merged.setdefault("script_l", config.constants.get("script_l"))
    if check_id == "check_theorem4":
        merged.setdefault("script_l_2k", config.constants.get("script_l_2k"))
    return merged


def _run_one(check_id, params, config):
    return checks.run_check(check_id, **_apply_config_defaults(check_id, params, config))


def cmd_verify(args, config: RunConfig) -> int:
    if args.list:
        for cid, desc in checks.list_checks().items():
            tag = " [report only]" if checks.CHECKS[cid]["report_only"] else ""
            print(f"{cid:28s} {desc}{tag}")
        return 0
    jobs = []
    if args.check_id:
        jobs.append((args.check_id, _parse_overrides(args.param)))
    elif args.suite:
        if args.suite not in checks.SUITES:
            raise UnknownCheck(f"unknown suite {args.suite!r}")
        jobs = [(cid, dict(p)) for cid, p in checks.SUITES[args.suite]]
    else:
        raise BodySpecError("verify needs a check id, --suite, or --list")

    t0 = time.time()
    if config.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            records = list(
                pool.map(lambda job: _run_one(job[0], job[1], config), jobs)
            )
    else:
        records = [_run_one(cid, params, config) for cid, params in jobs]
    records.sort(key=lambda r: (r.check_id, json.dumps(_jsonable(r.params), sort_keys=True)))

    failed = [r for r in records if r.verdict == "fail"]
    rows = []
    for rec in records:
        rows.append({**rec.canonical(), "runtime": rec.runtime})
        print(f"{rec.verdict.upper():12s} {rec.check_id:26s} "
              + " ".join(f"{k}={_fmt(v)}" for k, v in list(rec.observed.items())[:3]))
    payload = report_record("verify", config, rows, time.time() - t0)
    _write_out(config, payload)
    if config.out and args.suite:
        _write_suite_files(config.out, rows)
    print(f"{len(records) - len(failed)}/{len(records)} checks passed")
    return 1 if failed else 0


def _fmt(v):
    return f"{v:.4g}" if isinstance(v, float) else str(v)


def _write_suite_files(out_path, rows):
    base = out_path[:-5] if out_path.endswith(".json") else out_path
    with open(base + ".jsonl", "w") as fh:
        for row in rows:
            fh.write(json.dumps(_jsonable(row), sort_keys=True) + "\n")
    with open(base + ".csv", "w") as fh:
        fh.write("check_id,verdict,runtime,observed\n")
        for row in rows:
            obs = ";".join(f"{k}={_fmt(v)}" for k, v in row["observed"].items())
            fh.write(f"{row['check_id']},{row['verdict']},{row['runtime']:.3f},\"{obs}\"\n")


# -- entry point --------------------------------------------------------------------


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    sup = argparse.SUPPRESS
    common.add_argument("--seed", type=int, default=sup, help="base RNG seed")
    common.add_argument("--samples", type=int, default=sup, help="sphere rule size")
    common.add_argument("--tol", type=float, default=sup, help="solver tolerance")
    common.add_argument("--out", type=str, default=sup, help="JSON report path")
    common.add_argument("--config", type=str, default=sup, help="JSON config file")
    return common


def build_parser():
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="cgx",
        parents=[common],
        description="Star/convex body functionals, position solvers, and the"
        " reproducible verification catalog.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", parents=[common],
                            help="evaluate a scalar functional of a body")
    p_eval.add_argument("--body", required=True, help="body-spec JSON file")
    p_eval.add_argument(
        "--quantity", required=True,
        choices=["volume", "Mp", "MRp", "Mstar_p", "LK", "dmv", "section", "moment"],
    )
    p_eval.add_argument("--p", type=float, default=2.0)
    p_eval.add_argument("--m", type=int, default=1, help="section rank")
    p_eval.add_argument("--body2", type=str, default=None)
    p_eval.add_argument("--theta", type=str, default=None, help="JSON direction")
    p_eval.set_defaults(fn=cmd_eval)

    p_pos = sub.add_parser("position", parents=[common], help="run a position solver")
    p_pos.add_argument("--body", help="body-spec JSON file")
    p_pos.add_argument(
        "--kind", required=True,
        choices=["isotropic", "john", "lowner", "lewis", "minsurf"],
    )
    p_pos.add_argument("--atoms", type=str, default=None, help="lewis atom data JSON")
    p_pos.set_defaults(fn=cmd_position)

    p_ver = sub.add_parser("verify", parents=[common], help="run verification checks")
    p_ver.add_argument("check_id", nargs="?", default=None)
    p_ver.add_argument("--suite", type=str, default=None,
                       choices=sorted(checks.SUITES))
    p_ver.add_argument("--list", action="store_true", help="list the catalog")
    p_ver.add_argument("--param", action="append", help="KEY=VALUE override")
    p_ver.set_defaults(fn=cmd_verify)
    return parser


def load_config(args) -> RunConfig:
    """Effective configuration: CLI flag > config file > built-in default."""
    config = RunConfig()
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        with open(cfg_path) as fh:
            file_cfg = json.load(fh)
        for key in ("seed", "samples", "tol", "out"):
            if key in file_cfg:
                setattr(config, key, file_cfg[key])
        config.windows.update(file_cfg.get("windows", {}))
        config.constants.update(file_cfg.get("constants", {}))
    for key in ("seed", "samples", "tol", "out"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(config, key, val)
    config.threads = max(1, int(os.environ.get("CGX_THREADS", "1")))
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        config = load_config(args)
        return args.fn(args, config)
    except (BodySpecError, UnknownCheck) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CgxError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
