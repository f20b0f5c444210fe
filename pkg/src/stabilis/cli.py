"""Command-line driver.

    stabilis <subcommand> --in FILE [--out FILE] [--seed N]
             [--mode strict|flexible] [--budget N] [--tol X]

Subcommands: group, restrict, cone, perturb, stabilize, verify, sweep.
Exit codes: 0 ok, 2 parse/validation error, 3 search budget exhausted,
4 verification failure.  STABILIS_CAP overrides the group-order cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from . import jsonio
from .cones import balance_pair, conductor_vector, member
from .engine import (
    hnn_matching_defect,
    matching_defect,
    stabilize,
    verify_amalgam,
    verify_hnn,
)
from .errors import BudgetExceeded, SpecError, StabilisError, VerificationError
from .groups import GroupAction, classify, coset_action
from .perm import Perm
from .restriction import (
    Inclusion,
    compute_restriction_data,
    extension_property,
    full_support_witness,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_VERIFY = 4


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc


def _emit(payload, out_path):
    text = jsonio.canonical_dumps(payload)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_group(args):
    group = jsonio.group_from_json(_read_json(args.infile))
    classes = []
    for cls_ in group.subgroup_classes:
        classes.append(
            {
                "index": cls_.index,
                "subgroup_order": cls_.subgroup_order,
                "class_size": len(cls_.members),
                "action_degree": cls_.action_degree,
                "representative": sorted(cls_.representative),
            }
        )
    _emit(
        {
            "order": group.order,
            "identity": group.identity,
            "transitive_types": classes,
        },
        args.outfile,
    )
    return EXIT_OK


def cmd_restrict(args):
    inc = jsonio.inclusion_from_json(_read_json(args.infile))
    data = compute_restriction_data(inc)
    ext = extension_property(inc)
    witness = full_support_witness(inc)
    _emit(
        {
            "cone_generators": [list(v.coeffs) for v in data.cone_generators],
            "directions": [list(d) for d in data.directions],
            "normal": data.normal,
            "extension_property": ext.holds,
            "missing_class": ext.missing_class,
            "full_support_witness": list(witness.coeffs),
        },
        args.outfile,
    )
    return EXIT_OK


def cmd_cone(args):
    data = _read_json(args.infile)
    cone = jsonio.cone_from_json(data)
    w0, level = conductor_vector(cone)
    out = {"conductor": list(w0), "relation_level": level}
    if "member" in data:
        results = []
        for w in data["member"]:
            res = member(cone, tuple(w), budget=args.budget)
            results.append(
                {
                    "vector": list(w),
                    "status": res.status,
                    "certificate": list(res.certificate) if res.certificate else None,
                }
            )
            if res.status == "budget":
                _emit(out | {"member": results}, args.outfile)
                raise BudgetExceeded("membership search budget exhausted")
        out["member"] = results
    if "balance" in data:
        xi1, xi2 = data["balance"]
        bal = balance_pair(cone, tuple(xi1), tuple(xi2), budget=args.budget)
        out["balance"] = {
            "eta1": list(bal.eta1),
            "eta2": list(bal.eta2),
            "cert1": list(bal.cert1),
            "cert2": list(bal.cert2),
        }
    _emit(out, args.outfile)
    return EXIT_OK


def cmd_perturb(args):
    data = _read_json(args.infile)
    if args.seed is not None:
        data.setdefault("perturb", {"k": 1})["seed"] = args.seed
    scenario = jsonio.scenario_from_json(data)
    if scenario.kind == "amalgam":
        defect = matching_defect(scenario.spec, scenario.phi1, scenario.phi2)
        payload = {
            "kind": "amalgam",
            "defect": jsonio.frac_str(defect),
            "phi1": jsonio.action_to_json(scenario.phi1),
            "phi2": jsonio.action_to_json(scenario.phi2),
        }
    else:
        defect = hnn_matching_defect(scenario.spec, scenario.phi1, scenario.tau)
        payload = {
            "kind": "hnn",
            "defect": jsonio.frac_str(defect),
            "phi": jsonio.action_to_json(scenario.phi1),
            "tau": list(scenario.tau.image),
        }
    _emit(payload, args.outfile)
    return EXIT_OK


def _run_scenario(scenario, mode, budget):
    if scenario.kind == "amalgam":
        return stabilize(scenario.spec, mode, scenario.phi1, scenario.phi2)
    return stabilize(scenario.spec, mode, scenario.phi1, scenario.tau)


def cmd_stabilize(args):
    data = _read_json(args.infile)
    if args.seed is not None and "perturb" in data:
        data["perturb"]["seed"] = args.seed
    scenario = jsonio.scenario_from_json(data)
    mode = args.mode or scenario.mode
    started = time.monotonic()
    result = _run_scenario(scenario, mode, args.budget)
    elapsed_ms = (time.monotonic() - started) * 1000
    report = jsonio.report_from_result(scenario, result, wall_time_ms=elapsed_ms)
    _emit(report, args.outfile)
    return EXIT_OK


def cmd_verify(args):
    report = _read_json(args.infile)
    scenario = jsonio.scenario_from_json(report["scenario"])
    spec = scenario.spec
    outputs = report["outputs"]
    if report["kind"] == "amalgam":
        psi1 = GroupAction(spec.g1, [Perm(i) for i in outputs["psi1"]["images"]])
        psi2 = GroupAction(spec.g2, [Perm(i) for i in outputs["psi2"]["images"]])
        ok, witness = verify_amalgam(spec, psi1, psi2)
    else:
        psi_g = GroupAction(spec.g, [Perm(i) for i in outputs["psi_g"]["images"]])
        psi_t = Perm(outputs["psi_t"])
        ok, witness = verify_hnn(spec, psi_g, psi_t)
    if not ok:
        raise VerificationError(f"relation fails at subgroup element {witness}")
    _emit({"verified": True}, args.outfile)
    return EXIT_OK


def cmd_sweep(args):
    data = _read_json(args.infile)
    seed = args.seed if args.seed is not None else data.get("perturb", {}).get("seed")
    if seed is None:
        raise SpecError("sweep needs a seed (--seed or scenario perturb.seed)")
    base = jsonio.scenario_from_json({k: v for k, v in data.items() if k != "perturb"})
    degree = base.phi1.degree
    max_k = args.max_k if args.max_k is not None else max(1, degree // 8)
    mode = args.mode or base.mode

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["k", "defect", "distance", "size_ratio"])
    for k in range(max_k + 1):
        step = dict(data)
        step["perturb"] = {"k": k, "seed": f"{seed}:{k}"}
        scenario = jsonio.scenario_from_json(step)
        result = _run_scenario(scenario, mode, args.budget)
        writer.writerow(
            [
                k,
                str(result.input_defect),
                str(result.output_distance),
                str(result.size_ratio),
            ]
        )
    text = buf.getvalue()
    if args.outfile:
        with open(args.outfile, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stabilis",
        description="Repair almost-actions of amalgams and HNN extensions "
        "over finite groups; certify the bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in [
        ("group", cmd_group),
        ("restrict", cmd_restrict),
        ("cone", cmd_cone),
        ("perturb", cmd_perturb),
        ("stabilize", cmd_stabilize),
        ("verify", cmd_verify),
        ("sweep", cmd_sweep),
    ]:
        p = sub.add_parser(name)
        p.add_argument("--in", dest="infile", required=True)
        p.add_argument("--out", dest="outfile", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--mode", choices=["strict", "flexible"], default=None)
        p.add_argument("--budget", type=int, default=200_000)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-k", dest="max_k", type=int, default=None)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (SpecError, StabilisError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
