"""Command-line front end with JSON input and deterministic reports.

Subcommands: classify, commute, strong-commute, stochastic, prodsys, dilate.
Exit codes: 0 when the queried property holds or the build verifies, 1 when
the property is false (the report carries a witness), 2 for malformed input
or an internal verification failure.

Channel files use {"dim": n, "kraus": [matrix, ...]} or {"dim": n, "choi":
matrix} with complex entries encoded as [re, im]; stochastic files use
{"matrix": [[...]]} with real entries. Reports quote every tolerance they
were tested against, and floats are rounded to 12 significant digits so the
output is byte-stable for identical inputs on one platform. The default
tolerance can be overridden with the CPDILATE_TOL environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

import numpy as np

from . import chan, stochastic
from .dilation import (
    GramNotPSDError,
    build_big_space,
    build_dilation_space,
    lift_operators,
    minimality_check,
    verify_e_dilation,
)
from .prodsys import GridPoint, build_product_system, verify_representation
from .strongcomm import (
    NonCommutingError,
    StrongCommutationCertificate,
    strong_commutation_certificate,
    verify_certificate,
)

DEFAULT_TOL = 1e-9
DEFAULT_ZERO_TOL = 1e-12


class InputError(ValueError):
    pass


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _emit(report: dict, fmt: str) -> None:
    report = _round_floats(report)
    if fmt == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        for key in sorted(report):
            print(f"{key}: {json.dumps(_round_floats(report[key]), sort_keys=True)}")


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _load_channel(path: str, tol: float) -> chan.KrausFamily:
    data = _load_json(path)
    if "matrix" in data:
        raise InputError(f"{path}: stochastic matrix given where a channel was expected")
    try:
        return chan.channel_from_json(data, tol)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_real_matrix(path: str):
    data = _load_json(path)
    if "matrix" not in data:
        raise InputError(f"{path}: expected a 'matrix' field")
    m = np.asarray(data["matrix"], dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{path}: 'matrix' must be square")
    return m


def _is_stochastic_file(path: str) -> bool:
    return "matrix" in _load_json(path)


def _grid(values) -> GridPoint:
    return GridPoint(int(values[0]), int(values[1]))


def cmd_classify(args) -> tuple[int, dict]:
    fam = _load_channel(args.channel, args.tol)
    rep = chan.classify(fam, args.tol)
    return 0, {
        "command": "classify",
        "is_cp": rep.is_cp,
        "is_unital": rep.is_unital,
        "is_contractive": rep.is_contractive,
        "min_choi_eigenvalue": rep.min_choi_eigenvalue,
        "unitality_residual": rep.unitality_residual,
        "tol": rep.tol,
    }


def cmd_commute(args) -> tuple[int, dict]:
    from .strongcomm import check_commute

    a = _load_channel(args.channels[0], args.tol)
    b = _load_channel(args.channels[1], args.tol)
    rep = check_commute(a, b, args.tol)
    return (0 if rep.commute else 1), {
        "command": "commute",
        "commute": rep.commute,
        "residual": rep.residual,
        "tol": rep.tol,
    }


def _diagonal_strong_commute(args, p, q) -> tuple[int, dict]:
    rep = stochastic.strongly_commute_diagonal(p, q, args.tol, args.zero_tol)
    report = {
        "command": "strong-commute",
        "route": "diagonal",
        "strongly_commute": rep.strongly_commute,
        "commute": rep.commute,
        "commutation_residual": rep.commutation_residual,
        "card_holds": rep.card.holds,
        "witnesses": [list(w) for w in rep.card.witnesses],
        "near_zero_warnings": [list(w) for w in rep.card.near_zero_entries],
        "tol": rep.tol,
        "zero_tol": rep.card.zero_tol,
    }
    return (0 if rep.strongly_commute else 1), report


def cmd_strong_commute(args) -> tuple[int, dict]:
    first, second = args.channels
    if _is_stochastic_file(first) != _is_stochastic_file(second):
        raise InputError("cannot mix a stochastic matrix with a channel")
    if _is_stochastic_file(first):
        return _diagonal_strong_commute(
            args, _load_real_matrix(first), _load_real_matrix(second)
        )
    theta = _load_channel(first, args.tol)
    phi = _load_channel(second, args.tol)
    try:
        cert = strong_commutation_certificate(theta, phi, args.tol)
    except NonCommutingError as exc:
        return 1, {
            "command": "strong-commute",
            "route": "certificate",
            "strongly_commute": False,
            "error": str(exc),
            "tol": args.tol,
        }
    return 0, {
        "command": "strong-commute",
        "route": "certificate",
        "strongly_commute": True,
        "m": cert.m,
        "n": cert.n,
        "u": chan.matrix_to_json(cert.u),
        "unitarity_residual": cert.unitarity_residual,
        "intertwining_residual": cert.intertwining_residual,
        "tol": args.tol,
    }


def cmd_stochastic(args) -> tuple[int, dict]:
    mats = [_load_real_matrix(p) for p in args.matrices]
    for path, m in zip(args.matrices, mats):
        if not stochastic.validate(m, args.tol):
            raise InputError(f"{path}: rows do not sum to 1 within {args.tol}")
    report: dict = {"command": "stochastic", "tol": args.tol, "zero_tol": args.zero_tol}
    code = 0
    if args.semigroup is not None:
        report["semigroup_t"] = args.semigroup
        report["semigroup"] = [
            [float(x) for x in row] for row in stochastic.semigroup_at(mats[0], args.semigroup)
        ]
    if args.irreducible:
        flags = [stochastic.is_irreducible(m, args.zero_tol) for m in mats]
        report["irreducible"] = flags
        if not all(flags):
            code = 1
    if args.check_card:
        if len(mats) != 2:
            raise InputError("--check-card needs exactly two matrices")
        card = stochastic.card_criterion(mats[0], mats[1], args.zero_tol)
        report["card_holds"] = card.holds
        report["witnesses"] = [list(w) for w in card.witnesses]
        report["near_zero_warnings"] = [list(w) for w in card.near_zero_entries]
        if not card.holds:
            code = 1
    if args.semigroup is None and not args.irreducible and not args.check_card:
        if len(mats) != 2:
            raise InputError("strong commutation check needs exactly two matrices")
        return _diagonal_strong_commute(args, mats[0], mats[1])
    return code, report


def cmd_prodsys(args) -> tuple[int, dict]:
    theta = _load_channel(args.channels[0], args.tol)
    phi = _load_channel(args.channels[1], args.tol)
    cert = strong_commutation_certificate(theta, phi, args.tol)
    system = build_product_system(theta, phi, cert, args.tol)
    rep = verify_representation(system, _grid(args.horizon), args.verify_tol, args.cap)
    report = {
        "command": "prodsys",
        "horizon": [rep.horizon.a, rep.horizon.b],
        "identity_residual": rep.identity_residual,
        "homomorphism_residual": rep.homomorphism_residual,
        "coisometry_residual": rep.coisometry_residual,
        "unital": rep.unital,
        "passed": rep.passed,
        "tol": rep.tol,
    }
    return (0 if rep.passed else 1), report


def _load_dilate_inputs(args):
    """Two channel files, or one combined {"theta", "phi", "certificate"?} file."""
    if len(args.channels) == 2:
        return (
            _load_channel(args.channels[0], args.tol),
            _load_channel(args.channels[1], args.tol),
            None,
        )
    path = args.channels[0]
    data = _load_json(path)
    if "theta" not in data or "phi" not in data:
        raise InputError(f"{path}: a combined file needs 'theta' and 'phi' channels")
    theta = chan.channel_from_json(data["theta"], args.tol)
    phi = chan.channel_from_json(data["phi"], args.tol)
    cert = None
    if "certificate" in data:
        u = chan.matrix_from_json(data["certificate"]["u"])
        supplied = StrongCommutationCertificate(
            m=len(theta), n=len(phi), u=u,
            unitarity_residual=0.0, intertwining_residual=0.0,
        )
        chk = verify_certificate(theta, phi, supplied, args.tol)
        if not chk.passed:
            raise InputError(
                f"{path}: supplied certificate fails verification "
                f"(unitarity {chk.unitarity_residual:.3e}, "
                f"intertwining {chk.intertwining_residual:.3e})"
            )
        cert = StrongCommutationCertificate(
            m=len(theta), n=len(phi), u=u,
            unitarity_residual=chk.unitarity_residual,
            intertwining_residual=chk.intertwining_residual,
        )
    return theta, phi, cert


def cmd_dilate(args) -> tuple[int, dict]:
    if len(args.channels) not in (1, 2):
        raise InputError("dilate takes two channel files or one combined file")
    theta, phi, cert = _load_dilate_inputs(args)
    horizon = _grid(args.horizon)
    margin = _grid(args.margin)
    try:
        if cert is None:
            cert = strong_commutation_certificate(theta, phi, args.tol)
    except NonCommutingError as exc:
        return 1, {"command": "dilate", "error": str(exc), "tol": args.tol}
    system = build_product_system(theta, phi, cert, args.tol)
    big, hat = build_big_space(system, horizon, args.cap)
    dsp = build_dilation_space(big, hat, margin)
    res = lift_operators(dsp, system)
    rep = verify_e_dilation(res, theta, phi, margin, args.verify_tol)
    mini = minimality_check(res)
    report = {
        "command": "dilate",
        "horizon": [horizon.a, horizon.b],
        "margin": [margin.a, margin.b],
        "dimK": dsp.dim_k,
        "gram_min_eig": dsp.gram_min_eig,
        "residuals": {
            "isometry": rep.isometry_residual,
            "coisometry": rep.coisometry_residual,
            "dilation": rep.dilation_residual,
            "semigroup": rep.semigroup_residual,
            "multiplicativity": rep.multiplicativity_residual,
            "rho": rep.rho_residual,
        },
        "p_increase_min_eig": rep.p_increase_min_eig,
        "minimality": {
            "span_dim": mini.span_dim,
            "commutant_dim": mini.commutant_dim,
            "closure_dim": mini.closure_dim,
            "closure_converged": mini.closure_converged,
        },
        "passed": rep.passed and mini.passed,
        "tol": rep.tol,
        "certificate_residuals": {
            "unitarity": cert.unitarity_residual,
            "intertwining": cert.intertwining_residual,
        },
    }
    return (0 if rep.passed and mini.passed else 1), report


def build_parser() -> argparse.ArgumentParser:
    env_tol = float(os.environ.get("CPDILATE_TOL", DEFAULT_TOL))
    parser = argparse.ArgumentParser(
        prog="cpdilate",
        description="CP-map calculus, strong commutation and finite-horizon dilations",
    )
    parser.add_argument("--tol", type=float, default=env_tol, help="input/predicate tolerance")
    parser.add_argument(
        "--zero-tol", type=float, default=DEFAULT_ZERO_TOL, help="nonzero-pattern threshold"
    )
    parser.add_argument("--format", choices=["json", "text"], default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="CP / unital / contractive report for one channel")
    p.add_argument("channel")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("commute", help="do two channels commute")
    p.add_argument("channels", nargs=2)
    p.set_defaults(func=cmd_commute)

    p = sub.add_parser(
        "strong-commute",
        help="strong-commutation certificate (channels) or criterion (stochastic)",
    )
    p.add_argument("channels", nargs=2)
    p.set_defaults(func=cmd_strong_commute)

    p = sub.add_parser("stochastic", help="stochastic-matrix checks")
    p.add_argument("matrices", nargs="+")
    p.add_argument("--check-card", action="store_true")
    p.add_argument("--irreducible", action="store_true")
    p.add_argument("--semigroup", type=float, default=None, metavar="T")
    p.set_defaults(func=cmd_stochastic)

    p = sub.add_parser("prodsys", help="build and verify the twisted product system")
    p.add_argument("action", choices=["verify"])
    p.add_argument("channels", nargs=2)
    p.add_argument("--horizon", nargs=2, type=int, required=True, metavar=("A", "B"))
    p.add_argument("--verify-tol", type=float, default=1e-8)
    p.add_argument("--cap", type=int, default=4096)
    p.set_defaults(func=cmd_prodsys)

    p = sub.add_parser("dilate", help="build and verify the finite-horizon dilation")
    p.add_argument("channels", nargs="+", help="two channel files or one combined file")
    p.add_argument("--horizon", nargs=2, type=int, required=True, metavar=("A", "B"))
    p.add_argument("--margin", nargs=2, type=int, required=True, metavar=("A", "B"))
    p.add_argument("--verify-tol", type=float, default=1e-8)
    p.add_argument("--cap", type=int, default=8192)
    p.set_defaults(func=cmd_dilate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol <= 0:
        parser.error("--tol must be positive")
    try:
        code, report = args.func(args)
    except (InputError, ValueError) as exc:
        _emit({"error": str(exc)}, args.format)
        return 2
    except (GramNotPSDError, RuntimeError) as exc:
        _emit({"error": f"internal verification failure: {exc}"}, args.format)
        return 2
    _emit(report, args.format)
    return code


if __name__ == "__main__":
    sys.exit(main())
