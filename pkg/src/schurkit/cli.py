"""Command-line front-end: JSON in, plaintext summary and JSON report out.

Exit codes: 0 success, 2 domain error (reported in the JSON), 1 I/O or parse failure.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import matcore
from .errors import ParseError, SchurKitError
from .jsonio import decode_cmatrix, dumps, encode_cmatrix, loads
from .matcore import DEFAULT_TOL, Tolerances

EXIT_OK, EXIT_IO, EXIT_DOMAIN = 0, 1, 2


@dataclass
class Report:
    command: str
    inputs_digest: str
    results: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, "inputs_digest": self.inputs_digest, "results": self.results,
                "warnings": list(self.warnings), "tolerances": self.tolerances}

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"


class _InputError(Exception):
    """Unreadable or malformed input; maps to exit code 1."""


def _read(path: str) -> tuple[bytes, object]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return raw, loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise _InputError(f"{path}: not UTF-8 text") from exc
    except ParseError as exc:
        raise _InputError(f"{path}: {exc}") from exc


def _parsed(path: str, what: str, fn):
    """Apply a schema decoder, turning malformed content into an input error."""
    try:
        return fn()
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, SchurKitError):
            raise
        raise _InputError(f"{path}: malformed {what}: {exc}") from exc


def _digest(blobs: list[bytes], extra: dict) -> str:
    h = hashlib.sha256()
    for b in blobs:
        h.update(hashlib.sha256(b).digest())
    h.update(dumps(extra).encode())
    return "sha256:" + h.hexdigest()


def _real(x: float) -> float:
    return float(x)


def _mat(M) -> dict:
    return encode_cmatrix(np.asarray(M, dtype=complex))


def _coeff_list(obj) -> list:
    if isinstance(obj, dict) and "coeffs" in obj:
        return [decode_cmatrix(c) for c in obj["coeffs"]]
    raise ValueError('expected {"coeffs": [...]}')


def _load_problem(path: str, tol: Tolerances):
    from .cfsolver import SchurProblem
    raw, obj = _read(path)
    mats = _parsed(path, "problem", lambda: _coeff_list(obj))
    return raw, _parsed(path, "problem", lambda: SchurProblem(tuple(mats), tol))


# ---- commands -------------------------------------------------------------

def cmd_validate(args, tol):
    from .cfsolver import validate
    raw, p = _load_problem(args.path, tol)
    v = validate(p)
    res = {"solvable": bool(v.solvable), "sigma_max": _real(v.sigma_max), "N": p.N,
           "shape": list(p.shape)}
    warns = []
    if v.solvable and v.sigma_max > 1.0 - tol.contraction_slack:
        warns.append("boundary problem: sigma_max is 1 within slack")
    summary = f"solvable={str(v.solvable).lower()} sigma_max={v.sigma_max:.12g}"
    return [raw], res, warns, summary


def cmd_uniqueness(args, tol):
    from .cfsolver import uniqueness
    raw, p = _load_problem(args.path, tol)
    u = uniqueness(p)
    res = {"unique": u.unique, "M_side_zero": u.M_side_zero, "N_side_zero": u.N_side_zero,
           "witness_norms": [_real(w) for w in u.witness_norms], "terminating_index": u.terminating_index}
    summary = (f"unique={str(u.unique).lower()} M_side_zero={str(u.M_side_zero).lower()} "
               f"N_side_zero={str(u.N_side_zero).lower()} terminating_index={u.terminating_index}")
    return [raw], res, [], summary


def cmd_central(args, tol):
    from .cfsolver import central_solution, uniqueness
    raw, p = _load_problem(args.path, tol)
    K = p.N if args.order is None else args.order
    s = central_solution(p, K)
    u = uniqueness(p)
    warns = []
    if u.unique:
        warns.append("the problem has a unique solution; the central solution is that solution")
    res = {"order": K, "series": s.to_json(), "unique": u.unique}
    if s.shape == (1, 1):
        summary = "coeffs " + " ".join(_fmt(c) for c in s.coeffs[:, 0, 0])
    else:
        summary = f"central solution to order {K}, coefficient shape {s.shape[0]}x{s.shape[1]}"
    return [raw], res, warns, summary


def cmd_schur_params(args, tol):
    from .schur import operator_schur_params
    from .series import MatSeries
    raw, obj = _read(args.path)
    mats = _parsed(args.path, "coefficients", lambda: _coeff_list(obj))
    theta = _parsed(args.path, "coefficients", lambda: MatSeries.from_list(mats))
    N = theta.order if args.levels is None else args.levels
    cs = operator_schur_params(theta, N, tol)
    res = {"choice_sequence": cs.to_json(),
           "norms": [_real(matcore.opnorm(g)) for g in cs.gammas],
           "terminated_at": cs.terminated_at}
    summary = "norms " + " ".join(f"{matcore.opnorm(g):.12g}" for g in cs.gammas)
    if cs.terminated_at is not None:
        summary += f" (terminated at {cs.terminated_at})"
    return [raw], res, [], summary


def _subspace(obj, ambient: int):
    from .shorted import Subspace
    if isinstance(obj, dict) and "indices" in obj:
        return Subspace.coordinates(ambient, [int(i) for i in obj["indices"]])
    M = decode_cmatrix(obj["basis"] if isinstance(obj, dict) and "basis" in obj else obj)
    return Subspace.span(M)


def cmd_shorted(args, tol):
    from .shorted import shorted_operator
    rawS, objS = _read(args.S)
    rawK, objK = _read(args.K)
    S = _parsed(args.S, "matrix", lambda: decode_cmatrix(objS))
    K = _parsed(args.K, "subspace", lambda: _subspace(objK, S.shape[0]))
    r = shorted_operator(S, K, tol)
    res = {"full": _mat(r.full), "compressed": _mat(r.compressed), "numerical_rank": r.numerical_rank,
           "witness_norm": _real(matcore.opnorm(r.compressed)),
           "zero": bool(matcore.opnorm(r.compressed) <= tol.match_tol)}
    summary = f"rank={r.numerical_rank} norm={matcore.opnorm(r.compressed):.12g}"
    return [rawS, rawK], res, [], summary


def _load_colligation(args, tol):
    from .colligation import Colligation, random_colligation
    if args.random:
        try:
            m, h = (int(t) for t in args.random.split(","))
        except ValueError as exc:
            raise _InputError("--random expects m,h") from exc
        seed = int(os.environ.get("SCHURKIT_SEED", "0"))
        col = random_colligation(m, h, seed, tol)
        return dumps({"random": [m, h], "seed": seed}).encode(), col
    if not args.path:
        raise _InputError("colligation needs a JSON path or --random m,h")
    raw, obj = _read(args.path)
    return raw, _parsed(args.path, "colligation", lambda: Colligation.from_json(obj, tol))


def cmd_colligation(args, tol):
    from .colligation import associated_system, simplicity_check, transfer_coeffs, verify_main1
    raw, col = _load_colligation(args, tol)
    warns = []
    res: dict = {"m": col.m, "h": col.h}
    if args.verify == "simplicity":
        s = simplicity_check(col, tol)
        res.update(simple=s.simple, cnu_defect_dim=s.cnu_defect_dim, rank=s.rank)
        summary = f"simple={str(s.simple).lower()} cnu_defect_dim={s.cnu_defect_dim}"
    elif args.verify == "main1":
        r = verify_main1(col, args.nmax, tol)
        if r.skipped:
            warns.append("colligation is not simple; identity check skipped")
            res.update(skipped=True)
            summary = "skipped (not simple)"
        else:
            res.update(skipped=False, max_residual_M=_real(r.max_residual_M), max_residual_N=_real(r.max_residual_N),
                       residuals_M=[_real(x) for x in r.residuals_M], residuals_N=[_real(x) for x in r.residuals_N])
            summary = f"max_residual_M={r.max_residual_M:.3e} max_residual_N={r.max_residual_N:.3e}"
    else:
        a = associated_system(col, args.order, tol)
        res.update(residual=_real(a.residual), gamma1_residual=_real(a.gamma1_residual),
                   theta1_constant=a.theta1_constant, theta1_unitary=a.theta1_unitary,
                   zeta_simple=a.zeta_simple, unitarity_residual=_real(a.unitarity_residual),
                   zeta=a.zeta.to_json() if a.zeta is not None else None,
                   transfer=transfer_coeffs(a.zeta, args.order).to_json() if a.zeta is not None else None)
        if not (a.theta1_constant and not a.theta1_unitary):
            warns.append("Θ_1 is not a non-unitary constant; the realization was verified numerically only")
        summary = f"residual={a.residual:.3e} zeta_state_dim={a.zeta.h if a.zeta is not None else 'n/a'}"
    return [raw], res, warns, summary


def _load_choice_sequence(path: str, tol: Tolerances):
    from .schur import ChoiceSequence, operator_schur_params
    from .series import MatSeries
    raw, obj = _read(path)
    if isinstance(obj, dict) and "gammas" in obj:
        return raw, _parsed(path, "choice sequence", lambda: ChoiceSequence.from_json(obj, tol))
    mats = _parsed(path, "coefficients", lambda: _coeff_list(obj))
    theta = _parsed(path, "coefficients", lambda: MatSeries.from_list(mats))
    return raw, operator_schur_params(theta, None, tol)


def cmd_limits(args, tol):
    from .toeplitz import limit_diagnostics
    raw, cs = _load_choice_sequence(args.path, tol)
    d = limit_diagnostics(cs, args.nmax, tol)
    res = {"M_sequence_norms": [_real(matcore.opnorm(x)) for x in d.M_sequence],
           "N_sequence_norms": [_real(matcore.opnorm(x)) for x in d.N_sequence],
           "M_limit_est": _mat(d.M_limit_est), "N_limit_est": _mat(d.N_limit_est),
           "observable_at_truncation": d.observable, "controllable_at_truncation": d.controllable,
           "at_truncation": d.at_truncation}
    summary = (f"observable_at_truncation={str(d.observable).lower()} "
               f"controllable_at_truncation={str(d.controllable).lower()} "
               f"M_norm={d.M_limit_norm:.3e} N_norm={d.N_limit_norm:.3e} n_max={d.at_truncation}")
    return [raw], res, ["limit verdicts are taken at the truncation level, not the true strong limit"], summary


def _fmt(z: complex) -> str:
    z = complex(z)
    if abs(z.imag) <= 1e-15 * max(1.0, abs(z.real)):
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}j"


COMMANDS = {
    "validate": cmd_validate,
    "uniqueness": cmd_uniqueness,
    "central": cmd_central,
    "schur-params": cmd_schur_params,
    "shorted": cmd_shorted,
    "colligation": cmd_colligation,
    "limits": cmd_limits,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-tol", type=float, default=DEFAULT_TOL.rank_rel_tol)
    common.add_argument("--match-tol", type=float, default=DEFAULT_TOL.match_tol)
    common.add_argument("--slack", type=float, default=DEFAULT_TOL.contraction_slack)
    common.add_argument("--out", help="write the full JSON report here")
    common.add_argument("--json", action="store_true", help="print the JSON report instead of the summary")

    ap = argparse.ArgumentParser(prog="schurkit", description="Schur algorithm and Schur-problem toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("validate", "uniqueness"):
        sub.add_parser(name, parents=[common]).add_argument("path")
    p = sub.add_parser("central", parents=[common])
    p.add_argument("path")
    p.add_argument("--order", type=int)
    p = sub.add_parser("schur-params", parents=[common])
    p.add_argument("path")
    p.add_argument("--levels", type=int)
    p = sub.add_parser("shorted", parents=[common])
    p.add_argument("S")
    p.add_argument("K")
    p = sub.add_parser("colligation", parents=[common])
    p.add_argument("path", nargs="?")
    p.add_argument("--verify", choices=["main1", "zeta1", "simplicity"], default="simplicity")
    p.add_argument("--random", metavar="M,H", help="use a random colligation seeded by SCHURKIT_SEED")
    p.add_argument("--nmax", type=int, default=4)
    p.add_argument("--order", type=int, default=4)
    p = sub.add_parser("limits", parents=[common])
    p.add_argument("path")
    p.add_argument("--nmax", type=int, default=20)
    return ap


def _args_fingerprint(args) -> dict:
    skip = {"out", "json", "rank_tol", "match_tol", "slack"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:      # usage errors are input failures, --help exits 0
        return EXIT_OK if exc.code in (0, None) else EXIT_IO
    try:
        tol = Tolerances(args.slack, args.rank_tol, args.match_tol)
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO
    report = Report(args.command, "", tolerances=tol.as_dict())
    code = EXIT_OK
    try:
        blobs, results, warns, summary = COMMANDS[args.command](args, tol)
        report.inputs_digest = _digest(blobs, _args_fingerprint(args))
        report.results, report.warnings = results, warns
    except _InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO
    except SchurKitError as exc:
        code = EXIT_DOMAIN
        report.results = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        blobs = [Path(p).read_bytes() for p in _input_paths(args) if p]
        report.inputs_digest = _digest(blobs, _args_fingerprint(args))
        summary = f"error: {type(exc).__name__}: {exc}"
    text = report.to_json()
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror or exc}", file=stderr)
            return EXIT_IO
    if args.json:
        stdout.write(text)
    else:
        print(f"{args.command}: {summary}", file=stdout)
        for w in report.warnings:
            print(f"warning: {w}", file=stdout)
    return code


def _input_paths(args) -> list:
    if args.command == "shorted":
        return [args.S, args.K]
    return [getattr(args, "path", None)]


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
