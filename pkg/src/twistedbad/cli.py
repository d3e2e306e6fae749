"""Command-line front end: ``twistedbad <command> [flags]``.

Exit codes: 0 success/PASS, 1 usage or input error, 2 degenerate matrix,
3 audit failure, 4 illegal game move, 5 verification FAIL.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from types import SimpleNamespace

from . import catalog
from .badness import (
    dual_constant,
    end_to_end_check,
    homogeneous_constant,
    transference_report,
    twisted_constant,
)
from .core import FormsMatrix, PrecisionBudget, WeightVector
from .errors import AuditFailure, BoxTooLarge, DegenerateRank, IllegalMove, TwistedBadError
from .game import BLACK_STRATEGIES, GameConfig, load_transcript, play, replay
from .lacunary import compute_stride, lacunarity_audit, partition_sequence, verify_growth_bounds
from .minkowski import ApproxSequence, audit_sequence, estimate_gamma, generate_sequence
from .scalar import Scalar, fmt_decimal

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_AUDIT, EXIT_ILLEGAL, EXIT_FAIL = 0, 1, 2, 3, 4, 5

VARIANTS = ("twisted", "homogeneous", "dual", "transference", "end_to_end")


@dataclass
class RunConfig:
    """Everything a run depends on; a run is reproducible from this alone."""

    command: str = ""
    matrix: str = "golden"
    weights: str | None = None
    precision_bits: int = 128
    allow_surrogate: bool = False
    Q: int = 100
    U: int = 100
    r_max: int = 8
    rounds: int = 60
    seed: int = 0
    seeds: str | None = None
    beta: str = "1/2"
    black: str = "center"
    gamma: str | None = None
    stride: int | None = None
    tie_break: str = "phi-first"
    norm: str = "euclidean"
    alpha: str | None = None
    sequence: str | None = None
    game: str | None = None
    audit: str | None = None
    variant: str | None = None
    show: str | None = None
    out: str | None = None
    json: bool = False

    def to_json(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if k not in ("json", "out")}


class CliError(Exception):
    def __init__(self, msg, code=EXIT_USAGE):
        super().__init__(msg)
        self.code = code


# -- loading helpers ---------------------------------------------------------

def load_matrix(source: str) -> FormsMatrix:
    if source in catalog.ENTRIES:
        return catalog.get(source)
    path = Path(source)
    if not path.exists():
        raise CliError(f"matrix {source!r} is neither a catalog id ({', '.join(catalog.ids())}) nor a file")
    return FormsMatrix.from_json(json.loads(path.read_text()))


def load_weights(cfg: RunConfig, L: FormsMatrix) -> WeightVector:
    if cfg.weights is None:
        return WeightVector.uniform(L.n, L.m)
    k = WeightVector.parse(cfg.weights, L.m)
    if k.n != L.n:
        raise CliError(f"{k.n} weights given for {L.n} forms")
    return k


def parse_point(text: str) -> list[Fraction]:
    return [Fraction(x.strip()) for x in text.split(",") if x.strip()]


def parse_seeds(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def read_lines(path: str) -> list[str]:
    return Path(path).read_text().splitlines()


def _budget(cfg: RunConfig) -> PrecisionBudget:
    return PrecisionBudget(bits=cfg.precision_bits)


def _sequence(cfg: RunConfig, L: FormsMatrix, k: WeightVector) -> ApproxSequence:
    """Load the sequence file or build one; gamma defaults to the estimate at U."""
    if cfg.sequence:
        return ApproxSequence.from_json(json.loads(Path(cfg.sequence).read_text()))
    if cfg.gamma is not None:
        gamma = Fraction(cfg.gamma)
    else:
        gamma = estimate_gamma(L, k, cfg.U, _budget(cfg), cfg.allow_surrogate).gamma_rat
    return generate_sequence(L, k, gamma, cfg.r_max, cfg.tie_break, strict=False,
                             budget=_budget(cfg), allow_surrogate=cfg.allow_surrogate)


def _sequence_context(cfg: RunConfig):
    seq_obj = None
    if cfg.sequence:
        seq_obj = json.loads(Path(cfg.sequence).read_text())
    if seq_obj is not None and "matrix" in seq_obj:
        L = FormsMatrix.from_json(seq_obj["matrix"])
    else:
        L = load_matrix(cfg.matrix)
    k = load_weights(cfg, L)
    return L, k


# -- commands ----------------------------------------------------------------

def cmd_gamma(cfg: RunConfig):
    L = load_matrix(cfg.matrix)
    k = load_weights(cfg, L)
    est = estimate_gamma(L, k, cfg.U, _budget(cfg), cfg.allow_surrogate)
    out = {"gamma": est.to_json()}
    text = f"gamma_U = {out['gamma']['gamma_lo']} (U={cfg.U}, witness u={list(est.witness)})"
    return EXIT_OK, out, text, out


def cmd_sequence(cfg: RunConfig):
    if cfg.audit:
        obj = json.loads(Path(cfg.audit).read_text())
        seq = ApproxSequence.from_json(obj)
        L = seq.matrix or load_matrix(cfg.matrix)
        k = seq.weights or load_weights(cfg, L)
    else:
        L = load_matrix(cfg.matrix)
        k = load_weights(cfg, L)
        seq = _sequence(cfg, L, k)
    seq.matrix, seq.weights = L, k
    seq.audit = audit_sequence(seq, L, k)
    artifact = seq.to_json()
    out = {"gamma": str(seq.gamma), "R": seq.R, "records": len(seq.records),
           "audit_passed": seq.audit.passed,
           "u": [list(u) for u in seq.u_vectors]}
    code = EXIT_OK
    if not seq.audit.passed:
        bad = seq.audit.failures[0]
        out["failure"] = {"inequality": bad.name, "r": bad.r}
        code = EXIT_AUDIT
    text = (f"{len(seq.records)} records, gamma={seq.gamma}, R={seq.R}, audit "
            + ("passed" if seq.audit.passed else f"FAILED ({out['failure']['inequality']} at r={out['failure']['r']})"))
    return code, out, text, artifact


def _partition(cfg: RunConfig, seq: ApproxSequence, k: WeightVector):
    t = cfg.stride or compute_stride(seq.R, k.m, k, k.n, seq.gamma)
    return t, partition_sequence(seq.u_vectors, t)


def cmd_lacunary(cfg: RunConfig):
    L, k = _sequence_context(cfg)
    seq = _sequence(cfg, L, k)
    t, part = _partition(cfg, seq, k)
    reports = [lacunarity_audit(cls, 2, cfg.norm, k) for cls in part.classes]
    growth = verify_growth_bounds(seq.records, k, seq.gamma)
    passed = all(r.passed for r in reports) and growth.passed
    out = {"stride": t, "partition": part.to_json(),
           "classes": [r.to_json() for r in reports], "growth": growth.to_json(),
           "passed": passed}
    text = f"stride t={t}; classes 2-lacunary: {[r.passed for r in reports]}; growth bounds: {growth.passed}"
    return (EXIT_OK if passed else EXIT_AUDIT), out, text, out


def _transcript_path(out: str, seed: int, many: bool) -> str:
    if not many:
        return out
    if "{seed}" in out:
        return out.format(seed=seed)
    p = Path(out)
    return str(p.with_name(f"{p.stem}.seed{seed}{p.suffix}"))


def cmd_game(cfg: RunConfig):
    if cfg.black not in BLACK_STRATEGIES:
        raise CliError(f"unknown black strategy {cfg.black!r}")
    L, k = _sequence_context(cfg)
    seq = _sequence(cfg, L, k)
    t, part = _partition(cfg, seq, k)
    meta = {"matrix": L.to_json(), "weights": k.to_json(), "gamma": str(seq.gamma), "R": seq.R,
            "stride": t, "phi": [rec.phi.to_json() for rec in seq.records]}
    config = GameConfig(part.classes, Fraction(cfg.beta), max_rounds=cfg.rounds, meta=meta)
    seeds = parse_seeds(cfg.seeds) if cfg.seeds else [cfg.seed]
    runs = []
    for s in seeds:
        tr = play(config, black=cfg.black, rounds=cfg.rounds, seed=s)
        v = tr.verdict()
        if cfg.out:
            path = _transcript_path(cfg.out, s, len(seeds) > 1)
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(tr.to_jsonl())
            v["transcript"] = path
        runs.append(v)
    eps = [Fraction(v["epsilon"]) for v in runs if "epsilon" in v]
    out = {"stride": t, "targets": len(config.targets), "runs": runs,
           "summary": {"runs": len(runs), "positive": sum(1 for v in runs if v.get("positive")),
                       "min_epsilon": str(min(eps)) if eps else None}}
    if eps:
        text = (f"{out['summary']['positive']}/{len(runs)} runs with positive certified margin; "
                f"min epsilon ~ {fmt_decimal(min(eps), 12)}")
    else:
        text = f"{len(runs)} runs, no targets engaged (empty margin report)"
    return EXIT_OK, out, text, None


def cmd_replay(cfg: RunConfig):
    if not cfg.game:
        raise CliError("replay needs a transcript path")
    res = replay(read_lines(cfg.game))
    out = {"legal": res.legal, "moves": res.moves, "error": res.error}
    text = f"{'legal' if res.legal else 'ILLEGAL'}: {res.moves} moves validated" + (
        f" ({res.error})" if res.error else "")
    return (EXIT_OK if res.legal else EXIT_ILLEGAL), out, text, None


def _alpha_from_game(path: str):
    tr = load_transcript(read_lines(path))
    return tr, list(tr.final_ball.center)


def _verdict_constant(c, label):
    passed = not c.is_zero()
    out = {"verdict": "PASS" if passed else "FAIL", label: c.to_json(), "witness": list(c.witness)}
    text = f"{label} = {c.to_json()['lo']} at witness {list(c.witness)} -> {out['verdict']}"
    return (EXIT_OK if passed else EXIT_FAIL), out, text


def cmd_verify(cfg: RunConfig):
    variant = cfg.variant or "homogeneous"
    budget = _budget(cfg)
    if variant == "end_to_end":
        if not cfg.game:
            raise CliError("--end-to-end needs --game <transcript>")
        tr, alpha_hat = _alpha_from_game(cfg.game)
        meta = tr.config.meta
        if "matrix" not in meta:
            raise CliError("transcript lacks the sequence metadata written by the game command")
        L = FormsMatrix.from_json(meta["matrix"])
        w = meta["weights"]
        k = WeightVector(w["m"], tuple(Fraction(x) for x in w["k"]))
        eps = tr.certified_epsilon()
        records = [SimpleNamespace(phi=Scalar.from_json(p)) for p in meta.get("phi", [])]
        rep = end_to_end_check(L, k, Fraction(meta["gamma"]), int(meta["R"]), alpha_hat, eps,
                               cfg.Q, records=records, budget=budget)
        kap = rep["kappa"]["kappa_decimal"] if rep["kappa"] else "n/a"
        text = f"c_Q(alpha_hat) = {rep['c_Q']['lo']} vs kappa = {kap} -> {rep['verdict']}"
        return (EXIT_OK if rep["verdict"] == "PASS" else EXIT_FAIL), rep, text, rep
    L = load_matrix(cfg.matrix)
    k = load_weights(cfg, L)
    if variant == "twisted":
        if cfg.alpha is None:
            raise CliError("--twisted needs --alpha <point|transcript>")
        if Path(cfg.alpha).exists():
            alpha = _alpha_from_game(cfg.alpha)[1]
        else:
            alpha = parse_point(cfg.alpha)
        c = twisted_constant(L, k, alpha, cfg.Q, budget)
        code, out, text = _verdict_constant(c, "c_Q")
        out["alpha"] = [str(a) for a in alpha]
        return code, out, text, out
    if variant == "homogeneous":
        code, out, text = _verdict_constant(homogeneous_constant(L, k, cfg.Q, budget), "c_Q")
        return code, out, text, out
    if variant == "dual":
        code, out, text = _verdict_constant(dual_constant(L, k, cfg.U, budget), "c_star_U")
        return code, out, text, out
    if variant == "transference":
        rep = transference_report(L, k, cfg.Q, cfg.U, budget=budget)
        text = (f"{rep['verdict']}: primal {rep['primal']['status']}, dual {rep['dual']['status']} "
                f"({rep['note']})")
        return (EXIT_OK if rep["verdict"] == "CONSISTENT" else EXIT_FAIL), rep, text, rep
    raise CliError(f"unknown verify variant {variant!r}")


def cmd_catalog(cfg: RunConfig):
    if cfg.show:
        if cfg.show not in catalog.ENTRIES:
            raise CliError(f"unknown catalog id {cfg.show!r}")
        mat = catalog.get(cfg.show).to_json()
        return EXIT_OK, {"id": cfg.show, "matrix": mat}, json.dumps(mat, sort_keys=True), mat
    entries = [e.to_json() for e in catalog.ENTRIES.values()]
    text = "\n".join(f"{e['id']:<14} {e['note']}" for e in entries)
    return EXIT_OK, {"entries": entries}, text, None


COMMANDS = {"gamma": cmd_gamma, "sequence": cmd_sequence, "lacunary": cmd_lacunary,
            "game": cmd_game, "replay": cmd_replay, "verify": cmd_verify, "catalog": cmd_catalog}


# -- argument parsing ---------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON run config; flags override its values")
    p.add_argument("--matrix", default=S, help="catalog id or matrix JSON file")
    p.add_argument("--weights", default=S, help='weights, e.g. "1/3,2/3" (default uniform)')
    p.add_argument("--precision-bits", dest="precision_bits", type=int, default=S)
    p.add_argument("--allow-surrogate", dest="allow_surrogate", action="store_true", default=S,
                   help="accept rational surrogates of irrational matrices (horizon guard applies)")
    p.add_argument("--json", action="store_true", default=S, help="emit one JSON object on stdout")
    p.add_argument("--out", default=S, help="write the main artifact to this path")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="twistedbad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="finite-horizon dual constant gamma_U")
    _common(p)
    p.add_argument("--U", type=int, default=S)

    p = sub.add_parser("sequence", help="best-approximation vectors z(T_r) with audit")
    _common(p)
    p.add_argument("--U", type=int, default=S, help="horizon for the gamma estimate")
    p.add_argument("--gamma", default=S, help="rational gamma (skips the estimate)")
    p.add_argument("--r-max", dest="r_max", type=int, default=S)
    p.add_argument("--tie-break", dest="tie_break", choices=["phi-first", "u1-first"], default=S)
    p.add_argument("--audit", default=S, help="re-audit an existing sequence file")

    for name, helptext in (("lacunary", "stride and 2-lacunary partition"),
                           ("game", "Schmidt game with the push-away strategy")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--sequence", default=S, help="sequence JSON (otherwise generated)")
        p.add_argument("--U", type=int, default=S)
        p.add_argument("--gamma", default=S)
        p.add_argument("--r-max", dest="r_max", type=int, default=S)
        p.add_argument("--stride", type=int, default=S)
        if name == "lacunary":
            p.add_argument("--norm", choices=["euclidean", "weighted"], default=S)
        else:
            p.add_argument("--rounds", type=int, default=S)
            p.add_argument("--beta", default=S)
            p.add_argument("--black", choices=sorted(BLACK_STRATEGIES), default=S)
            p.add_argument("--seed", type=int, default=S)
            p.add_argument("--seeds", default=S, help='seed battery, e.g. "1..100"')

    p = sub.add_parser("replay", help="re-validate a transcript move by move")
    _common(p)
    p.add_argument("game", nargs="?", default=S, help="transcript (JSON lines)")

    p = sub.add_parser("verify", help="badness constants and the end-to-end check")
    _common(p)
    g = p.add_mutually_exclusive_group()
    for v in VARIANTS:
        g.add_argument("--" + v.replace("_", "-"), dest="variant", action="store_const", const=v,
                       default=S)
    p.add_argument("--alpha", default=S, help='shift, e.g. "1/2" or "1/3,2/5", or a transcript')
    p.add_argument("--game", default=S, help="transcript for --end-to-end")
    p.add_argument("--Q", type=int, default=S)
    p.add_argument("--U", type=int, default=S)

    p = sub.add_parser("catalog", help="list the example matrices")
    _common(p)
    p.add_argument("--show", default=S, help="print one entry as matrix JSON")
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    values = {}
    flags = vars(ns)
    if "config" in flags:
        values.update(json.loads(Path(flags["config"]).read_text()))
    values.update({k: v for k, v in flags.items() if k != "config"})
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(unknown)}")
    return RunConfig(**values)


def _emit(cfg: RunConfig, obj) -> str:
    return json.dumps(obj, sort_keys=True)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        code, out, text, artifact = COMMANDS[cfg.command](cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DegenerateRank as exc:
        out = {"error": "degenerate", "witness": [str(x) for x in exc.witness]}
        if getattr(ns, "json", False):
            print(json.dumps(out, sort_keys=True))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except AuditFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    except IllegalMove as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ILLEGAL
    except (BoxTooLarge, TwistedBadError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = dict(out)
    out["command"] = cfg.command
    out["config"] = cfg.to_json()
    if cfg.out and artifact is not None:
        art = dict(artifact) if isinstance(artifact, dict) else artifact
        if isinstance(art, dict):
            art.setdefault("config", cfg.to_json())
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(_emit(cfg, art) + "\n")
    if cfg.json:
        print(_emit(cfg, out))
    else:
        print(f"[{cfg.command}] {text}")
    return code


if __name__ == "__main__":
    sys.exit(main())
