"""Command-line entry point: decompose, waring, verify, gf, planted, experiment."""

from __future__ import annotations

import argparse
import csv
import io
import os
import secrets
import sys
import time
from pathlib import Path

from . import bench
from .bco import bco_beam, bco_greedy, pull_back
from .bilinear import (
    BilinearTensor,
    BinaryPolynomial,
    conv_tensor,
    embed_general,
    embed_tensor,
    field_tensor,
    irreducible_poly,
    karatsuba,
    standard_bilinear,
    verify_bilinear,
)
from .cpdecomp import CpDecomposition, cubic_of, standard_decomposition, verify
from .f2core import str_to_bits
from .fgs.bilinear import bilinear_search, gf_search
from .fgs.search import SearchLog, WalkParams
from .fgs.symmetric import best_decomposition, fgs_search
from .io import (
    FormatError,
    format_bil,
    format_cpd,
    format_phase,
    format_war,
    read_file,
    write_text,
)
from .phasepoly import COST_MODELS, PhasePolynomial
from .sge import sge_pass_beam, sge_pass_greedy
from .waring import GateSynthesisMatrix, cp_initialized_todd

EXIT_PARSE = 2
EXIT_VERIFY = 3
THREADS_ENV = "PHASEDECOMP_THREADS"


class VerificationError(RuntimeError):
    pass


def _seed(args, out) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed {args.seed}", file=out)
    return args.seed


def _params(args) -> WalkParams:
    return WalkParams(
        pool_size=args.pool,
        walk_limit=args.walk,
        plateau=args.plateau,
        sge_interval=args.sge_every,
        seed=args.seed,
        threads=args.threads,
        min_pass=args.min_pass,
        target_rank=args.target_rank,
        max_walks=args.max_walks,
        time_limit=args.time_limit,
    )


def _ms(args, seconds: float) -> str:
    return f"{seconds * 1000:.0f}" if args.timing else ""


def _search_log_csv(log: SearchLog, timing: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("rank", "walks", "steps", "time_ms"))
    for rank, walks, steps, secs in log.rows:
        w.writerow((rank, walks, steps, f"{secs * 1000:.0f}" if timing else ""))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# decompose
# ---------------------------------------------------------------------------


def _passes(spec: list[str]) -> list[str]:
    out = []
    for item in spec:
        out.extend(p for p in item.split(",") if p)
    for p in out:
        if p not in ("bco", "sge", "fgs"):
            raise FormatError(f"unknown pass {p!r}")
    return out


def _decompose_symmetric(args, p: PhasePolynomial, outdir: Path, out) -> int:
    c = p.cubic_part()
    passes = _passes(args.passes)
    cost_model = COST_MODELS[args.cost]
    d = standard_decomposition(c)
    rows = []
    t0 = time.perf_counter()
    for name in passes:
        if name == "bco":
            if args.bco == "beam":
                b = bco_beam(c, args.beam_width, cost_model)
            else:
                b = bco_greedy(c, cost_model)
            d = pull_back(standard_decomposition(b.poly.cubic_part()), b.transform)
            print(f"bco monomials {len(b.poly.C)}", file=out)
            if p.L or p.Q:
                full = bco_beam(p, args.beam_width, cost_model) if args.bco == "beam" else bco_greedy(p, cost_model)
                print(f"bco full-polynomial monomials {full.poly.monomial_count()}", file=out)
        elif name == "sge":
            d = sge_pass_beam(d, args.beam_width) if args.sge == "beam" else sge_pass_greedy(d)
        else:
            pool, log = fgs_search(c, d, _params(args))
            pooldir = outdir / "pool"
            pooldir.mkdir(parents=True, exist_ok=True)
            members = sorted(pool.members, key=lambda m: m.key())
            for k, m in enumerate(members):
                if not verify(m, c):
                    raise VerificationError("pool member does not verify")
                write_text(pooldir / f"member_{k:04d}.cpd", format_cpd(m))
            write_text(outdir / "fgs_log.csv", _search_log_csv(log, args.timing))
            best = best_decomposition(pool)
            if best.rank <= d.rank:
                d = best
        if not verify(d, c):
            raise VerificationError(f"{name} produced an invalid decomposition")
        rows.append((name, d.rank, _ms(args, time.perf_counter() - t0)))
        print(f"{name} rank {d.rank}", file=out)
    write_text(outdir / "decomposition.cpd", format_cpd(d))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("pass", "rank", "time_ms"))
    w.writerows(rows)
    write_text(outdir / "log.csv", buf.getvalue())
    print(f"rank {d.rank}", file=out)
    return 0


def _gf_match(t: BilinearTensor, modulus: BinaryPolynomial | None):
    na, nb, nc = t.dims
    if na != nb or na < 1:
        return None
    p = na
    if t.dims == (p, p, 2 * p - 1) and t.entries == conv_tensor(p).entries:
        return ("conv", p, None)
    if t.dims == (p, p, p):
        h = modulus or irreducible_poly(p)
        try:
            if t.entries == field_tensor(p, h).entries:
                return ("field", p, h)
        except ValueError:
            return None
    return None


def _decompose_bilinear(args, t: BilinearTensor, outdir: Path, out) -> int:
    params = _params(args)
    match = _gf_match(t, _modulus(args))
    if match and match[0] == "field":
        _, p, h = match
        best, src, logs = gf_search(p, params, h)
        print(f"modulus {h}", file=out)
        print(f"formulation {src}", file=out)
        for form, log in logs:
            write_text(outdir / f"fgs_log_{form}.csv", _search_log_csv(log, args.timing))
    else:
        init = karatsuba(match[1]) if match else standard_bilinear(t)
        pool, log = bilinear_search(t, init, params)
        best = min(pool.members, key=lambda m: m.key())
        write_text(outdir / "fgs_log.csv", _search_log_csv(log, args.timing))
    if not verify_bilinear(best, t):
        raise VerificationError("bilinear result does not recompose the tensor")
    emb = embed_general(best)
    if not verify(emb, embed_tensor(t)):
        raise VerificationError("embedded decomposition does not verify")
    write_text(outdir / "decomposition.cpd", format_cpd(emb))
    print(f"rank {best.rank}", file=out)
    return 0


def cmd_decompose(args, out) -> int:
    obj = read_file(args.input)
    _seed(args, out)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    if isinstance(obj, BilinearTensor) or args.bilinear:
        if not isinstance(obj, BilinearTensor):
            raise FormatError("--bilinear needs a .bil tensor")
        return _decompose_bilinear(args, obj, outdir, out)
    if not isinstance(obj, PhasePolynomial):
        raise FormatError("decompose needs a .phase or .bil input")
    return _decompose_symmetric(args, obj, outdir, out)


# ---------------------------------------------------------------------------
# waring
# ---------------------------------------------------------------------------


def _strategy(text: str) -> tuple[str, int]:
    if text == "greedy":
        return "greedy", 1
    if text == "beam":
        return "beam", 1 << 10
    if text.startswith("beam:"):
        try:
            width = int(text[5:])
        except ValueError:
            raise FormatError(f"bad beam width in {text!r}") from None
        if width < 1:
            raise FormatError("beam width must be positive")
        return "beam", width
    raise FormatError(f"unknown strategy {text!r}")


def cmd_waring(args, out) -> int:
    strategy, width = _strategy(args.strategy)
    files: list[Path] = []
    for item in args.init:
        path = Path(item)
        files.extend(sorted(path.glob("*.cpd")) if path.is_dir() else [path])
    pool = [read_file(f) for f in files]
    if not pool:
        raise FormatError("no decompositions given")
    if not all(isinstance(d, CpDecomposition) for d in pool):
        raise FormatError("waring --init takes .cpd files")
    target = cubic_of(pool[0])
    if any(cubic_of(d) != target for d in pool[1:]):
        raise FormatError("pool members encode different tensors")
    a = cp_initialized_todd(pool, strategy, width)
    if a.signature() != target:
        raise VerificationError("todd changed the signature")
    write_text(args.out, format_war(a))
    print(f"rows {a.rank}", file=out)
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args, out) -> int:
    dec = read_file(args.decomposition)
    ten = read_file(args.tensor)
    if isinstance(ten, BilinearTensor):
        ten = embed_tensor(ten)
    if not isinstance(ten, PhasePolynomial):
        raise FormatError("tensor must be a .phase or .bil file")
    if isinstance(dec, CpDecomposition):
        ok = dec.n == ten.n and verify(dec, ten)
    elif isinstance(dec, GateSynthesisMatrix):
        ok = dec.n == ten.n and dec.signature() == ten
    else:
        raise FormatError("decomposition must be a .cpd or .war file")
    print("ok" if ok else "mismatch", file=out)
    return 0 if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# gf, planted, experiment
# ---------------------------------------------------------------------------


def _modulus(args) -> BinaryPolynomial | None:
    if getattr(args, "modulus", None) is None:
        return None
    try:
        return BinaryPolynomial(str_to_bits(args.modulus))
    except ValueError as e:
        raise FormatError(f"bad modulus: {e}") from None


def cmd_gf(args, out) -> int:
    if args.p < 1:
        raise FormatError("p must be positive")
    if args.target == "conv":
        t = conv_tensor(args.p)
    else:
        h = _modulus(args) or irreducible_poly(args.p)
        try:
            t = field_tensor(args.p, h)
        except ValueError as e:
            raise FormatError(str(e)) from None
        print(f"modulus {h}", file=out)
    text = format_bil(t)
    if args.out:
        write_text(args.out, text)
    else:
        out.write(text)
    return 0


def cmd_planted(args, out) -> int:
    seed = _seed(args, out)
    c, d = bench.planted(args.n, args.r, seed)
    write_text(f"{args.out}.phase", format_phase(c))
    write_text(f"{args.out}.cpd", format_cpd(d))
    print(f"monomials {len(c.C)}", file=out)
    return 0


def cmd_experiment(args, out) -> int:
    try:
        text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(str(e)) from None
    spec = bench.parse_spec(text)
    if args.timing:
        spec.timing = True
    result = bench.run_experiment(spec)
    if any(line.endswith(",0") for line in result.splitlines()[1:]):
        if args.out:
            write_text(args.out, result)
        raise VerificationError("an experiment row failed verification")
    if args.out:
        write_text(args.out, result)
    else:
        out.write(result)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _search_flags(p: argparse.ArgumentParser) -> None:
    defaults = WalkParams()
    p.add_argument("--pool", type=int, default=defaults.pool_size, help="pool size S")
    p.add_argument("--walk", type=int, default=defaults.walk_limit, help="walk length L")
    p.add_argument("--plateau", type=int, default=defaults.plateau, help="plus after P stagnant steps")
    p.add_argument("--sge-every", type=int, default=defaults.sge_interval, help="SGE probe interval R")
    p.add_argument("--min-pass", type=int, default=defaults.min_pass)
    p.add_argument("--target-rank", type=int, default=None)
    p.add_argument("--max-walks", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None, help="seconds per search")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--threads", type=int, default=int(os.environ.get(THREADS_ENV, "1")),
        help=f"worker processes (default ${THREADS_ENV} or 1)",
    )
    p.add_argument("--timing", action="store_true", help="fill time columns in logs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasedecomp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="reduce a tensor's CCZ/Toffoli count")
    p.add_argument("input")
    p.add_argument("--pass", dest="passes", action="append", default=None,
                   help="bco, sge, fgs; repeat or comma-separate (default bco,sge,fgs)")
    p.add_argument("--bilinear", action="store_true")
    p.add_argument("--modulus", default=None, help="field modulus as bit string, x^t at char t")
    p.add_argument("--bco", choices=("greedy", "beam"), default="beam")
    p.add_argument("--sge", choices=("greedy", "beam"), default="greedy")
    p.add_argument("--beam-width", type=int, default=1 << 10)
    p.add_argument("--cost", choices=sorted(COST_MODELS), default="unitary")
    p.add_argument("--out", default="out")
    _search_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("waring", help="T-count reduction from CP decompositions")
    p.add_argument("--init", nargs="+", required=True, help=".cpd files or directories")
    p.add_argument("--strategy", default="greedy", help="greedy, beam or beam:<width>")
    p.add_argument("--out", default="result.war")
    p.set_defaults(func=cmd_waring)

    p = sub.add_parser("verify", help="check a decomposition against a tensor")
    p.add_argument("decomposition")
    p.add_argument("tensor")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gf", help="emit a GF(2^p) multiplication tensor")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--modulus", default=None)
    p.add_argument("--target", choices=("conv", "field"), default="field")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gf)

    p = sub.add_parser("planted", help="write a planted tensor and its witness")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="planted")
    p.set_defaults(func=cmd_planted)

    p = sub.add_parser("experiment", help="run a planted-instance grid")
    p.add_argument("spec")
    p.add_argument("--out", default=None)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv: list[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    if getattr(args, "passes", "unset") is None:
        args.passes = ["bco,sge,fgs"]
    try:
        return args.func(args, out)
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
