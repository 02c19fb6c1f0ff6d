"""Plain-text formats: .phase, .cpd, .bil and .war.

All files are UTF-8 with LF endings; ``#`` starts a comment and blank lines
are ignored.  Bit strings put the coefficient of x_t at character t.
"""

from __future__ import annotations

from pathlib import Path

from .bilinear import BilinearTensor
from .cpdecomp import CpDecomposition
from .f2core import bits_to_str, str_to_bits
from .phasepoly import PhasePolynomial
from .waring import GateSynthesisMatrix


class FormatError(ValueError):
    """Raised for malformed input files."""


def _lines(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line.split()))
    return out


def _header(lines, word: str, nargs: int) -> list[int]:
    if not lines:
        raise FormatError("empty file")
    lineno, toks = lines[0]
    if toks[0] != word or len(toks) != nargs + 1:
        raise FormatError(f"line {lineno}: expected header '{word}' with {nargs} integers")
    try:
        vals = [int(t) for t in toks[1:]]
    except ValueError:
        raise FormatError(f"line {lineno}: non-integer in header") from None
    if any(v < 0 for v in vals):
        raise FormatError(f"line {lineno}: negative size in header")
    return vals


def _ints(lineno: int, toks: list[str]) -> list[int]:
    try:
        return [int(t) for t in toks]
    except ValueError:
        raise FormatError(f"line {lineno}: expected integers") from None


def _bits(lineno: int, s: str, n: int) -> int:
    if len(s) != n:
        raise FormatError(f"line {lineno}: bit string of length {len(s)}, expected {n}")
    try:
        return str_to_bits(s)
    except ValueError as e:
        raise FormatError(f"line {lineno}: {e}") from None


# ---------------------------------------------------------------------------
# .phase
# ---------------------------------------------------------------------------


def parse_phase(text: str) -> PhasePolynomial:
    lines = _lines(text)
    (n,) = _header(lines, "phase", 1)
    L: set[int] = set()
    Q: set[tuple[int, ...]] = set()
    C: set[tuple[int, ...]] = set()
    arity = {"L": (1, L), "Q": (2, Q), "C": (3, C)}
    for lineno, toks in lines[1:]:
        kind = toks[0]
        if kind not in arity:
            raise FormatError(f"line {lineno}: unknown monomial kind {kind!r}")
        k, target = arity[kind]
        idx = _ints(lineno, toks[1:])
        if len(idx) != k or len(set(idx)) != k:
            raise FormatError(f"line {lineno}: {kind} needs {k} distinct indices")
        key = idx[0] if k == 1 else tuple(sorted(idx))
        target ^= {key}  # type: ignore[operator]
    try:
        return PhasePolynomial(n, frozenset(L), frozenset(Q), frozenset(C))  # type: ignore[arg-type]
    except ValueError as e:
        raise FormatError(str(e)) from None


def format_phase(p: PhasePolynomial) -> str:
    out = [f"phase {p.n}"]
    out += [f"L {i}" for i in sorted(p.L)]
    out += [f"Q {i} {j}" for i, j in sorted(p.Q)]
    out += [f"C {i} {j} {k}" for i, j, k in sorted(p.C)]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# .cpd
# ---------------------------------------------------------------------------


def parse_cpd(text: str) -> CpDecomposition:
    lines = _lines(text)
    n, r = _header(lines, "cpd", 2)
    body = lines[1:]
    if len(body) != r:
        raise FormatError(f"header promises {r} terms, found {len(body)}")
    terms = []
    for lineno, toks in body:
        if len(toks) != 3:
            raise FormatError(f"line {lineno}: a term has three factors")
        terms.append(tuple(_bits(lineno, s, n) for s in toks))
    try:
        return CpDecomposition(n, tuple(terms))  # type: ignore[arg-type]
    except ValueError as e:
        raise FormatError(str(e)) from None


def format_cpd(d: CpDecomposition) -> str:
    out = [f"cpd {d.n} {d.rank}"]
    for t in sorted(d.terms):
        out.append(" ".join(bits_to_str(x, d.n) for x in t))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# .bil
# ---------------------------------------------------------------------------


def parse_bil(text: str) -> BilinearTensor:
    lines = _lines(text)
    dims = _header(lines, "bilinear", 3)
    ents: set[tuple[int, ...]] = set()
    for lineno, toks in lines[1:]:
        e = _ints(lineno, toks)
        if len(e) != 3:
            raise FormatError(f"line {lineno}: entries are 'i j k'")
        ents ^= {tuple(e)}
    try:
        return BilinearTensor(tuple(dims), frozenset(ents))  # type: ignore[arg-type]
    except ValueError as e:
        raise FormatError(str(e)) from None


def format_bil(t: BilinearTensor) -> str:
    out = ["bilinear {} {} {}".format(*t.dims)]
    out += [f"{i} {j} {k}" for i, j, k in sorted(t.entries)]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# .war
# ---------------------------------------------------------------------------


def parse_war(text: str) -> GateSynthesisMatrix:
    lines = _lines(text)
    n, r = _header(lines, "waring", 2)
    body = lines[1:]
    if len(body) != r:
        raise FormatError(f"header promises {r} rows, found {len(body)}")
    rows = []
    for lineno, toks in body:
        if len(toks) != 1:
            raise FormatError(f"line {lineno}: one bit string per row")
        rows.append(_bits(lineno, toks[0], n))
    return GateSynthesisMatrix(n, tuple(rows))


def format_war(a: GateSynthesisMatrix) -> str:
    out = [f"waring {a.n} {a.rank}"]
    out += [bits_to_str(r, a.n) for r in a.rows]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

PARSERS = {".phase": parse_phase, ".cpd": parse_cpd, ".bil": parse_bil, ".war": parse_war}


def read_file(path: str | Path):
    """Parse by extension; unknown extensions are sniffed from the header word."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise FormatError(f"cannot read {path}: {e}") from None
    parser = PARSERS.get(path.suffix)
    if parser is None:
        lines = _lines(text)
        word = lines[0][1][0] if lines else ""
        parser = {
            "phase": parse_phase,
            "cpd": parse_cpd,
            "bilinear": parse_bil,
            "waring": parse_war,
        }.get(word)
        if parser is None:
            raise FormatError(f"{path}: unrecognized format")
    return parser(text)


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")
