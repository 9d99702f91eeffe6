"""Named context covers and generator-list parsing."""

from __future__ import annotations

import json
from pathlib import Path

from .errors import InputError
from .gfp import PrimeConfig, span
from .presheaf import ContextCover, full_cover, make_cover


def _pauli_word(word: str, n: int) -> tuple[int, ...]:
    """Parse a p=2 Pauli word such as 'XIZ' into (z|x) coordinates."""
    if len(word) != n:
        raise InputError(f"Pauli word {word!r} has length {len(word)}, expected {n}")
    z, x = [0] * n, [0] * n
    for i, ch in enumerate(word.upper()):
        if ch in "ZY":
            z[i] = 1
        if ch in "XY":
            x[i] = 1
        if ch not in "IXYZ":
            raise InputError(f"bad Pauli letter {ch!r} in {word!r}")
    return tuple(z + x)


SQUARE = [
    ["XI", "IX"],
    ["XX", "ZZ"],
    ["ZI", "IZ"],
    ["XI", "IZ"],
    ["XZ", "ZX"],
    ["ZI", "IX"],
]

STAR = [
    ["XII", "IXI", "IIX"],
    ["XII", "IYI", "IIY"],
    ["YII", "IXI", "IIY"],
    ["YII", "IYI", "IIX"],
    ["XXX", "YYX", "XYY"],
]

NAMED = {
    # name: (p, n, generator words per context)
    "square": (2, 2, SQUARE),
    "square-open": (2, 2, SQUARE[:1] + SQUARE[2:]),
    "star": (2, 3, STAR),
    "star-open": (2, 3, STAR[:4]),
}

ALIASES = {
    "mermin-square": "square",
    "mermin-star": "star",
    "mermin-square-open": "square-open",
    "mermin-star-open": "star-open",
}


def named_context(source: str):
    """'square:2' -> the second context of a named cover, as a subspace."""
    name, _, k = source.rpartition(":")
    key = ALIASES.get(name.lower(), name.lower())
    if key not in NAMED:
        raise InputError(f"unknown cover {name!r} in context {source!r}")
    cp, cn, words = NAMED[key]
    try:
        gens = words[int(k) - 1]
        if int(k) < 1:
            raise IndexError
    except (ValueError, IndexError):
        raise InputError(f"{name} has contexts 1..{len(words)}, got {k!r}") from None
    cfg = PrimeConfig(cp, cn)
    return span([_pauli_word(w, cn) for w in gens], cfg)


def named_cover(name: str, p: int | None = None, n: int | None = None) -> ContextCover:
    """'square', 'star', their '-open' variants, or 'full' / 'full:p:n'."""
    key = ALIASES.get(name.lower(), name.lower())
    if key.startswith("full"):
        parts = key.split(":")
        if len(parts) == 3:
            try:
                p, n = int(parts[1]), int(parts[2])
            except ValueError:
                raise InputError(f"bad full-cover name {name!r}; use 'full:p:n'") from None
        if p is None or n is None:
            raise InputError("the full cover needs p and n (use 'full:p:n')")
        return full_cover(PrimeConfig(p, n))
    if key not in NAMED:
        raise InputError(f"unknown cover {name!r}; known: {', '.join(sorted(NAMED))}, full:p:n")
    cp, cn, words = NAMED[key]
    if (p, n) not in ((None, None), (cp, cn)):
        raise InputError(f"cover {name!r} lives in p={cp}, n={cn}")
    cfg = PrimeConfig(cp, cn)
    gens = [[_pauli_word(w, cn) for w in ctx] for ctx in words]
    return make_cover(gens, cfg, name=key)


def cover_from_json(data: dict) -> ContextCover:
    """{"p": 2, "n": 2, "contexts": [[[z..x..], ...], ...]} (vectors or Pauli words)."""
    try:
        p, n, contexts = int(data["p"]), int(data["n"]), data["contexts"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cover JSON needs integer 'p', 'n' and a 'contexts' list: {exc}") from None
    cfg = PrimeConfig(p, n)
    gens = []
    for k, ctx in enumerate(contexts):
        gl = []
        try:
            for g in ctx:
                if isinstance(g, str):
                    if p != 2:
                        raise InputError("Pauli words are only accepted for p=2")
                    gl.append(_pauli_word(g, n))
                else:
                    gl.append(tuple(int(a) % p for a in g))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"context {k + 1}: generators must be integer vectors or Pauli words ({exc})") from None
        gens.append(gl)
    return make_cover(gens, cfg, name=data.get("name"))


def cover_to_json(cover: ContextCover) -> dict:
    if cover.generators:
        contexts = [[list(g) for g in gl] for gl in cover.generators]
    else:
        contexts = [[list(b) for b in I.basis] for I in cover.maximal]
    return {"p": cover.cfg.p, "n": cover.cfg.n, "name": cover.name, "contexts": contexts}


def load_cover(source: str, p: int | None = None, n: int | None = None) -> ContextCover:
    """A JSON file path or a named cover."""
    path = Path(source)
    if path.suffix == ".json" or path.is_file():
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise InputError(f"cannot read cover file {source!r}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"cover file {source!r} is not valid JSON: {exc}") from None
        return cover_from_json(data)
    return named_cover(source, p, n)
