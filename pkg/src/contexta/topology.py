"""Low-degree chains of the context complex, the [beta] obstruction, coset
posets and their Euler characteristics, and the sphere-count formula."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Hashable

import numpy as np

from .errors import CapacityError, DomainError, FormulaInterpretationError, NumericalIntegrityError
from .gfp import PrimeConfig, Subspace, Vec, rank_mod, solve_affine, vadd
from .pauli import PiGroup, build_pi, restricted_beta_value
from .presheaf import ContextCover

SUPPORT_GUARD = 512
POSET_GUARD = 10**5


# --------------------------------------------------------------------------
# chain complex


def _simplices(cover: ContextCover, k: int) -> list[tuple[Vec, ...]]:
    out = set()
    for I in cover.maximal:
        out.update(itertools.product(I.nonzero, repeat=k))
    return sorted(out)


def _faces(simplex: tuple[Vec, ...], p: int):
    """(sign, face) pairs of the boundary; faces with a zero entry are dropped."""
    n = len(simplex)
    yield 1, simplex[1:]
    for i in range(n - 1):
        merged = vadd(simplex[i], simplex[i + 1], p)
        if any(merged):
            yield (-1) ** (i + 1), simplex[:i] + (merged,) + simplex[i + 2:]
    yield (-1) ** n, simplex[:-1]


@dataclass(frozen=True)
class TruncatedChainComplex:
    cover: ContextCover
    bases: tuple  # bases[k] = list of k-simplices, k = 0..3
    boundaries: tuple  # boundaries[k] = matrix of d_k: C_k -> C_{k-1}, k = 1..3 (index 0 unused)

    @property
    def p(self) -> int:
        return self.cover.cfg.p

    def boundary(self, k: int) -> np.ndarray:
        return self.boundaries[k]

    @cached_property
    def ranks(self) -> tuple[int, ...]:
        return (0,) + tuple(rank_mod(self.boundaries[k], self.p) for k in (1, 2, 3))


@lru_cache(maxsize=8)
def build_chain_complex(cover: ContextCover) -> TruncatedChainComplex:
    if len(cover.support) > SUPPORT_GUARD:
        raise CapacityError(f"|support| = {len(cover.support)} exceeds {SUPPORT_GUARD}")
    p = cover.cfg.p
    bases = tuple(_simplices(cover, k) for k in range(4))
    index = [{s: i for i, s in enumerate(b)} for b in bases]
    mats = [np.zeros((0, 0), dtype=np.int64)]
    for k in (1, 2, 3):
        M = np.zeros((len(bases[k - 1]), len(bases[k])), dtype=np.int64)
        for j, simplex in enumerate(bases[k]):
            for sign, face in _faces(simplex, p):
                M[index[k - 1][face], j] += sign
        mats.append(M % p)
    for k in (2, 3):
        # float products are exact here (entries < p, sums far below 2**53) and use BLAS
        if (np.rint(mats[k - 1].astype(float) @ mats[k].astype(float)) % p).any():
            raise NumericalIntegrityError(f"boundary squares to a nonzero map in degree {k}")
    cx = TruncatedChainComplex(cover, bases, tuple(mats))
    _check_beta_cocycle(cx)
    return cx


def beta_cochain(cx: TruncatedChainComplex) -> np.ndarray:
    p = cx.p
    return np.array([restricted_beta_value(v, w, p) for v, w in cx.bases[2]], dtype=np.int64)


def _check_beta_cocycle(cx: TruncatedChainComplex) -> None:
    b = beta_cochain(cx)
    if ((b @ cx.boundaries[3]) % cx.p).any():
        raise NumericalIntegrityError("beta is not a cocycle on the 3-simplices")


def beta_is_coboundary(cover: ContextCover) -> tuple[bool, dict | None]:
    """Solve ds = beta for a 1-cochain s; return (solvable, one solution)."""
    cx = build_chain_complex(cover)
    p = cx.p
    sol = solve_affine(cx.boundaries[2].T.tolist(), beta_cochain(cx).tolist(), p, nvars=len(cx.bases[1]))
    if sol.empty:
        return False, None
    return True, {s[0]: int(x) for s, x in zip(cx.bases[1], sol.particular)}


def homology_dims(cover: ContextCover) -> tuple[int, int]:
    """(dim H_1, dim H^2) over Z/p."""
    cx = build_chain_complex(cover)
    _, r1, r2, r3 = cx.ranks
    h1 = len(cx.bases[1]) - r1 - r2
    h2 = len(cx.bases[2]) - r3 - r2
    return h1, h2


# --------------------------------------------------------------------------
# groups


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its elements, product, and an embedding of vectors."""

    elements: tuple
    mul: Callable
    embed: Callable[[Vec], Hashable]
    name: str = "G"

    @cached_property
    def index(self) -> dict:
        return {g: i for i, g in enumerate(self.elements)}

    @property
    def order(self) -> int:
        return len(self.elements)

    def check_cover(self, cover: ContextCover) -> None:
        """Each context must embed as a subgroup: phi(v) phi(w) = phi(v + w)."""
        p = cover.cfg.p
        for I in cover.maximal:
            for v in I:
                for w in I:
                    if self.mul(self.embed(v), self.embed(w)) != self.embed(vadd(v, w, p)):
                        raise DomainError(f"{I} does not embed as a subgroup of {self.name}")


def abelian_group(space: Subspace | PrimeConfig) -> FiniteGroup:
    if isinstance(space, PrimeConfig):
        cfg, elements = space, tuple(space.vectors())
    else:
        cfg, elements = space.cfg, space.elements
    p = cfg.p
    return FiniteGroup(elements, lambda a, b: vadd(a, b, p), lambda v: tuple(v), name="V")


def pi_group(cfg: PrimeConfig) -> FiniteGroup:
    G: PiGroup = build_pi(cfg)
    return FiniteGroup(tuple(G.elements), G.mul, G.embed, name="V x_b Z/p")


def group_for(cover: ContextCover, kind: str = "auto") -> FiniteGroup:
    """'abelian' (V), 'full-extension' (V x_b Z/p), or 'auto' (the latter for full covers)."""
    if kind == "auto":
        kind = "full-extension" if cover.is_full() else "abelian"
    if kind == "abelian":
        return abelian_group(cover.cfg)
    if kind == "full-extension":
        if cover.cfg.n < 2:
            raise DomainError("for n = 1 the fundamental group of the full complex is infinite; "
                              "no finite coset poset models it")
        return pi_group(cover.cfg)
    raise DomainError(f"unknown group kind {kind!r}")


# --------------------------------------------------------------------------
# coset posets


@dataclass(frozen=True, eq=False)
class CosetPoset:
    """Cosets gA (A running over the cover) ordered by inclusion.

    ``below[i]`` lists the elements strictly below element i.
    """

    labels: tuple  # (context index, coset representative index)
    sizes: tuple
    below: tuple
    chain_length: int

    def __len__(self) -> int:
        return len(self.labels)


def coset_poset(group: FiniteGroup, cover: ContextCover) -> CosetPoset:
    if group.order * len(cover) > POSET_GUARD:
        raise CapacityError(f"|G| * |cover| = {group.order * len(cover)} exceeds {POSET_GUARD}")
    group.check_cover(cover)
    idx = group.index
    contexts = sorted(cover.contexts, key=Subspace.sort_key)
    images = [[idx[group.embed(v)] for v in I.elements] for I in contexts]
    elems = group.elements
    coset_of = []  # per context: group-element index -> global poset id
    labels, sizes = [], []
    for ci, img in enumerate(images):
        assign = [-1] * group.order
        for g in range(group.order):
            if assign[g] >= 0:
                continue
            pid = len(labels)
            labels.append((ci, g))
            sizes.append(len(img))
            for a in img:
                assign[idx[group.mul(elems[g], elems[a])]] = pid
        if min(assign) < 0:
            raise NumericalIntegrityError("cosets do not partition the group")
        coset_of.append(assign)
    # members of each coset, for computing what lies below
    members = [[] for _ in labels]
    for ci, assign in enumerate(coset_of):
        for g, pid in enumerate(assign):
            members[pid].append(g)
    sub = [[cj for cj, K in enumerate(contexts) if cj != ci and K.issubspace(I)] for ci, I in enumerate(contexts)]
    below = []
    for pid, (ci, _g) in enumerate(labels):
        down = set()
        for cj in sub[ci]:
            down.update(coset_of[cj][g] for g in members[pid])
        below.append(tuple(sorted(down)))
    return CosetPoset(tuple(labels), tuple(sizes), tuple(below), cover.longest_chain())


def euler_characteristic(poset: CosetPoset) -> int:
    """Unreduced Euler characteristic of the order complex (chains of length >= 1 element)."""
    order = sorted(range(len(poset)), key=lambda i: poset.sizes[i])
    f = [0] * len(poset)
    for i in order:
        # signed count of chains with top element i
        f[i] = 1 - sum(f[j] for j in poset.below[i])
    return sum(f)


def sphere_count(poset: CosetPoset, fiber_dim: int) -> int:
    if fiber_dim != poset.chain_length:
        raise DomainError(f"fiber dimension {fiber_dim} differs from the longest chain {poset.chain_length}")
    return (-1) ** fiber_dim * (euler_characteristic(poset) - 1)


# --------------------------------------------------------------------------
# the closed formula


def d_formula(p: int, n: int, r: int | None = None) -> int:
    """Sphere count of the full complex, reading the formula's r as n by default."""
    r = n if r is None else r
    if r < 1:
        raise DomainError("r must be positive")
    total = (-1) ** (r + 1) + p ** (2 * r + 1 + r * r)
    for j in range(1, r + 1):
        num, den = 1, 1
        for t in range(j):
            num *= p ** (2 * r - t) - p ** t
            den *= p ** j - p ** t
        if num % den:
            raise FormulaInterpretationError(f"product term j={j} is not an integer ({num}/{den})")
        total += (-1) ** j * p ** (2 * r + 1 - j + (r - j) ** 2) * (num // den)
    return total
