"""The quaternion-type lattice and the closed-form type inference rules.

The four subspaces spanned by grades congruent to 0, 1, 2, 3 mod 4 are the
main quaternion types; arbitrary subsets of {0,1,2,3} name the 15 compound
types, with the empty set reserved for the zero element (which belongs to
every type, so "zero ⊆ anything" is literal subset containment).

Inference works on residues: a k-fold commutator of main types a_1..a_k has
type (Σa_i + 1 + (-1)^S) mod 4 with S = Σ_{i<j} a_i a_j, the anticommutator
the same with the opposite sign, and a plain product lands in {0,2} or {1,3}
according to the parity of Σa_i.  The sharp/flat/natural operations permute
the four main types and form a Klein four-group with the identity.
"""

from __future__ import annotations

import enum
from itertools import combinations_with_replacement
from random import Random
from typing import Iterable, Sequence

from .algebra import ApproxMultivector, Multivector, Signature, blade_grade, blades_by_grade, random_multivector

_RESIDUES = frozenset((0, 1, 2, 3))


class InfeasibleDeclarationError(ValueError):
    """A declared type or rank has no nonzero representative in the algebra."""


class QType(frozenset):
    """A quaternion type: a subset of the residues {0,1,2,3}.

    Singletons are the main types; the empty set is the type of 0 and sits
    at the bottom of the containment order.
    """

    def __new__(cls, members: Iterable[int] = ()):
        members = frozenset(members)
        if not members <= _RESIDUES:
            raise ValueError(f"type members must lie in 0..3, got {sorted(members)}")
        return super().__new__(cls, members)

    def __or__(self, other):
        return QType(frozenset.__or__(self, frozenset(other)))

    def __and__(self, other):
        return QType(frozenset.__and__(self, frozenset(other)))

    def __sub__(self, other):
        return QType(frozenset.__sub__(self, frozenset(other)))

    def render(self) -> str:
        if not self:
            return "⊥"  # bottom: the type of the zero element
        return "".join(f"{t}~" for t in sorted(self))

    @classmethod
    def parse(cls, text: str) -> "QType":
        text = text.strip()
        if text == "⊥":
            return cls()
        members = []
        for ch in text:
            if ch == "~":
                continue
            if ch not in "0123":
                raise ValueError(f"bad type syntax {text!r}")
            members.append(int(ch))
        if not members:
            raise ValueError(f"bad type syntax {text!r}")
        return cls(members)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"QType({sorted(self)})"


MAIN_TYPES = tuple(QType((t,)) for t in range(4))
FULL_TYPE = QType(_RESIDUES)


class BracketKind(enum.Enum):
    COMMUTATOR = "commutator"
    ANTICOMMUTATOR = "anticommutator"

    @property
    def reversal_sign(self) -> int:
        """Sign of the reversed-order product in the defining expression."""
        return -1 if self is BracketKind.COMMUTATOR else 1

    def __str__(self) -> str:
        return self.value


COMMUTATOR = BracketKind.COMMUTATOR
ANTICOMMUTATOR = BracketKind.ANTICOMMUTATOR


def as_kind(kind) -> BracketKind:
    if isinstance(kind, BracketKind):
        return kind
    if isinstance(kind, str):
        k = kind.strip().lower()
        if k in ("commutator", "comm"):
            return COMMUTATOR
        if k in ("anticommutator", "anti"):
            return ANTICOMMUTATOR
    raise ValueError(f"unknown bracket kind {kind!r}")


# ---------------------------------------------------------------------------
# musical operations


class MusicalOp(enum.Enum):
    """Identity, sharp, flat, natural: involutive permutations of 0..3."""

    IDENTITY = "I"
    SHARP = "#"
    FLAT = "b"
    NATURAL = "n"

    @property
    def permutation(self) -> tuple[int, int, int, int]:
        return _PERMS[self]

    def apply_residue(self, t: int) -> int:
        if t not in (0, 1, 2, 3):
            raise ValueError(f"residue must be 0..3, got {t}")
        return _PERMS[self][t]

    def __str__(self) -> str:
        return self.value


_PERMS = {
    MusicalOp.IDENTITY: (0, 1, 2, 3),
    MusicalOp.SHARP: (2, 3, 0, 1),  # +2 mod 4
    MusicalOp.FLAT: (1, 0, 3, 2),  # 0<->1, 2<->3
    MusicalOp.NATURAL: (3, 2, 1, 0),  # 0<->3, 1<->2
}

_PERM_TO_OP = {perm: op for op, perm in _PERMS.items()}


def musical_apply(op: MusicalOp, t: QType) -> QType:
    """Apply a musical operation element-wise to a type."""
    return QType(op.apply_residue(m) for m in t)


def musical_compose(a: MusicalOp, b: MusicalOp) -> MusicalOp:
    """Composition a∘b (apply b, then a); the group is the Klein four-group."""
    pa, pb = a.permutation, b.permutation
    return _PERM_TO_OP[tuple(pa[pb[k]] for k in range(4))]


# ---------------------------------------------------------------------------
# concrete type of a multivector


def qtype_of(u: Multivector) -> QType:
    """Residue classes mod 4 on which u has nonzero grades; empty for u = 0."""
    return QType(blade_grade(b) % 4 for b in u._coeffs)


def qtype_of_approx(u: ApproxMultivector, tol: float = 1e-9) -> QType:
    """Type of a float multivector, ignoring coefficients below tolerance.

    The threshold scales with the largest coefficient present, so a residue
    counts only if it carries weight above float cancellation noise.
    """
    thresh = tol * max(1.0, u.max_abs())
    return QType(blade_grade(b) % 4 for b, v in u._coeffs.items() if abs(v) > thresh)


# ---------------------------------------------------------------------------
# closed-form inference on main types


def _check_main(t: int) -> int:
    if t not in (0, 1, 2, 3):
        raise ValueError(f"main type must be 0..3, got {t}")
    return t


def infer_pair(kind, k: int, l: int) -> int:
    """Type of the commutator/anticommutator of two main types."""
    kind = as_kind(kind)
    _check_main(k)
    _check_main(l)
    eps = -1 if (k * l) & 1 else 1
    if kind is COMMUTATOR:
        return (k + l + 1 + eps) % 4
    return (k + l + 1 - eps) % 4


def infer_kfold(kind, types: Sequence[int]) -> int:
    """Type of a k-fold commutator/anticommutator of main types, k >= 2."""
    kind = as_kind(kind)
    if len(types) < 2:
        raise ValueError("k-fold brackets need at least two operands")
    for t in types:
        _check_main(t)
    total = sum(types)
    s = 0
    for i in range(len(types)):
        for j in range(i + 1, len(types)):
            s += types[i] * types[j]
    eps = -1 if s & 1 else 1
    if kind is COMMUTATOR:
        return (total + 1 + eps) % 4
    return (total + 1 - eps) % 4


def infer_product(types: Sequence[int]) -> QType:
    """Type envelope of a product of main types: {0,2} or {1,3} by sum parity."""
    if not types:
        raise ValueError("empty product")
    for t in types:
        _check_main(t)
    return QType((0, 2)) if sum(types) % 2 == 0 else QType((1, 3))


def infer_pair_musical(kind, partner: int) -> MusicalOp:
    """The musical operation m with bracket(k, partner) of type m(k) for all k."""
    kind = as_kind(kind)
    _check_main(partner)
    perm = tuple(infer_pair(kind, k, partner) for k in range(4))
    return _PERM_TO_OP[perm]


# ---------------------------------------------------------------------------
# inference over compound types
#
# Brackets and products are multilinear, so a compound operand contributes
# the union over its member residues.  Only (Σ residues mod 4) and the
# number of odd residues mod 4 matter (S = Σ_{i<j} a_i a_j is odd exactly
# when C(#odd, 2) is), which keeps the sweep linear in the operand count.


def _residue_states(member_sets: Sequence[Iterable[int]]):
    states = {(0, 0)}
    for members in member_sets:
        members = list(members)
        if not members:
            return None  # a zero operand annihilates the expression
        states = {((s + t) % 4, (c + (t & 1)) % 4) for s, c in states for t in members}
    return states


def infer_kfold_set(kind, member_sets: Sequence[Iterable[int]]) -> QType:
    """Union of infer_kfold over all residue tuples drawn from the operands."""
    kind = as_kind(kind)
    if len(member_sets) < 2:
        raise ValueError("k-fold brackets need at least two operands")
    states = _residue_states(member_sets)
    if states is None:
        return QType()
    out = set()
    for total, odd in states:
        eps = -1 if (odd * (odd - 1) // 2) & 1 else 1
        if kind is COMMUTATOR:
            out.add((total + 1 + eps) % 4)
        else:
            out.add((total + 1 - eps) % 4)
    return QType(out)


def infer_product_set(member_sets: Sequence[Iterable[int]]) -> QType:
    """Union of infer_product over all residue tuples drawn from the operands."""
    if not member_sets:
        raise ValueError("empty product")
    parities = {0}
    for members in member_sets:
        members = list(members)
        if not members:
            return QType()
        parities = {(p + t) % 2 for p in parities for t in members}
    out = QType()
    if 0 in parities:
        out |= QType((0, 2))
    if 1 in parities:
        out |= QType((1, 3))
    return out


# ---------------------------------------------------------------------------
# tables


def triple_table() -> list[tuple[tuple[int, int, int], int, int, QType]]:
    """All 20 main-type multisets {k,l,m} with their 3-fold bracket types.

    Rows are (types, anticommutator type, commutator type, product envelope),
    in lexicographic order over nondecreasing (k,l,m).
    """
    rows = []
    for types in combinations_with_replacement(range(4), 3):
        anti = infer_kfold(ANTICOMMUTATOR, types)
        comm = infer_kfold(COMMUTATOR, types)
        rows.append((types, anti, comm, QType((anti, comm))))
    return rows


def pair_musical_table() -> list[tuple[BracketKind, int, MusicalOp]]:
    """For each kind and fixed partner type, the musical op acting on the free slot."""
    return [
        (kind, partner, infer_pair_musical(kind, partner))
        for kind in (ANTICOMMUTATOR, COMMUTATOR)
        for partner in range(4)
    ]


def threefold_fixed_table() -> list[tuple[BracketKind, tuple[int, int], MusicalOp]]:
    """3-fold brackets with two fixed main types: the musical op on the free slot."""
    rows = []
    for kind in (ANTICOMMUTATOR, COMMUTATOR):
        for pair in combinations_with_replacement(range(4), 2):
            perm = tuple(infer_kfold(kind, (pair[0], pair[1], k)) for k in range(4))
            rows.append((kind, pair, _PERM_TO_OP[perm]))
    return rows


def klein_table() -> list[list[MusicalOp]]:
    """The 4x4 composition table of I, sharp, flat, natural."""
    ops = (MusicalOp.IDENTITY, MusicalOp.SHARP, MusicalOp.FLAT, MusicalOp.NATURAL)
    return [[musical_compose(a, b) for b in ops] for a in ops]


# ---------------------------------------------------------------------------
# typed random sampling


def feasible_residues(sig: Signature) -> QType:
    """Residues mod 4 realized by some grade 0..n."""
    return QType(g % 4 for g in range(sig.n + 1))


def random_of_type(sig: Signature, rng: Random, members: QType, lo: int = -9, hi: int = 9) -> Multivector:
    """Random multivector of the given type, nonzero in every member residue.

    Raises :class:`InfeasibleDeclarationError` when some member residue has
    no grade <= n.
    """
    members = QType(members)
    if not members:
        return Multivector.zero(sig)
    missing = members - feasible_residues(sig)
    if missing:
        raise InfeasibleDeclarationError(
            f"type {members.render()} has no grade for residue(s) {sorted(missing)} in {sig}"
        )
    groups = blades_by_grade(sig.n)
    coeffs: dict[int, int] = {}
    for r in sorted(members):
        blades = [b for g in range(r, sig.n + 1, 4) for b in groups[g]]
        hit = False
        for b in blades:
            v = rng.randint(lo, hi)
            if v:
                coeffs[b] = v
                hit = True
        if not hit:
            b = rng.choice(blades)
            coeffs[b] = rng.randint(1, max(hi, 1)) * rng.choice((-1, 1))
    return Multivector(sig, coeffs)


def random_of_rank(sig: Signature, rng: Random, rank: int, lo: int = -9, hi: int = 9) -> Multivector:
    """Random nonzero homogeneous multivector of the given grade."""
    if not 0 <= rank <= sig.n:
        raise InfeasibleDeclarationError(f"rank {rank} is infeasible in {sig}")
    return random_multivector(sig, rng, grades=(rank,), lo=lo, hi=hi, ensure_nonzero=True)
