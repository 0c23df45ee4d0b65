import itertools
import random

import pytest

from quatype.algebra import ApproxMultivector, Multivector, Signature, random_multivector
from quatype.brackets import kfold
from quatype.qtypes import (
    ANTICOMMUTATOR,
    COMMUTATOR,
    InfeasibleDeclarationError,
    MusicalOp,
    QType,
    as_kind,
    infer_kfold,
    infer_kfold_set,
    infer_pair,
    infer_pair_musical,
    infer_product,
    infer_product_set,
    klein_table,
    musical_apply,
    musical_compose,
    pair_musical_table,
    qtype_of,
    qtype_of_approx,
    random_of_rank,
    random_of_type,
    threefold_fixed_table,
    triple_table,
)

I, SHARP, FLAT, NATURAL = MusicalOp.IDENTITY, MusicalOp.SHARP, MusicalOp.FLAT, MusicalOp.NATURAL


# ---------------------------------------------------------------------------
# QType basics


def test_qtype_construction_and_render():
    assert QType({0, 2}).render() == "0~2~"
    assert QType().render() == "⊥"
    assert QType.parse("1~3~") == QType({1, 3})
    assert QType.parse("13") == QType({1, 3})
    assert QType.parse("⊥") == QType()
    with pytest.raises(ValueError):
        QType({4})
    with pytest.raises(ValueError):
        QType.parse("5~")
    assert (QType({0}) | QType({2})) == QType({0, 2})
    assert isinstance(QType({0}) | QType({2}), QType)


def test_qtype_of_examples():
    s4 = Signature(4, 0)
    u = Multivector.scalar(s4, 1) + Multivector.blade(s4, [1, 2, 3, 4])
    assert qtype_of(u) == QType({0})
    v = Multivector.generator(s4, 1) + Multivector.blade(s4, [2, 3])
    assert qtype_of(v) == QType({1, 2})
    assert qtype_of(Multivector.zero(s4)) == QType()
    # zero's type is contained in every other type
    for members in itertools.chain.from_iterable(
        itertools.combinations(range(4), r) for r in range(1, 5)
    ):
        assert qtype_of(Multivector.zero(s4)) <= QType(members)


def test_qtype_of_approx_threshold():
    s2 = Signature(2, 0)
    u = ApproxMultivector(s2, {0: 1.0, 0b01: 1e-13})
    assert qtype_of_approx(u) == QType({0})
    v = ApproxMultivector(s2, {0: 1e9, 0b01: 1.0})  # noise relative to 1e9
    assert qtype_of_approx(v) == QType({0})
    w = ApproxMultivector(s2, {0: 1.0, 0b01: 1e-3})
    assert qtype_of_approx(w) == QType({0, 1})


# ---------------------------------------------------------------------------
# musical operations


def test_musical_values():
    # the defining permutation table
    assert [SHARP.apply_residue(k) for k in range(4)] == [2, 3, 0, 1]
    assert [FLAT.apply_residue(k) for k in range(4)] == [1, 0, 3, 2]
    assert [NATURAL.apply_residue(k) for k in range(4)] == [3, 2, 1, 0]
    assert musical_apply(SHARP, QType({0})) == QType({2})
    assert musical_apply(FLAT, QType({2})) == QType({3})
    assert musical_apply(NATURAL, QType({1, 3})) == QType({0, 2})


def test_klein_composition_table():
    expected = {
        (I, I): I, (SHARP, SHARP): I, (FLAT, FLAT): I, (NATURAL, NATURAL): I,
        (I, SHARP): SHARP, (SHARP, I): SHARP, (FLAT, NATURAL): SHARP, (NATURAL, FLAT): SHARP,
        (I, FLAT): FLAT, (FLAT, I): FLAT, (SHARP, NATURAL): FLAT, (NATURAL, SHARP): FLAT,
        (I, NATURAL): NATURAL, (NATURAL, I): NATURAL, (SHARP, FLAT): NATURAL, (FLAT, SHARP): NATURAL,
    }
    for (a, b), want in expected.items():
        assert musical_compose(a, b) == want, (a, b)
    # commutative, self-inverse, I neutral: all 16 pairs
    ops = (I, SHARP, FLAT, NATURAL)
    for a in ops:
        assert musical_compose(a, a) == I
        assert musical_compose(a, I) == a
        for b in ops:
            assert musical_compose(a, b) == musical_compose(b, a)
    grid = klein_table()
    assert grid[1][2] == NATURAL  # sharp o flat


def test_musical_apply_is_lattice_automorphism():
    subsets = [QType(c) for r in range(5) for c in itertools.combinations(range(4), r)]
    for op in MusicalOp:
        images = {musical_apply(op, t) for t in subsets}
        assert len(images) == len(subsets)
        for a in subsets:
            for b in subsets:
                assert musical_apply(op, a | b) == musical_apply(op, a) | musical_apply(op, b)
                assert (a <= b) == (musical_apply(op, a) <= musical_apply(op, b))


# ---------------------------------------------------------------------------
# pair inference: the twenty two-operand cells


PAIR_COMM = {
    # [k, k] in 2, [k, 2] in k, [0,1] in 3, [0,3] in 1, [1,3] in 0
    (0, 0): 2, (1, 1): 2, (2, 2): 2, (3, 3): 2,
    (0, 2): 0, (1, 2): 1, (3, 2): 3,
    (0, 1): 3, (0, 3): 1, (1, 3): 0,
}
PAIR_ANTI = {
    # {k, k} in 0, {k, 0} in k, {1,2} in 3, {1,3} in 2, {2,3} in 1
    (0, 0): 0, (1, 1): 0, (2, 2): 0, (3, 3): 0,
    (1, 0): 1, (2, 0): 2, (3, 0): 3,
    (1, 2): 3, (1, 3): 2, (2, 3): 1,
}


def test_infer_pair_reproduces_all_cells():
    for (k, l), want in PAIR_COMM.items():
        assert infer_pair(COMMUTATOR, k, l) == want
        assert infer_pair(COMMUTATOR, l, k) == want
    for (k, l), want in PAIR_ANTI.items():
        assert infer_pair(ANTICOMMUTATOR, k, l) == want
        assert infer_pair(ANTICOMMUTATOR, l, k) == want


def test_infer_pair_examples():
    assert infer_pair(COMMUTATOR, 1, 1) == 2
    assert infer_pair(ANTICOMMUTATOR, 1, 2) == 3
    assert infer_pair(COMMUTATOR, 0, 3) == 1
    assert infer_pair("comm", 0, 3) == 1
    with pytest.raises(ValueError):
        infer_pair(COMMUTATOR, 4, 0)
    with pytest.raises(ValueError):
        as_kind("braid")


def test_infer_pair_musical_mapping():
    anti_expected = {0: I, 2: SHARP, 1: FLAT, 3: NATURAL}
    comm_expected = {2: I, 0: SHARP, 3: FLAT, 1: NATURAL}
    for partner in range(4):
        assert infer_pair_musical(ANTICOMMUTATOR, partner) == anti_expected[partner]
        assert infer_pair_musical(COMMUTATOR, partner) == comm_expected[partner]
    # applying the op reproduces infer_pair on every slot
    for kind in (ANTICOMMUTATOR, COMMUTATOR):
        for partner in range(4):
            op = infer_pair_musical(kind, partner)
            for k in range(4):
                assert op.apply_residue(k) == infer_pair(kind, k, partner)
    rows = pair_musical_table()
    assert len(rows) == 8


# ---------------------------------------------------------------------------
# k-fold inference


def test_infer_kfold_examples():
    assert infer_kfold(ANTICOMMUTATOR, (0, 1, 2)) == 3
    assert infer_kfold(COMMUTATOR, (0, 1, 2)) == 1
    assert infer_kfold(ANTICOMMUTATOR, (3, 3, 3)) == 3
    assert infer_kfold(COMMUTATOR, (3, 3, 3)) == 1
    assert infer_kfold(COMMUTATOR, (1, 1, 1, 1)) == 2
    with pytest.raises(ValueError):
        infer_kfold(COMMUTATOR, (1,))


def test_infer_kfold_matches_pair_and_triple_formulas():
    for k in range(4):
        for l in range(4):
            assert infer_kfold(COMMUTATOR, (k, l)) == infer_pair(COMMUTATOR, k, l)
            assert infer_kfold(ANTICOMMUTATOR, (k, l)) == infer_pair(ANTICOMMUTATOR, k, l)
            for m in range(4):
                eps = (-1) ** (k * l + k * m + l * m)
                assert infer_kfold(COMMUTATOR, (k, l, m)) == (k + l + m + 1 + eps) % 4
                assert infer_kfold(ANTICOMMUTATOR, (k, l, m)) == (k + l + m + 1 - eps) % 4


def test_infer_kfold_permutation_invariant():
    rng = random.Random(0)
    for types in itertools.product(range(4), repeat=3):
        for perm in itertools.permutations(types):
            assert infer_kfold(COMMUTATOR, types) == infer_kfold(COMMUTATOR, perm)
    for _ in range(100):
        types = [rng.randrange(4) for _ in range(rng.randint(2, 6))]
        shuffled = types[:]
        rng.shuffle(shuffled)
        for kind in (COMMUTATOR, ANTICOMMUTATOR):
            assert infer_kfold(kind, types) == infer_kfold(kind, shuffled)


def test_infer_product():
    assert infer_product((1, 2)) == QType({1, 3})
    assert infer_product((0, 0)) == QType({0, 2})
    with pytest.raises(ValueError):
        infer_product(())
    # union of both bracket kinds equals the product envelope
    for k in range(2, 6):
        for types in itertools.product(range(4), repeat=k):
            union = QType({infer_kfold(COMMUTATOR, types), infer_kfold(ANTICOMMUTATOR, types)})
            assert union == infer_product(types), types


def test_uvvu_lands_in_zero_bar():
    for k in range(4):
        for l in range(4):
            assert infer_kfold(ANTICOMMUTATOR, (k, l, l, k)) == 0


def test_infer_set_versions_match_bruteforce():
    rng = random.Random(9)
    subsets = [QType(c) for r in range(1, 5) for c in itertools.combinations(range(4), r)]
    for _ in range(120):
        k = rng.randint(2, 4)
        sets = [rng.choice(subsets) for _ in range(k)]
        for kind in (COMMUTATOR, ANTICOMMUTATOR):
            brute = QType(
                infer_kfold(kind, combo) for combo in itertools.product(*[sorted(s) for s in sets])
            )
            assert infer_kfold_set(kind, sets) == brute, (kind, sets)
        brute_prod = QType()
        for combo in itertools.product(*[sorted(s) for s in sets]):
            brute_prod |= infer_product(combo)
        assert infer_product_set(sets) == brute_prod
    # a zero operand annihilates everything
    assert infer_kfold_set(COMMUTATOR, [QType({1}), QType()]) == QType()
    assert infer_product_set([QType(), QType({2})]) == QType()


# ---------------------------------------------------------------------------
# the twenty-row table of threefold brackets


KNOWN_TRIPLE_TABLE = {
    (0, 0, 0): (0, 2), (0, 0, 1): (1, 3), (0, 0, 2): (2, 0), (0, 0, 3): (3, 1),
    (0, 1, 1): (0, 2), (0, 1, 2): (3, 1), (0, 1, 3): (2, 0), (0, 2, 2): (0, 2),
    (0, 2, 3): (1, 3), (0, 3, 3): (0, 2), (1, 1, 1): (1, 3), (1, 1, 2): (2, 0),
    (1, 1, 3): (3, 1), (1, 2, 2): (1, 3), (1, 2, 3): (0, 2), (1, 3, 3): (1, 3),
    (2, 2, 2): (2, 0), (2, 2, 3): (3, 1), (2, 3, 3): (2, 0), (3, 3, 3): (3, 1),
}


def test_triple_table_known_values():
    rows = triple_table()
    assert len(rows) == 20
    assert [r[0] for r in rows] == sorted(KNOWN_TRIPLE_TABLE)
    for types, anti, comm, union in rows:
        want_anti, want_comm = KNOWN_TRIPLE_TABLE[types]
        assert (anti, comm) == (want_anti, want_comm), types
        assert union == QType({anti, comm})
        assert union in (QType({0, 2}), QType({1, 3}))


def test_triple_table_spot_rows():
    rows = {r[0]: r for r in triple_table()}
    assert rows[(0, 2, 3)][1:3] == (1, 3)
    assert rows[(1, 2, 2)][1:3] == (1, 3)
    assert rows[(0, 0, 0)][1:3] == (0, 2)


def test_threefold_fixed_table_matches_musical_rows():
    anti_expected = {
        (0, 0): I, (1, 1): I, (2, 2): I, (3, 3): I,
        (0, 2): SHARP, (1, 3): SHARP,
        (0, 1): FLAT, (2, 3): FLAT,
        (0, 3): NATURAL, (1, 2): NATURAL,
    }
    comm_expected = {pair: musical_compose(SHARP, op) for pair, op in anti_expected.items()}
    rows = threefold_fixed_table()
    assert len(rows) == 20
    for kind, pair, op in rows:
        want = anti_expected[pair] if kind is ANTICOMMUTATOR else comm_expected[pair]
        assert op == want, (kind, pair)


# ---------------------------------------------------------------------------
# soundness spot checks (the exhaustive sweep lives in the acceptance suite)


def test_concrete_brackets_obey_inference():
    rng = random.Random(21)
    for sig in [Signature(3, 0), Signature(2, 2), Signature(1, 4)]:
        feasible = [t for t in range(4) if any(g % 4 == t for g in range(sig.n + 1))]
        for _ in range(30):
            k = rng.randint(2, 4)
            types = [rng.choice(feasible) for _ in range(k)]
            us = [random_of_type(sig, rng, QType({t})) for t in types]
            for kind in (COMMUTATOR, ANTICOMMUTATOR):
                got = qtype_of(kfold(kind, us))
                assert got <= QType({infer_kfold(kind, types)}), (sig, kind, types)


def test_parity_coarsening_of_product_envelope():
    rng = random.Random(33)
    sig = Signature(3, 1)
    for _ in range(40):
        k = rng.randint(2, 5)
        types = [rng.choice((0, 1, 2, 3)) for _ in range(k)]
        us = [random_of_type(sig, rng, QType({t})) for t in types]
        prod = us[0]
        for u in us[1:]:
            prod = prod * u
        envelope = infer_product(types)
        assert qtype_of(prod) <= envelope
        from quatype.algebra import parity_split

        even, odd = parity_split(prod)
        if envelope == QType({0, 2}):
            assert not odd
        else:
            assert not even


# ---------------------------------------------------------------------------
# typed sampling


def test_random_of_type_covers_residues():
    rng = random.Random(2)
    sig = Signature(4, 1)
    u = random_of_type(sig, rng, QType({1, 2}))
    assert qtype_of(u) == QType({1, 2})
    assert random_of_type(sig, rng, QType()) == Multivector.zero(sig)
    with pytest.raises(InfeasibleDeclarationError):
        random_of_type(Signature(2, 0), rng, QType({3}))
    v = random_of_rank(sig, rng, 3)
    assert v.grades() == frozenset({3})
    with pytest.raises(InfeasibleDeclarationError):
        random_of_rank(Signature(3, 0), rng, 5)


def test_random_of_type_deterministic_per_seed():
    sig = Signature(3, 1)
    a = random_of_type(sig, random.Random(99), QType({0, 3}))
    b = random_of_type(sig, random.Random(99), QType({0, 3}))
    assert a == b
