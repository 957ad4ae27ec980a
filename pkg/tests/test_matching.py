import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from piste.features import hamming_matrix
from piste.matching import Match, match, mutual_nearest

seeds = st.integers(0, 2**32 - 1)


def bits(n_set, offset=0):
    """Descriptor with bits offset..offset+n_set-1 set."""
    b = np.zeros(256, np.uint8)
    b[offset:offset + n_set] = 1
    return np.packbits(b)


def random_desc(seed, n):
    return np.random.default_rng(seed).integers(0, 256, (n, 32), dtype=np.uint8)


def test_copy_gives_identity_matching():
    d = random_desc(1, 50)
    dist = hamming_matrix(d, d)
    np.fill_diagonal(dist, 999)
    assert dist.min() >= 1
    ms = match(d, d.copy(), 64, 0.8)
    assert [(m.idx_prev, m.idx_curr, m.distance) for m in ms] == [(i, i, 0) for i in range(50)]


def test_empty_side():
    d = random_desc(2, 5)
    empty = np.zeros((0, 32), np.uint8)
    assert match(d, empty) == []
    assert match(empty, d) == []


def test_ratio_rejects_ambiguous_pair():
    a = bits(0)[None]
    curr = np.stack([bits(10), bits(11, 100)])
    assert hamming_matrix(a, curr).tolist() == [[10, 11]]
    assert match(a, curr, 64, 0.8) == []
    assert match(a, curr, 64, 0.95) == [Match(0, 0, 10)]


def test_single_candidate_passes_ratio():
    assert match(bits(0)[None], bits(30)[None], 64, 0.5) == [Match(0, 0, 30)]


def test_duplicate_zero_distances_rejected():
    d = bits(5)[None]
    assert match(d, np.concatenate([d, d]), 64, 1.0) == []


def test_max_distance_cut():
    assert match(bits(0)[None], bits(65)[None], 64, 0.8) == []
    assert match(bits(0)[None], bits(64)[None], 64, 0.8) == [Match(0, 0, 64)]


def noisy_pair(seed, n, m, flips):
    rng = np.random.default_rng(seed)
    a = random_desc(seed, n)
    b = np.unpackbits(a[rng.permutation(n)[:m]], axis=1)
    mask = rng.random(b.shape) < flips
    b = np.packbits(b ^ mask, axis=1)
    return a, np.concatenate([b, random_desc(seed + 1, 5)])


@given(seeds, st.integers(1, 40), st.integers(1, 40), st.floats(0.0, 0.3))
def test_match_contract(seed, n, m, flips):
    a, b = noisy_pair(seed, max(n, m), m, flips)
    a = a[:n]
    ms = match(a, b, 100, 0.9)
    prev = [x.idx_prev for x in ms]
    curr = [x.idx_curr for x in ms]
    assert len(set(prev)) == len(prev) and len(set(curr)) == len(curr)
    keys = [(x.distance, x.idx_prev, x.idx_curr) for x in ms]
    assert keys == sorted(keys)
    dist = hamming_matrix(a, b)
    for x in ms:
        assert dist[x.idx_prev, x.idx_curr] == x.distance <= 100
        assert dist[x.idx_prev].min() == x.distance and dist[:, x.idx_curr].min() == x.distance


@given(seeds, st.integers(1, 30), st.integers(1, 30))
def test_mutual_nearest_symmetric(seed, n, m):
    dist = np.random.default_rng(seed).integers(0, 20, (n, m))
    r1, c1 = mutual_nearest(dist)
    r2, c2 = mutual_nearest(dist.T)
    assert sorted(zip(r1.tolist(), c1.tolist())) == sorted(zip(c2.tolist(), r2.tolist()))


@given(seeds, st.integers(0, 256), st.integers(0, 256))
def test_tightening_max_distance_never_adds(seed, d1, d2):
    a, b = noisy_pair(seed, 30, 20, 0.2)
    lo, hi = sorted((d1, d2))
    tight = {(x.idx_prev, x.idx_curr) for x in match(a, b, lo, 0.8)}
    loose = {(x.idx_prev, x.idx_curr) for x in match(a, b, hi, 0.8)}
    assert tight <= loose
