import random

import pytest
from hypothesis import given, settings, strategies as st

from toricfan import (
    Fan,
    are_isomorphic,
    blow_up,
    canonical_key,
    f_closure,
    fano_seeds,
    is_fano,
    is_pseudo_symmetric,
    primitive_relations,
    product_fan,
    projective_space_fan,
)
from toricfan.classify import (
    del_pezzo_fan,
    load_graph,
    named_fano_4folds,
    pseudo_del_pezzo_fan,
    pseudo_symmetric_catalog,
)
from toricfan.lattice import det, mat_mul_vec


def _random_unimodular(rng, dim):
    # product of random elementary shears and coordinate swaps
    m = [[int(i == j) for j in range(dim)] for i in range(dim)]
    for _ in range(6):
        i, j = rng.sample(range(dim), 2)
        c = rng.randint(-2, 2)
        for k in range(dim):
            m[i][k] += c * m[j][k]
        if rng.random() < 0.3:
            m[i], m[j] = m[j], m[i]
    assert abs(det(m)) == 1
    return m


POOL = [
    projective_space_fan(2),
    projective_space_fan(3),
    del_pezzo_fan(2),
    pseudo_del_pezzo_fan(2),
    product_fan(projective_space_fan(1), projective_space_fan(2)),
    blow_up(projective_space_fan(3), (0, 1)),
]


@given(st.integers(0, len(POOL) - 1), st.integers(0, 10**9))
@settings(max_examples=60, deadline=None)
def test_canonical_key_is_an_isomorphism_invariant(idx, seed):
    rng = random.Random(seed)
    fan = POOL[idx]
    m = _random_unimodular(rng, fan.dim)
    perm = list(range(fan.n_rays))
    rng.shuffle(perm)
    rays = [tuple(int(c) for c in mat_mul_vec(m, fan.rays[perm[i]])) for i in range(fan.n_rays)]
    inverse = {perm[i]: i for i in range(fan.n_rays)}
    cones = [tuple(inverse[i] for i in cone) for cone in fan.max_cones]
    other = Fan(fan.dim, rays, cones)
    assert canonical_key(other) == canonical_key(fan)
    assert are_isomorphic(fan, other, verify=True)


def test_distinct_classes_have_distinct_keys():
    keys = {canonical_key(fan).hex for fan in POOL}
    assert len(keys) == len(POOL)


def test_are_isomorphic_rejects_different_fans():
    assert not are_isomorphic(projective_space_fan(2), del_pezzo_fan(2))
    assert not are_isomorphic(
        product_fan(projective_space_fan(1), projective_space_fan(1)),
        blow_up(projective_space_fan(2), (0, 1)),
    )


def test_del_pezzo_fixtures():
    v2 = del_pezzo_fan(2)
    assert v2.n_rays == 6 and is_fano(v2) and is_pseudo_symmetric(v2)
    tv2 = pseudo_del_pezzo_fan(2)
    assert tv2.n_rays == 5 and is_fano(tv2) and is_pseudo_symmetric(tv2)
    v4 = del_pezzo_fan(4)
    assert v4.n_rays == 10 and is_fano(v4) and is_pseudo_symmetric(v4)
    tv4 = pseudo_del_pezzo_fan(4)
    assert tv4.n_rays == 9 and is_fano(tv4) and is_pseudo_symmetric(tv4)
    with pytest.raises(ValueError):
        del_pezzo_fan(3)


def test_pseudo_symmetric_catalog_members_are_pseudo_symmetric():
    for d in (2, 3, 4):
        for fan in pseudo_symmetric_catalog(d):
            assert fan.dim == d
            assert is_pseudo_symmetric(fan)
            assert is_fano(fan)


def test_fano_seeds_start_from_projective_space():
    for d in (2, 3, 4):
        seeds = fano_seeds(d)
        assert are_isomorphic(seeds[0], projective_space_fan(d))
        assert len({canonical_key(s).hex for s in seeds}) == len(seeds)


def test_closure_is_seed_independent(d2_graph):
    # seeding with a blow-up instead of the plane itself finds the same classes
    alt = f_closure([blow_up(projective_space_fan(2), (0, 1))], 2, "fano")
    assert set(alt.nodes) == set(d2_graph.nodes)
    assert alt.edges == d2_graph.edges


def test_closure_records_blow_up_edges(d2_graph):
    p2 = canonical_key(projective_space_fan(2)).hex
    up = canonical_key(blow_up(projective_space_fan(2), (0, 1))).hex
    assert (p2, up, 2) in d2_graph.edges


def test_checkpoint_resume_reproduces_graph(tmp_path, d3_graph):
    path = tmp_path / "d3.json"
    first = f_closure(fano_seeds(3), 3, "fano", checkpoint=str(path), checkpoint_interval=5)
    resumed = f_closure(fano_seeds(3), 3, "fano", checkpoint=str(path))
    for graph in (first, resumed):
        assert set(graph.nodes) == set(d3_graph.nodes)
        assert graph.edges == d3_graph.edges
    loaded = load_graph(str(path))
    assert set(loaded.nodes) == set(d3_graph.nodes)


def test_threaded_closure_matches_serial(d3_graph):
    threaded = f_closure(fano_seeds(3), 3, "fano", threads=4)
    assert set(threaded.nodes) == set(d3_graph.nodes)
    assert threaded.edges == d3_graph.edges


def test_named_4folds_are_fano():
    named = named_fano_4folds()
    assert len({canonical_key(f).hex for f in named.values()}) == len(named)
    for fan in named.values():
        assert fan.dim == 4
        assert is_fano(fan)
