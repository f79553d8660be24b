"""Acceptance gate: one test (and one pass/fail line under ``pytest -v``)
per numbered criterion.

Exact checks only; the few wall-clock budgets that are part of a criterion
are asserted directly.
"""

import random
import time

import pytest

from toricfan import (
    are_isomorphic,
    blow_down,
    blow_up,
    canonical_key,
    convex_hull,
    f_closure,
    flop,
    is_extremal,
    is_weak_fano,
    is_fano,
    polar_dual,
    predict_pc_after,
    primitive_collections,
    primitive_relation,
    primitive_relations,
    product_fan,
    projective_space_fan,
    star_subdivide,
    unimodularly_equivalent,
    Fan,
)
from toricfan.classify import (
    del_pezzo_fan,
    match_table_labels,
    pseudo_del_pezzo_fan,
    spot_check_table1,
    table1_rows,
)
from toricfan.cli import main
from toricfan.lattice import primitive_part

from oracles import reflexive_polygons, smooth_fano_surface_fans

# 18 primitive relations of the triple blow-up of the product of two
# planes along the three invariant surfaces orb{x0,x3}, orb{x1,x4},
# orb{x2,x5} (new rays x6, x7, x8), in canonical string form
W_RELATIONS = sorted(
    [
        "x0 + x3 = x6",
        "x1 + x4 = x7",
        "x2 + x5 = x8",
        "x0 + x1 + x2 = 0",
        "x3 + x4 + x5 = 0",
        "x6 + x7 + x8 = 0",
        "x0 + x1 + x8 = x5",
        "x3 + x4 + x8 = x2",
        "x0 + x2 + x7 = x4",
        "x3 + x5 + x7 = x1",
        "x1 + x2 + x6 = x3",
        "x4 + x5 + x6 = x0",
        "x0 + x7 + x8 = x4 + x5",
        "x3 + x7 + x8 = x1 + x2",
        "x1 + x6 + x8 = x3 + x5",
        "x4 + x6 + x8 = x0 + x2",
        "x2 + x6 + x7 = x3 + x4",
        "x5 + x6 + x7 = x0 + x1",
    ]
)

# 14 primitive relations of the four-dimensional pseudo del Pezzo fan
PSEUDO_DEL_PEZZO_4_RELATIONS = sorted(
    [
        "x0 + x4 = 0",
        "x1 + x5 = 0",
        "x2 + x6 = 0",
        "x3 + x7 = 0",
        "x0 + x1 + x2 = x7 + x8",
        "x0 + x1 + x3 = x6 + x8",
        "x0 + x2 + x3 = x5 + x8",
        "x1 + x2 + x3 = x4 + x8",
        "x4 + x5 + x8 = x2 + x3",
        "x4 + x6 + x8 = x1 + x3",
        "x4 + x7 + x8 = x1 + x2",
        "x5 + x6 + x8 = x0 + x3",
        "x5 + x7 + x8 = x0 + x2",
        "x6 + x7 + x8 = x0 + x1",
    ]
)

# 25 primitive relations of the four-dimensional del Pezzo fan
DEL_PEZZO_4_RELATIONS = sorted(
    [
        "x0 + x4 = 0",
        "x1 + x5 = 0",
        "x2 + x6 = 0",
        "x3 + x7 = 0",
        "x8 + x9 = 0",
        "x0 + x1 + x2 = x7 + x8",
        "x0 + x1 + x3 = x6 + x8",
        "x0 + x2 + x3 = x5 + x8",
        "x1 + x2 + x3 = x4 + x8",
        "x0 + x1 + x9 = x6 + x7",
        "x0 + x2 + x9 = x5 + x7",
        "x0 + x3 + x9 = x5 + x6",
        "x1 + x2 + x9 = x4 + x7",
        "x1 + x3 + x9 = x4 + x6",
        "x2 + x3 + x9 = x4 + x5",
        "x4 + x5 + x6 = x3 + x9",
        "x4 + x5 + x7 = x2 + x9",
        "x4 + x6 + x7 = x1 + x9",
        "x5 + x6 + x7 = x0 + x9",
        "x4 + x5 + x8 = x2 + x3",
        "x4 + x6 + x8 = x1 + x3",
        "x4 + x7 + x8 = x1 + x2",
        "x5 + x6 + x8 = x0 + x3",
        "x5 + x7 + x8 = x0 + x2",
        "x6 + x7 + x8 = x0 + x1",
    ]
)


def test_criterion_01_surface_classification_matches_polygon_oracle(d2_graph, capsys):
    start = time.monotonic()
    assert main(["enumerate", "--dim", "2"]) == 0
    assert capsys.readouterr().out.strip().endswith("classes: 5")
    assert len(d2_graph.nodes) == 5
    oracle_keys = {canonical_key(f).hex for f in smooth_fano_surface_fans(2)}
    assert oracle_keys == set(d2_graph.nodes)
    assert time.monotonic() - start < 5.0


def test_criterion_02_threefold_classification(d3_graph, capsys):
    start = time.monotonic()
    assert main(["enumerate", "--dim", "3"]) == 0
    assert capsys.readouterr().out.strip().endswith("classes: 18")
    assert len(d3_graph.nodes) == 18
    assert time.monotonic() - start < 300.0


def test_criterion_03_fourfold_classification(d4_graph, d4_checkpoint_path, capsys):
    assert len(d4_graph.nodes) == 124
    # the CLI resumes from the finished checkpoint and reports the classes
    assert main(["enumerate", "--dim", "4", "--checkpoint", d4_checkpoint_path]) == 0
    assert capsys.readouterr().out.strip().endswith("classes: 124")


def test_criterion_04_triple_blow_up_fixture():
    fan = product_fan(projective_space_fan(2), projective_space_fan(2))
    for center in ((0, 3), (1, 4), (2, 5)):
        fan = blow_up(fan, center)
    assert sorted(str(r) for r in primitive_relations(fan)) == W_RELATIONS
    assert is_fano(fan)


def test_criterion_05_del_pezzo_fixtures():
    tv4 = pseudo_del_pezzo_fan(4)
    assert sorted(str(r) for r in primitive_relations(tv4)) == PSEUDO_DEL_PEZZO_4_RELATIONS
    v4 = del_pezzo_fan(4)
    assert sorted(str(r) for r in primitive_relations(v4)) == DEL_PEZZO_4_RELATIONS


def test_criterion_06_subdivision_prediction(d2_graph, d3_graph, d4_graph):
    for graph in (d2_graph, d3_graph, d4_graph):
        assert graph.stats["pc_up_checks"] > 0
        assert graph.stats.get("pc_up_mismatches", 0) == 0
        assert graph.stats["pc_down_checks"] > 0
        assert graph.stats.get("pc_down_mismatches", 0) == 0
    rng = random.Random(20260826)
    pool = [d3_graph.nodes[k].fan for k in sorted(d3_graph.nodes)]
    pool += [d2_graph.nodes[k].fan for k in sorted(d2_graph.nodes)]
    for _ in range(200):
        fan = rng.choice(pool)
        k = rng.randrange(2, fan.dim + 1)
        cone = rng.choice(fan.cones(k))
        # an arbitrary primitive point in the relative interior, not just
        # the generator sum
        coeffs = [rng.randint(1, 3) for _ in cone]
        x = primitive_part(
            tuple(
                sum(c * fan.rays[i][j] for c, i in zip(coeffs, cone))
                for j in range(fan.dim)
            )
        )
        sub = star_subdivide(fan, cone, x)
        assert predict_pc_after(primitive_collections(fan), cone, fan.n_rays) == (
            primitive_collections(sub)
        )


def test_criterion_07_blow_down_fano_predictor(d2_graph, d3_graph, d4_graph):
    for graph in (d2_graph, d3_graph, d4_graph):
        assert graph.stats["fano_predictor_checks"] > 0
        assert graph.stats.get("fano_predictor_mismatches", 0) == 0


def test_criterion_08_blow_down_criteria_agree(d2_graph, d3_graph, d4_graph, d2_weak_graph):
    for graph in (d2_graph, d3_graph, d4_graph, d2_weak_graph):
        assert graph.stats["criterion_equivalence_checks"] > 0
        assert graph.stats.get("criterion_equivalence_mismatches", 0) == 0


def test_criterion_09_projective_space_to_products():
    for d in (2, 3, 4):
        fan = projective_space_fan(d)
        for a1 in range(1, d):
            assert is_fano(fan)
            s1 = blow_up(fan, tuple(range(a1 + 1)))
            assert is_fano(s1)
            s2 = blow_up(s1, (0,) + tuple(range(a1 + 1, d + 1)))
            assert is_fano(s2)
            rel = next(
                r
                for r in primitive_relations(s2)
                if r.collection == (d + 1, d + 2) and r.coefficients == ((0, 1),)
            )
            result = blow_down(s2, rel, verified=True)
            assert is_fano(result)
            product = product_fan(projective_space_fan(a1), projective_space_fan(d - a1))
            assert are_isomorphic(result, product)


def test_criterion_10_gorenstein_surfaces(capsys):
    start = time.monotonic()
    assert main(["gorenstein-surfaces"]) == 0
    out = capsys.readouterr().out
    assert out.strip().splitlines()[-1] == "classes: 16"
    polygons = []
    for line in out.strip().splitlines()[:-1]:
        verts = [
            tuple(int(c) for c in chunk.strip("()").split(","))
            for chunk in line.split(": ", 1)[1].split()
        ]
        polygons.append(convex_hull(verts))
    assert len(polygons) == 16
    oracle = [convex_hull(v) for v in reflexive_polygons(4)]
    assert len(oracle) == 16
    for p in polygons:
        assert sum(1 for q in oracle if unimodularly_equivalent(p, q)) == 1
    for p in polygons:
        dual = convex_hull(polar_dual(p).vertices)
        assert len(p.boundary_lattice_points()) + len(dual.boundary_lattice_points()) == 12
    assert time.monotonic() - start < 60.0


def test_criterion_11_minimal_weak_surfaces(d2_weak_graph):
    minimal = {k for k in d2_weak_graph.nodes if not d2_weak_graph.parents_of(k)}
    expected = {
        canonical_key(projective_space_fan(2)).hex,
        canonical_key(product_fan(projective_space_fan(1), projective_space_fan(1))).hex,
        canonical_key(
            Fan(2, [(1, 0), (0, 1), (-1, 2), (0, -1)], [(0, 1), (1, 2), (2, 3), (3, 0)])
        ).hex,
    }
    assert minimal == expected


def test_criterion_12_fourfold_table(d4_graph):
    results = spot_check_table1(d4_graph)
    assert {row for row, _, _ in results} == {"4", "6", "8", "13", "117", "118", "124"}
    for row, ok, detail in results:
        assert ok, f"row ({row}): {detail}"
    # extended check: full-table label matching.  The computed graph and
    # the published table disagree on exactly four rows; each discrepancy
    # was re-verified by explicit reconstruction of the blow-ups involved,
    # and the two label pairs below are genuinely interchangeable (the
    # digraph has an automorphism swapping them).
    from toricfan.classify import _table1_anchors

    tm = match_table_labels(d4_graph, table1_rows(), _table1_anchors(d4_graph))
    assert len(tm.assignment) == 124
    assert sorted(tm.ambiguous) == [("M1", "M2"), ("R2", "R3")]
    assert sorted(tm.extra_edges) == [
        ("B3", "D10", 2),
        ("B5", "D10", 3),
        ("C2", "G6", 3),
        ("G5", "M5", 2),
        ("H10", "K3", 2),
    ]
    assert sorted(tm.missing_edges) == [
        ("B3", "D10", 3),
        ("B5", "D10", 2),
        ("H10", "K2", 2),
    ]


def test_criterion_13_duality_and_involution_suite(d3_graph):
    rng = random.Random(13)
    # (a) double polar duality on 1000 random polytopes with the origin
    # strictly inside (guaranteed by including point reflections)
    for _ in range(1000):
        dim = rng.choice((2, 3))
        pts = []
        for _ in range(rng.randint(2, 5)):
            v = tuple(rng.randint(-4, 4) for _ in range(dim))
            pts += [v, tuple(-c for c in v)]
        try:
            p = convex_hull(pts)
        except ValueError:
            continue  # degenerate sample
        back = polar_dual(polar_dual(p))
        assert set(map(tuple, back.vertices)) == set(map(tuple, p.vertices))
    # (b) flopping twice restores the fan, on every floppable weak Fano
    # fan found among blow-ups of the three-dimensional classes
    floppable = 0
    for key in sorted(d3_graph.nodes):
        fan = d3_graph.nodes[key].fan
        for cone in fan.cones(2):
            up = blow_up(fan, cone)
            if not is_weak_fano(up):
                continue
            for rel in primitive_relations(up):
                if (
                    rel.degree == 0
                    and rel.coefficients
                    and all(a == 1 for _, a in rel.coefficients)
                    and len(rel.coefficients) == len(rel.collection)
                    and is_extremal(up, rel)
                ):
                    floppable += 1
                    assert flop(flop(up, rel.collection), rel.sigma) == up
    assert floppable > 0
    # (c) blowing down a fresh blow-up restores the fan, 100 random cases
    pool = [d3_graph.nodes[k].fan for k in sorted(d3_graph.nodes)]
    for _ in range(100):
        fan = rng.choice(pool)
        k = rng.randrange(2, fan.dim + 1)
        cone = rng.choice(fan.cones(k))
        up = blow_up(fan, cone)
        rel = primitive_relation(up, cone)
        assert blow_down(up, rel, verified=True) == fan
