import itertools
from types import SimpleNamespace

import numpy as np
import pytest

from graphsig.dictionary import BLOCK_NAMES
from graphsig.graph import build_graph
from graphsig.lab import (
    VARIANTS,
    PairedResult,
    _signed_ranks,
    ablation_table,
    compare_runs,
    degree_preserving_rewire,
    mutual_knn_densify,
    paired_stats,
    run_variant,
    run_variants,
    sign_test_p,
    variant_by_name,
    wilcoxon_signed_rank,
)
from graphsig.scaffold import SearchGrids, SplitSpec, evaluate_repeats
from graphsig.synth import make_sbm_dataset

REFERENCE_DELTAS = (1.87, 0.39, 0.92, 2.97, 1.99, 0.98)


def tiny_grids():
    return SearchGrids(ks=(15,), r_maxs=(3,), etas=(0.95,), alpha_sets=((1.0,),), ws=(0.5,))


def tiny_dataset(seed=0):
    return make_sbm_dataset(
        n_per_class=25, n_classes=2, p_within=0.2, p_between=0.03,
        d=5, shift=2.5, seed=seed,
    )


def test_variant_table():
    names = [v.name for v in VARIANTS]
    assert names == [
        "full", "raw_only", "no_high_pass", "no_p3x", "no_sym",
        "pca_only", "ridge_only",
    ]
    by = {v.name: v for v in VARIANTS}
    assert by["full"].active_blocks == BLOCK_NAMES
    assert by["raw_only"].active_blocks == ("X",)
    assert set(by["no_high_pass"].active_blocks) == set(BLOCK_NAMES) - {
        "X-ProwX", "ProwX-Prow2X", "X-PsymX",
    }
    assert set(by["no_p3x"].active_blocks) == set(BLOCK_NAMES) - {"Prow3X"}
    assert set(by["no_sym"].active_blocks) == set(BLOCK_NAMES) - {
        "PsymX", "Psym2X", "X-PsymX",
    }
    assert by["pca_only"].ws == (1.0,)
    assert by["ridge_only"].ws == (0.0,)
    assert by["full"].ws is None
    with pytest.raises(KeyError, match="unknown variant"):
        variant_by_name("nope")


def test_run_variant_propagates_blocks_and_pairing():
    g, X, y = tiny_dataset()
    spec = SplitSpec(train_per_class=8, val_per_class=5, seed=11)
    out_full = run_variant(g, X, y, spec, variant_by_name("full"), n_repeats=2, grids=tiny_grids())
    out_raw = run_variant(g, X, y, spec, variant_by_name("raw_only"), n_repeats=2, grids=tiny_grids())
    assert out_raw[0].config.active_blocks == ("X",)
    assert out_full[0].config.active_blocks == BLOCK_NAMES
    for a, b in zip(out_full, out_raw):
        assert np.array_equal(a.test, b.test)  # same splits pair the repeats
        assert np.array_equal(a.train, b.train)


def test_pca_only_variant_equals_pinned_weight():
    g, X, y = tiny_dataset(seed=3)
    spec = SplitSpec(train_per_class=8, val_per_class=5, seed=4)
    got = run_variant(g, X, y, spec, variant_by_name("pca_only"), n_repeats=2, grids=tiny_grids())
    grids = SearchGrids(ks=(15,), r_maxs=(3,), etas=(0.95,), alpha_sets=((1.0,),), ws=(1.0,))
    want = evaluate_repeats(g, X, y, spec, n_repeats=2, grids=grids)
    assert [o.test_accuracy for o in got] == [o.test_accuracy for o in want]
    assert all(o.config.w == 1.0 for o in got)


def test_ablation_table_ranks():
    def fake(accs):
        return [SimpleNamespace(test_accuracy=a) for a in accs]

    results = {
        "full": fake([0.9, 0.92]),
        "worse": fake([0.5, 0.52]),
        "tied": fake([0.91, 0.91]),
    }
    rows = {r["variant"]: r for r in ablation_table(results)}
    assert rows["full"]["rank"] == 1  # mean 0.91, tie goes to insertion order
    assert rows["tied"]["rank"] == 2
    assert rows["worse"]["rank"] == 3
    assert rows["full"]["mean"] == pytest.approx(0.91)
    assert rows["full"]["std"] == pytest.approx(np.std([0.9, 0.92], ddof=1))


def test_mutual_knn_hand_example():
    # cosine top-1: 0<->1 and 2<->3 are mutual, 4 points at 1 unreciprocated
    X = np.array([
        [1.0, 0.0],
        [0.9, 0.1],
        [0.0, 1.0],
        [0.1, 0.9],
        [1.0, 1.0],
    ])
    base = build_graph(5, np.array([[0, 2]]))
    g1, added = mutual_knn_densify(base, X, k=1)
    assert added == 2
    assert {tuple(e) for e in g1.edges.tolist()} == {(0, 1), (0, 2), (2, 3)}
    g2, added2 = mutual_knn_densify(base, X, k=2)
    assert {tuple(e) for e in g2.edges.tolist()} == {
        (0, 1), (0, 2), (1, 4), (2, 3), (3, 4),
    }
    assert added2 == 4


def test_mutual_knn_zero_rows_take_no_part():
    X = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
    base = build_graph(3, np.zeros((0, 2), dtype=np.int64))
    g, added = mutual_knn_densify(base, X, k=1)
    assert added == 1
    assert {tuple(e) for e in g.edges.tolist()} == {(0, 1)}


def test_mutual_knn_errors():
    X = np.eye(3)
    g = build_graph(3, np.array([[0, 1]]))
    with pytest.raises(ValueError, match="k=3 must be smaller"):
        mutual_knn_densify(g, X, k=3)
    with pytest.raises(ValueError, match=">= 1"):
        mutual_knn_densify(g, X, k=0)
    with pytest.raises(ValueError, match="feature rows"):
        mutual_knn_densify(g, np.eye(4), k=1)


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return build_graph(n, np.array(edges))


def test_rewire_preserves_degrees():
    for seed in range(10):
        g = random_graph(30, 0.15, seed)
        g2, info = degree_preserving_rewire(g, fraction=0.2, seed=seed)
        assert info["method"] == "rewire"
        assert info["swaps"] == info["target"]
        assert np.array_equal(g2.degree, g.degree)
        assert g2.n_edges == g.n_edges


def test_rewire_deterministic():
    g = random_graph(25, 0.2, 7)
    a, _ = degree_preserving_rewire(g, fraction=0.3, seed=42)
    b, _ = degree_preserving_rewire(g, fraction=0.3, seed=42)
    assert np.array_equal(a.edges, b.edges)


def test_rewire_triangle_falls_back_to_dropout():
    g = build_graph(3, np.array([[0, 1], [0, 2], [1, 2]]))
    g2, info = degree_preserving_rewire(g, fraction=0.5, seed=0, fallback_dropout=0.15)
    assert info["method"] == "dropout"
    assert info["kept_edges"] == 2  # floor(0.85 * 3)
    assert g2.n_edges == 2
    assert info["attempts"] == 300  # budget 100 * |E|


def test_rewire_errors():
    g = build_graph(3, np.array([[0, 1]]))
    with pytest.raises(ValueError, match="fraction"):
        degree_preserving_rewire(g, fraction=0.0)
    with pytest.raises(ValueError, match="fallback_dropout"):
        degree_preserving_rewire(g, fraction=0.5, fallback_dropout=1.0)
    empty = build_graph(3, np.zeros((0, 2), dtype=np.int64))
    with pytest.raises(ValueError, match="empty"):
        degree_preserving_rewire(empty, fraction=0.5)


def test_sign_test_exact_values():
    assert sign_test_p(REFERENCE_DELTAS) == pytest.approx(0.03125)
    assert sign_test_p([1.0, -1.0]) == pytest.approx(1.0)
    assert sign_test_p([0.0, 0.0, 1.0]) == pytest.approx(1.0)
    assert sign_test_p([0.0, 0.0]) == 1.0
    assert sign_test_p([1, 1, 1, 1, 1]) == pytest.approx(2 / 32)


def brute_force_wilcoxon(deltas):
    d = np.asarray([x for x in deltas if x != 0], dtype=np.float64)
    n = len(d)
    if n == 0:
        return 0.0, 1.0
    ranks = _signed_ranks(d)
    w = float(np.sum(ranks[d > 0]))
    sums = [
        sum(ranks[i] for i in range(n) if signs[i])
        for signs in itertools.product([False, True], repeat=n)
    ]
    sums = np.asarray(sums)
    lo = float(np.mean(sums <= w + 1e-9))
    hi = float(np.mean(sums >= w - 1e-9))
    return w, min(1.0, 2.0 * min(lo, hi))


def test_wilcoxon_exact_matches_enumeration():
    rng = np.random.default_rng(0)
    for trial in range(40):
        n = int(rng.integers(2, 9))
        d = rng.integers(-3, 4, size=n).astype(float)  # ties and zeros likely
        w_got, p_got, method = wilcoxon_signed_rank(d)
        assert method == "exact"
        w_want, p_want = brute_force_wilcoxon(d)
        assert w_got == pytest.approx(w_want, abs=1e-12)
        assert p_got == pytest.approx(p_want, abs=1e-12)


def test_wilcoxon_reference_deltas():
    w, p, method = wilcoxon_signed_rank(REFERENCE_DELTAS)
    assert method == "exact"
    assert w == pytest.approx(21.0)  # all six positive
    assert p == pytest.approx(0.03125)


def test_wilcoxon_normal_path():
    rng = np.random.default_rng(1)
    d = rng.standard_normal(25) + 0.4
    w_n, p_n, method = wilcoxon_signed_rank(d)
    assert method == "normal"
    w_e, p_e, method_e = wilcoxon_signed_rank(d, exact_limit=30)
    assert method_e == "exact"
    assert w_n == w_e
    assert 0.0 <= p_n <= 1.0
    assert p_n == pytest.approx(p_e, abs=0.02)  # approximation quality


def test_paired_stats_reference_deltas():
    r = paired_stats(REFERENCE_DELTAS)
    assert r.n == 6
    assert r.wins == 6
    assert r.mean == pytest.approx(1.52, abs=0.005)
    assert r.median == pytest.approx((0.98 + 1.87) / 2)
    assert r.delta_min == pytest.approx(0.39)
    assert r.delta_max == pytest.approx(2.97)
    assert r.t_p == pytest.approx(0.0105, abs=5e-4)
    assert r.sign_p == pytest.approx(0.03125)
    assert r.wilcoxon_p == pytest.approx(0.03125)
    assert r.effect_size == pytest.approx(1.6251, abs=5e-3)
    assert r.ci_low == pytest.approx(0.538, abs=0.02)
    assert r.ci_high == pytest.approx(2.502, abs=0.02)
    assert not r.degenerate


def test_paired_stats_degenerate_cases():
    r = paired_stats([2.0, 2.0, 2.0])
    assert r.degenerate
    assert r.t_stat == np.inf
    assert r.t_p == 0.0
    assert r.effect_size == np.inf
    assert r.sign_p == pytest.approx(0.25)
    z = paired_stats([0.0, 0.0, 0.0])
    assert z.degenerate
    assert z.t_stat == 0.0
    assert z.t_p == 1.0
    assert z.wilcoxon_p == 1.0
    neg = paired_stats([-1.0, -1.0])
    assert neg.t_stat == -np.inf
    with pytest.raises(ValueError, match="at least 2"):
        paired_stats([1.0])


def test_compare_runs():
    a = [SimpleNamespace(test_accuracy=x) for x in (0.90, 0.85, 0.88)]
    b = [SimpleNamespace(test_accuracy=x) for x in (0.88, 0.84, 0.89)]
    r = compare_runs(a, b)
    assert r.deltas == pytest.approx((2.0, 1.0, -1.0))
    assert r.wins == 2
    with pytest.raises(ValueError, match="same number"):
        compare_runs(a, b[:2])


def test_run_variants_returns_all_requested():
    g, X, y = tiny_dataset(seed=9)
    spec = SplitSpec(train_per_class=8, val_per_class=5, seed=1)
    chosen = (variant_by_name("full"), variant_by_name("ridge_only"))
    results = run_variants(g, X, y, spec, variants=chosen, n_repeats=1, grids=tiny_grids())
    assert set(results) == {"full", "ridge_only"}
    assert results["ridge_only"][0].config.w == 0.0
