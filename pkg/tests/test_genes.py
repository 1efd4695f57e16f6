import gzip
import statistics

import numpy as np
import pytest

from sppcso.errors import (BadSplit, EmptyAfterFilter, KTooLarge, MalformedFile, MissingTarget,
                           NonNumericValue, NonpositiveValue)
from sppcso.genes import (ExpressionMatrix, filter_probes, load_expression, read_table,
                          run_gene_experiment, split_train_test, top_variance)


def write_table(path, probes, samples, values, sep=","):
    lines = [sep.join(["sample"] + list(probes))]
    for s, row in zip(samples, values):
        lines.append(sep.join([s] + [str(v) for v in row]))
    path.write_text("\n".join(lines) + "\n")
    return path


def test_load_expression_splits_target(tmp_path):
    f = write_table(tmp_path / "e.csv", ["a", "b", "c"], ["s1", "s2"], [[1, 2, 3], [4, 5, 6]])
    expr, y = load_expression(f, "b")
    assert expr.probe_ids == ("a", "c")
    assert y.tolist() == [2.0, 5.0]
    np.testing.assert_array_equal(expr.values, [[1, 3], [4, 6]])
    with pytest.raises(MissingTarget):
        load_expression(f, "zz")


def test_parse_errors_report_positions(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("sample,a,b\ns1,1,2\ns2,NA,3\n")
    with pytest.raises(NonNumericValue) as exc:
        read_table(f)
    assert "NA" in str(exc.value) and exc.value.row == 3
    f.write_text("sample,a,b\ns1,1,2\ns2,3\n")
    with pytest.raises(MalformedFile) as exc:
        read_table(f)
    assert exc.value.line == 3


def test_gzip_and_tab_input(tmp_path):
    text = "sample\ta\tb\ns1\t1\t2\ns2\t3\t4\n"
    f = tmp_path / "e.tsv.gz"
    with gzip.open(f, "wt") as fh:
        fh.write(text)
    probes, samples, values = read_table(f)
    assert probes == ["a", "b"] and samples == ["s1", "s2"] and values.shape == (2, 2)


def test_expression_matrix_validation():
    with pytest.raises(MalformedFile):
        ExpressionMatrix([[1.0, 2.0]], ["a", "a"], ["s"])
    with pytest.raises(Exception):
        ExpressionMatrix([[1.0, np.nan]], ["a", "b"], ["s"])


def test_filter_rules_small_cases():
    # columns: constant at the global minimum / 10 -> 25 / wide range / flat and high
    v = np.array([[1.0, 10.0, 5.0, 40.0],
                  [1.0, 25.0, 50.0, 41.0],
                  [1.0, 20.0, 30.0, 42.0]])
    out = filter_probes(ExpressionMatrix(v, ["lo", "mid", "wide", "flat"], ["x", "y", "z"]))
    assert out.probe_ids == ("mid", "wide")


def test_filter_nonpositive_values():
    v = np.array([[-1.0, 0.5], [3.0, 0.6], [2.0, 4.0]])
    expr = ExpressionMatrix(v, ["a", "b"], ["x", "y", "z"])
    with pytest.raises(NonpositiveValue):
        filter_probes(expr)
    with pytest.warns(RuntimeWarning):
        out = filter_probes(expr, spread_fallback=True)
    assert out.probe_ids == ("a", "b")


def test_filter_can_empty_everything():
    v = np.full((3, 2), 5.0) + np.array([[0.0, 0.1]])
    with pytest.raises(EmptyAfterFilter):
        filter_probes(ExpressionMatrix(v, ["a", "b"], ["x", "y", "z"]))


def test_top_variance_examples():
    rng = np.random.default_rng(0)
    base = rng.standard_normal((30, 3))
    base = (base - base.mean(0)) / base.std(0, ddof=1)
    v = base * np.sqrt([5.0, 1.0, 3.0])
    expr = ExpressionMatrix(v, ["p1", "p2", "p3"], [str(i) for i in range(30)])
    assert top_variance(expr, 2).probe_ids == ("p1", "p3")
    assert top_variance(expr, 3).probe_ids == expr.probe_ids
    once = top_variance(expr, 2)
    assert top_variance(once, 2).probe_ids == once.probe_ids
    with pytest.raises(KTooLarge):
        top_variance(expr, 4)


def test_split_examples():
    tr, te = split_train_test(120, 60, seed=4)
    assert len(tr) == len(te) == 60
    assert sorted(np.concatenate([tr, te]).tolist()) == list(range(120))
    tr2, te2 = split_train_test(120, 60, seed=4)
    assert np.array_equal(tr, tr2) and np.array_equal(te, te2)
    tr3, te3 = split_train_test(120, 60, seed=4, resample=True)
    assert len(te3) == 60 and not set(te3) & set(tr3)
    with pytest.raises(BadSplit):
        split_train_test(10, 10, seed=0)


def synthetic_expression(seed=0):
    """120 x 3001 positive matrix whose filter survivors are known by construction.

    Probe kinds (all values positive):
      low     max < 1.5, far below the 25% quantile of all values
      flat    values in [60, 90] with one 95: ratio < 2
      varied  values in [20, 95] with one 20 and one 95: ratio 4.75
      edge2   ratio exactly 2 (47.5 -> 95): kept
      edge199 ratio 1.99: dropped
    Column 0 is the target probe.
    """
    rng = np.random.default_rng(seed)
    n, p = 120, 3000
    kinds = np.array(["low"] * 500 + ["flat"] * 1000 + ["varied"] * 1498 + ["edge2", "edge199"])
    rng.shuffle(kinds)
    V = np.empty((n, p))
    for j, kind in enumerate(kinds):
        if kind == "low":
            col = rng.uniform(1.0, 1.4, n)
        elif kind == "flat":
            col = rng.uniform(60, 90, n)
            col[rng.integers(n)] = 95.0
        elif kind == "varied":
            col = np.clip(rng.uniform(20, 95, n) * rng.uniform(0.3, 1.0), 20, 95)
            i, k = rng.choice(n, 2, replace=False)
            col[i], col[k] = 20.0, 95.0
        elif kind == "edge2":
            col = rng.uniform(47.5, 95, n)
            col[0], col[1] = 47.5, 95.0
        else:
            col = rng.uniform(95 / 1.99, 95, n)
            col[0], col[1] = 95 / 1.99, 95.0
        V[:, j] = col
    signal = V[:, np.flatnonzero(kinds == "varied")[:3]]
    target = signal @ np.array([1.0, -0.5, 0.25]) + rng.normal(0, 1, n) + 100
    probes = ["target"] + [f"g{j:04d}" for j in range(p)]
    values = np.column_stack([target, V])
    return probes, [f"s{i:03d}" for i in range(n)], values, kinds


def test_synthetic_pipeline_hand_oracle(tmp_path):
    probes, samples, values, kinds = synthetic_expression()
    f = write_table(tmp_path / "expr.csv", probes, samples, values)
    expr, y = load_expression(f, "target")
    assert expr.values.shape == (120, 3000) and "target" not in expr.probe_ids
    kept = filter_probes(expr)
    want = {f"g{j:04d}" for j, k in enumerate(kinds) if k in ("varied", "edge2")}
    assert set(kept.probe_ids) == want and kept.n_probes == 1499
    assert list(kept.probe_ids) == sorted(kept.probe_ids)  # original order kept

    # variance ranking via the standard library, ties broken by id
    var = {pid: statistics.variance(kept.values[:, j].tolist())
           for j, pid in enumerate(kept.probe_ids)}
    top = sorted(sorted(var, key=lambda pid: (-var[pid], pid))[:200])
    screened = top_variance(kept, 200)
    assert list(screened.probe_ids) == top
    assert screened.n_probes <= kept.n_probes <= expr.n_probes

    tr, te = split_train_test(120, 60, seed=1)
    assert len(tr) == 60 and len(te) == 60 and not set(tr) & set(te)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_gene_experiment_end_to_end(tmp_path):
    probes, samples, values, _ = synthetic_expression(seed=1)
    f = write_table(tmp_path / "expr.csv", probes, samples, values)
    expr, y = load_expression(f, "target")
    screened = top_variance(filter_probes(expr), 60)
    kw = dict(n_reps=2, seed=3, k=3, n_lambda=5, thetas=[0.5])
    a = run_gene_experiment(screened, y, ["lasso", "sppcso"], **kw)
    b = run_gene_experiment(screened, y, ["lasso", "sppcso"], threads=2, **kw)
    assert a.summary == b.summary and a.repetitions == b.repetitions
    assert [s["method"] for s in a.summary] == ["lasso", "sppcso"]
    for s in a.summary:
        assert s["mape_train"] >= 0 and s["mape_test"] >= 0 and 0 <= s["nnz"] <= 60
        assert set(s) == {"method", "mape_train", "mape_test", "nnz"}
    assert len(a.repetitions) == 4
