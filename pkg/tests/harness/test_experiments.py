import json
from fractions import Fraction

import numpy as np
import pytest

from spheremax.errors import UnknownExperimentError
from spheremax.harness.config import default_config
from spheremax.harness.experiments import EXPERIMENTS, ExperimentResult, _jsonable, get_experiment

ALL_EXPERIMENTS = [
    "region-table", "dsigma-decay", "symbol-sup-decay", "symbol-l2-growth", "partition-check",
    "cov-identity", "avg-crosscheck", "maximal-sanity", "squarefn-bound", "opnorm-trend",
    "cex-growth", "cex-divergence", "monotone-lemma",
]


def run_experiment(name, **overrides):
    config = default_config(name, **overrides)
    return get_experiment(name).func(config)


def test_registry():
    assert list(EXPERIMENTS) == ALL_EXPERIMENTS
    assert all(e.description for e in EXPERIMENTS.values())


def test_unknown_experiment():
    with pytest.raises(UnknownExperimentError):
        get_experiment("no-such-experiment")


def test_gating_semantics():
    result = ExperimentResult("demo", ["x"])
    result.check("trend", False, 1.0, gating=False)
    assert result.passed
    result.check("verdict", True, np.float64(0.5))
    assert result.passed
    result.check("bound", False, Fraction(1, 3), "0")
    assert not result.passed
    assert [c.name for c in result.failures()] == ["bound"]
    assert result.checks[2].value == "1/3"
    assert isinstance(result.checks[1].value, float)


def test_jsonable():
    data = {1: np.array([1, 2]), 'f': Fraction(6, 11), 'b': np.bool_(True), 'i': np.int64(3)}
    assert json.dumps(_jsonable(data), sort_keys=True) == '{"1": [1, 2], "b": true, "f": "6/11", "i": 3}'


def test_region_table():
    result = run_experiment("region-table", n=8)
    assert result.passed, result.failures()
    assert (8, "delta_n", "1/10") in result.rows
    assert (8, "P3", "(6/11, 6/11, 12/11)") in result.rows
    assert sum(result.summary["n=8"]['counts'].values()) == 10 ** 6


def test_partition_check():
    result = run_experiment("partition-check", n=1, j_min=1, j_max=4)
    assert result.passed, result.failures()
    assert [row[1] for row in result.rows if row[0] == "split"] == [1, 2, 3, 4]


def test_monotone_lemma():
    result = run_experiment("monotone-lemma")
    assert result.passed, result.failures()
    assert len(result.rows) == 20


def test_monotone_lemma_reproducible():
    first = run_experiment("monotone-lemma", seed=5)
    second = run_experiment("monotone-lemma", seed=5)
    assert first.rows == second.rows


def test_cex_divergence():
    result = run_experiment("cex-divergence")
    assert result.passed, result.failures()
    divergent = result.summary['divergent']['values']
    control = result.summary['control']['values']
    assert divergent[-1] > divergent[0]
    assert control[-1] == pytest.approx(control[-2], rel=1e-6)


def test_maximal_sanity_small_grid():
    result = run_experiment("maximal-sanity", grid_n=32, grid_l=16.0)
    assert len(result.rows) == 5
    checks = {c.name: c for c in result.checks}
    assert checks["refining t_grid never lowers M"].passed


def test_avg_crosscheck_one_dimension():
    result = run_experiment("avg-crosscheck", n=1)
    checks = {c.name: c for c in result.checks}
    for name in ("n=1: bilinearity", "n=1: symmetry in (f, g)", "n=1: dilation covariance"):
        assert checks[name].passed, checks[name]
    assert [row[1] for row in result.rows] == [0.5, 1.0, 2.0]


def test_symbol_sup_decay_checks_difference_quotients():
    result = run_experiment("symbol-sup-decay", n=1, j_min=2, j_max=5)
    checks = {c.name: c for c in result.checks}
    assert checks["difference quotients"].passed, checks["difference quotients"]
    assert 0 < checks["difference quotients"].value <= 1.1
