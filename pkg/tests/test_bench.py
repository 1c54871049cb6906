import csv
import json
import math

import numpy as np
import pytest

from qhdkit.bench import (
    PipelineConfig,
    run_baseline,
    run_instance,
    success_probability,
    tts,
    warmstart_comparison,
)
from qhdkit.discretize import CapExceeded
from qhdkit.instances import builtin, instance_from_problem
from qhdkit.expr import parse
from qhdkit.problem import BoxBounds, QPData, from_expr, from_qp

FAST = PipelineConfig(shots=200, auto_steps=False)


def test_success_probability_extremes():
    assert success_probability([-3.0] * 10, -3.0) == 1.0
    assert success_probability([-1.0] * 10, -3.0) == 0.0


def test_success_probability_mixed():
    assert success_probability([-3.0] * 50 + [-1.0] * 50, -3.0) == 0.5


def test_success_probability_counts_rejections_as_failures():
    assert success_probability([-3.0, None, -3.0, None], -3.0) == 0.5


def test_success_probability_threshold_is_strict():
    assert success_probability([0.000999], 0.0) == 1.0
    assert success_probability([0.001], 0.0) == 0.0


def test_success_probability_errors():
    with pytest.raises(ValueError):
        success_probability([1.0], None)
    with pytest.raises(ValueError):
        success_probability([], 0.0)


@pytest.mark.parametrize("t0, p, expected", [(1, 0.5, 7), (1, 0.99, 1), (3.5, 1.0, 3.5),
                                             (2, 0.1, 2 * 44), (1, 0.9, 2)])
def test_tts_values(t0, p, expected):
    assert tts(t0, p) == pytest.approx(expected)


def test_tts_zero_probability_is_infinite():
    assert tts(2.0, 0.0) == math.inf


def test_tts_validation():
    with pytest.raises(ValueError):
        tts(1.0, 1.5)


def test_qp_embedded_unary_run():
    spec = builtin("qp-2d")
    rep = run_instance(spec, PipelineConfig(backend="embedded", resolution=5, shots=1000))
    assert rep.p_s > 0 and rep.best_f == pytest.approx(-0.75, abs=1e-12)
    assert len(rep.samples) == 1000 and len(rep.samples[0].outcome) == 10
    assert rep.config["N"] == 6 and rep.convergence["passed"]


def test_zero_shots_is_an_error():
    with pytest.raises(ValueError, match="empty sample set"):
        run_instance(builtin("qp-2d"), PipelineConfig(shots=0))


def test_instance_three_direct():
    rep = run_instance(builtin("nonlinear-3"), PipelineConfig(grid=17))
    assert abs(rep.best_f - (-12.649537508286059)) <= 1e-6


def test_cap_exceeded_propagates():
    spec = builtin("nonlinear-4")
    with pytest.raises(CapExceeded):
        run_instance(spec, PipelineConfig(backend="embedded", resolution=7, shots=10))


def test_strict_onehot_reports_rejections():
    rep = run_instance(builtin("qp-2d"), PipelineConfig(backend="embedded", scheme="onehot",
                                                         resolution=4, shots=300))
    rejected = [s for s in rep.samples if s.decoded is None]
    assert rep.rejection_rate == len(rejected) / 300 > 0
    assert all(s.success is False for s in rejected)
    assert rep.p_s == pytest.approx(sum(bool(s.success) for s in rep.samples) / 300)


def test_tts_recomputes_from_report():
    rep = run_instance(builtin("nonlinear-1"), FAST)
    assert rep.tts == tts(rep.t0, rep.p_s)
    assert rep.timing["t0"] == pytest.approx(
        rep.timing["evolve_s"] / 200 + rep.timing["refine_s"] / 200)


def test_report_determinism():
    a = run_instance(builtin("nonlinear-1"), FAST)
    b = run_instance(builtin("nonlinear-1"), FAST)
    assert a.canonical_bytes() == b.canonical_bytes()
    c = run_instance(builtin("nonlinear-1"), PipelineConfig(shots=200, auto_steps=False, seed=1))
    assert c.canonical_bytes() != a.canonical_bytes()


def test_report_files(tmp_path):
    rep = run_instance(builtin("qp-2d"), PipelineConfig(backend="embedded", shots=50))
    rep.write_json(tmp_path / "r.json")
    rep.write_csv(tmp_path / "r.csv")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert set(doc) == {"canonical", "timing"}
    assert doc["timing"]["t0_label"] == "simulated t0"
    assert doc["canonical"]["config"]["schedule"] == {"kind": "smooth-log", "gamma": 1.0, "T": 10.0}
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[0] == ["outcome", "decoded_0", "decoded_1", "refined_0", "refined_1",
                       "f_decoded", "f_refined", "success"]
    assert len(rows) == 51


def test_infinite_tts_serializes():
    spec = instance_from_problem(
        from_expr(parse("x", ["x"]), BoxBounds.unit(1)), "impossible", f_star=-10.0)
    rep = run_instance(spec, PipelineConfig(shots=20, auto_steps=False))
    assert rep.p_s == 0.0 and rep.tts == math.inf
    assert json.loads(json.dumps(rep.to_json()))["timing"]["tts"] == "inf"


def test_best_point_reported_in_original_coordinates():
    qp = QPData([[-2.0, 1.0], [1.0, -1.0]], [0.75, -0.25])
    spec = instance_from_problem(from_qp(qp, BoxBounds((-1.0, 2.0), (1.0, 4.0))), "shifted")
    rep = run_instance(spec, PipelineConfig(shots=100, auto_steps=False))
    x = np.array(rep.best_x)
    assert np.all(x >= [-1, 2]) and np.all(x <= [1, 4])
    assert rep.best_f == pytest.approx(qp.value(x), abs=1e-10)
    assert rep.p_s is None


def test_baseline_convex_qp():
    spec = instance_from_problem(from_qp(QPData([[2.0, 0.3], [0.3, 1.0]], [-1.0, -0.2])), "cvx",
                                 f_star=None)
    ref = run_baseline(spec, 50, 0)
    spec = instance_from_problem(spec.problem, "cvx", f_star=ref.best_f)
    assert run_baseline(spec, 200, 3).p_s == 1.0


def test_baseline_instance_one_two_basins():
    rep = run_baseline(builtin("nonlinear-1"), 1000, 42)
    assert 0 < rep.p_s < 1
    assert rep.tts == tts(rep.t0, rep.p_s)


def test_baseline_determinism():
    a = run_baseline(builtin("nonlinear-2"), 100, 5)
    b = run_baseline(builtin("nonlinear-2"), 100, 5)
    assert a.canonical_bytes() == b.canonical_bytes()


def test_warmstart_constant_objective():
    spec = instance_from_problem(from_expr(parse("2.5 + 0*x", ["x", "y"]), BoxBounds.unit(2)),
                                 "flat", f_star=2.5)
    out = warmstart_comparison(spec, PipelineConfig(shots=100, auto_steps=False))
    d = out["distributions"]
    assert d["random"] == d["decoded"] == d["refined"] == [2.5] * 100


def test_warmstart_qp_defaults():
    out = warmstart_comparison(builtin("qp-2d"), PipelineConfig(backend="embedded"))
    assert out["medians"]["decoded"] <= out["medians"]["random"]
    assert out["decoded_beats_random"] and out["samples"] == 1000


def test_warmstart_instance_one_direct():
    out = warmstart_comparison(builtin("nonlinear-1"), PipelineConfig(backend="direct"))
    assert out["medians"]["decoded"] <= out["medians"]["random"]


def test_pipeline_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(backend="qpu")
    with pytest.raises(ValueError):
        PipelineConfig(scheme="gray")
    assert PipelineConfig(scheme="one-hot", backend="embedded", resolution=4).N == 4
