import numpy as np
import pytest

from matinar.replicate import flatten, param_names, replicate_estimation, replicate_order
from matinar.scenarios import ScenarioUnavailable, get_scenario, random_params, scenario_a


def test_scenario_registry():
    P = get_scenario("a")
    assert np.linalg.norm(P.A[0]) == pytest.approx(1.0)
    np.testing.assert_allclose(P.A[0] * np.sqrt(0.4), [[0.2, 0.4], [0.4, 0.2]])
    for name in ("B", "C", "E", "F"):
        with pytest.raises(ScenarioUnavailable, match="scenario definition unavailable"):
            get_scenario(name)
    with pytest.raises(ScenarioUnavailable):
        get_scenario("D")
    with pytest.raises(ScenarioUnavailable):
        get_scenario("Z")


def test_param_names_and_flatten():
    assert param_names(1, 2, 2)[:4] == ["a_{1,1}", "a_{2,1}", "a_{1,2}", "a_{2,2}"]
    assert param_names(2, 2, 2)[0] == "a1_{1,1}" and len(param_names(2, 2, 2)) == 20
    P = scenario_a()
    v = flatten(P.A, P.B, P.Lambda)
    assert v.shape == (12,) and v[1] == P.A[0][1, 0]


def test_estimation_report_deterministic_and_parallel_invariant():
    P = scenario_a()
    r1 = replicate_estimation(P, [150], 6, seed=11, jobs=1)
    r2 = replicate_estimation(P, [150], 6, seed=11, jobs=2)
    for m in ("proj", "icls"):
        np.testing.assert_array_equal(r1.summary(m, 150).estimates, r2.summary(m, 150).estimates)
    d = r1.to_dict()
    assert d["estimation"][0]["method"] == "proj" and len(d["estimation"][0]["bias"]) == 12
    text = r1.format_tables()
    lines = text.splitlines()
    assert lines[0].split()[:3] == ["Method", "T", "Result"]
    assert len({len(l) for l in lines}) == 1  # aligned columns
    with pytest.raises(KeyError):
        r1.summary("proj", 999)


def test_order_report_frequencies():
    P = random_params(1, seed=0)
    rep = replicate_order(P, [200], 4, p_bar=2, seed=1, method="proj")
    row = rep.order[0]
    assert row["eq"] + row["gt"] + row["lt"] == pytest.approx(1.0)
    assert len(row["p_hat"]) == 4
    assert "{p_hat=p}" in rep.format_tables()


def test_reps_guard():
    with pytest.raises(ValueError):
        replicate_estimation(scenario_a(), [100], 1)
    with pytest.raises(ValueError):
        replicate_order(scenario_a(), [100], 1)


@pytest.mark.slow
def test_table1_trend_proj():
    """Scenario A, R=300: PROJ SDs shrink with T for every parameter; a11 matches the published scale."""
    rep = replicate_estimation(scenario_a(), [200, 600, 1000], 300, seed=77, methods=("proj",))
    sd = np.array([rep.summary("proj", T).sd for T in (200, 600, 1000)])
    assert np.all(np.diff(sd, axis=0) < 0)
    s = rep.summary("proj", 1000)
    assert abs(s.bias[0]) <= 0.01
    assert 0.026 <= s.sd[0] <= 0.040
