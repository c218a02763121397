"""Built-in parameter sets for simulation studies."""

import numpy as np

from .process import ModelParams, check_stationary


class ScenarioUnavailable(LookupError):
    pass


def scenario_a():
    """MAT-INAR(1), 2×2, with the symmetric A, B and unit Λ; A scaled to unit norm."""
    A = np.array([[0.20, 0.40], [0.40, 0.20]])
    B = np.array([[0.50, 0.30], [0.30, 0.50]])
    return ModelParams([A / np.linalg.norm(A)], [B], np.ones((2, 2)))


_UNAVAILABLE = ("B", "C", "E", "F")


def get_scenario(name):
    key = name.strip().upper()
    if key == "A":
        return scenario_a()
    if key in _UNAVAILABLE:
        raise ScenarioUnavailable(f"scenario {key}: scenario definition unavailable")
    if key == "D":
        raise ScenarioUnavailable(
            "scenario D draws random coefficients; use random_params(p, m, n, seed)"
        )
    raise ScenarioUnavailable(f"unknown scenario {name!r}")


def random_params(p, m=2, n=2, Lambda=None, seed=None, max_tries=100_000):
    """Random stationary coefficients for order-selection studies.

    Entries of every A_l and B_l are Uniform(0, 1), A_l is scaled to unit
    Frobenius norm, and the draw is repeated until ρ(𝒜) < 1.
    """
    rng = np.random.default_rng(seed)
    if Lambda is None:
        Lambda = np.ones((m, n))
    for _ in range(max_tries):
        A = [rng.uniform(size=(m, m)) for _ in range(p)]
        A = [a / np.linalg.norm(a) for a in A]
        B = [rng.uniform(size=(n, n)) for _ in range(p)]
        params = ModelParams(A, B, Lambda)
        if check_stationary(params)["stationary"]:
            return params
    raise RuntimeError(f"no stationary draw in {max_tries} attempts")
