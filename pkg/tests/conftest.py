import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# metric and unit field used wherever a generic, non-diagonal example helps
MESSY_METRIC = [
    ["1 + u1^2", "u0/5", "0"],
    ["u0/5", "2 + sin(u2)", "0.1"],
    ["0", "0.1", "exp(u0)"],
]
MESSY_FIELD = ["1 + u1", "cos(u0)", "u2*u0"]
MESSY_DOMAIN = [(-1.0, 1.0)] * 3


# filled by test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def messy():
    from sasakimc.framefield import UnitField
    from sasakimc.manifold import ChartMetric

    metric = ChartMetric.from_strings(MESSY_METRIC, MESSY_DOMAIN)
    return UnitField.from_strings(metric, MESSY_FIELD, normalize=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# every catalog entry, with a few parameter variants
CATALOG_CASES = [
    ("lobachevsky2", {"a": 1.0, "b": 0.0}),
    ("lobachevsky2", {"a": 2.0, "b": 1.0}),
    ("exp2uv", {}),
    ("warped2", {"gprofile": "u", "wprofile": "const"}),
    ("warped2", {"gprofile": "u2", "wprofile": "quadratic", "c": 0.7}),
    ("warped2", {"gprofile": "logcosh", "wprofile": "linear", "c": -0.4}),
    ("lob_np1_vf1", {"n": 2, "theta": 0.5}),
    ("lob_np1_vf1", {"n": 4, "theta": 1.0}),
    ("lob_np1_vf2", {"n": 3, "theta": 0.9, "a": 2.0}),
    ("hyperbolic_radial", {}),
    ("sphere3_hopf", {}),
    ("euclidean", {"n": 2}),
]


def case_id(case):
    name, params = case
    return name + "".join(f"-{k}={v}" for k, v in params.items())
