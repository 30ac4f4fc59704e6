import numpy as np
import pytest

from layergreen import LayeredMedium
from layergreen.verification import Evaluator, run_suite


@pytest.mark.parametrize("medium", [(2, 1), (1, 1), (1, 4)])
def test_suite_passes(medium):
    passed, results = run_suite(LayeredMedium(*medium), pairs=200)
    assert passed, [r.as_dict() for r in results if not r.passed]
    assert [r.name for r in results] == ["reciprocity", "transmission", "bounds", "harmonicity",
                                         "ode_residuals", "hankel_identity", "trace"]


def test_injected_fault_breaks_transmission():
    passed, results = run_suite(LayeredMedium(2, 1), inject_fault=True, pairs=200)
    by_name = {r.name: r for r in results}
    assert not passed
    assert not by_name["transmission"].passed
    assert by_name["transmission"].metrics["max_flux_error"] > 0.1


def test_fault_is_harmless_without_contrast():
    passed, _ = run_suite(LayeredMedium(1, 1), inject_fault=True, pairs=100)
    assert passed


def test_faulty_evaluator_flips_image():
    m = LayeredMedium(2, 1)
    x, y = np.array([0.0, 0.0, 2.0]), np.array([0.0, 0.0, 1.0])
    # r = 1, R = 3; the fault turns 1 + b/3 into 1 - b/3
    assert Evaluator(m, flip_image=True).value(x, y) == pytest.approx(
        (1 - 1 / 9) / (4 * np.pi * 2), rel=1e-14)
    g_true = Evaluator(m).gradient(x, y)
    g_fault = Evaluator(m, flip_image=True).gradient(x, y)
    assert g_fault[2] == pytest.approx(-(1 - 1 / 27) / (8 * np.pi), rel=1e-14)
    assert g_true[2] == pytest.approx(-(1 + 1 / 27) / (8 * np.pi), rel=1e-14)
