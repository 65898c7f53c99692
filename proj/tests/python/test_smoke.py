import math

import pytest

import rieszlab


def test_metric_basics():
    assert rieszlab.radius(0.0, 0.0, 1.0) == 0.0
    # vertical geodesics: d((0,0,1), (0,0,a)) = |log a|
    assert rieszlab.radius(0.0, 0.0, math.e**2) == pytest.approx(2.0, rel=1e-12)
    p, q = (0.3, -0.1, 0.7), (1.2, 0.4, 2.5)
    g = (2.0, -1.0, 3.0)
    assert rieszlab.distance(rieszlab.multiply(g, p), rieszlab.multiply(g, q)) == pytest.approx(
        rieszlab.distance(p, q), rel=1e-10
    )
    assert rieszlab.ball_volume(2.0) == pytest.approx(math.pi * (math.sinh(4.0) - 4.0), rel=1e-2)


def test_kernels_and_errors():
    assert rieszlab.kernel_W(0.5, 0.5, 1.5) > 0.0
    assert rieszlab.kernel_U(0.5, 0.5, 1.5) > 0.0
    with pytest.raises(rieszlab.RieszlabError):
        rieszlab.kernel_W(0.0, 0.0, 1.0)
    with pytest.raises(rieszlab.RieszlabError):
        rieszlab.kernel_k(3, 0.5, 0.5, 1.5)
    assert math.isfinite(rieszlab.kernel_gij(1, 1, 3.0, 0.0, 2.0))


def test_integrability_and_expand():
    assert rieszlab.classify_integrability([0, 0, 0], 3, upper=True)
    assert not rieszlab.classify_integrability([0, 0, 0], 2, upper=True)
    e = rieszlab.expand(0, 0)
    assert e["k_ij"]["n"] == [1, 0, 0]
    assert e["jump_constant"] == -2.0


def test_report_roundtrip_and_determinism():
    a = rieszlab.unbounded("s0", tmax=1e6, seed=4)
    b = rieszlab.unbounded("s0", tmax=1e6, seed=4)
    assert a == b
    assert a["id"] == "unbounded-s0"
    assert set(a) == {"id", "params", "checks", "seed"}
    assert rieszlab.passed(a)
    with pytest.raises(rieszlab.RieszlabError):
        rieszlab.bounded("nothing")


def test_verify_metric_suite():
    r = rieszlab.verify("metric")
    assert rieszlab.passed(r)
