import pytest

import lieadj as la


@pytest.fixture(params=["SO3", "SE3"])
def spec(request):
    return la.so3() if request.param == "SO3" else la.se3()


@pytest.fixture(params=["exp", "cayley"])
def retraction_kind(request):
    return request.param


def random_elem(spec, rng, scale=0.4):
    """A random group element via the exponential chart."""
    chart = la.exp_retraction(spec)
    return chart.tau(la.AlgVec(spec, scale * rng.standard_normal(spec.d)))


def random_linear_field(spec, rng, scale=0.5):
    """A generic (non-left-invariant) field: projection of A g."""
    from lieadj.problems import linear_projection_field

    return linear_projection_field(spec, scale * rng.standard_normal((spec.n, spec.n)))
