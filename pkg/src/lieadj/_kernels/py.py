"""Pure numpy implementations of the small dense-matrix kernels.

These are the hot primitives behind the retraction maps: the matrix
exponential, the principal matrix logarithm, and the right-trivialized
tangent series of the exponential. `lieadj._kernels._core` provides
compiled equivalents with identical signatures; this module is the
fallback selected at import when the extension is unavailable.
"""

import numpy as np

BACKEND = "python"

# Arguments are scaled below this Frobenius norm before series evaluation,
# which keeps order-12 truncation under roundoff.
_THETA = 0.25


def expm(a, order=12):
    """Matrix exponential by scaling and squaring with a truncated Taylor core."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    eye = np.eye(n)
    norm = np.linalg.norm(a, "fro")
    s = 0
    if norm > _THETA:
        s = int(np.ceil(np.log2(norm / _THETA)))
    b = a / (2.0**s)
    out = eye.copy()
    for k in range(order, 0, -1):
        out = eye + (b / k) @ out
    for _ in range(s):
        out = out @ out
    return out


def _sqrtm_newton(a, max_iter=60, tol=1e-15):
    """Principal square root by the Denman-Beavers iteration."""
    y = np.array(a, dtype=float)
    z = np.eye(a.shape[0])
    for _ in range(max_iter):
        try:
            y_next = 0.5 * (y + np.linalg.inv(z))
            z_next = 0.5 * (z + np.linalg.inv(y))
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError("singular iterate in matrix square root") from exc
        delta = np.linalg.norm(y_next - y, "fro")
        y, z = y_next, z_next
        if delta <= tol * max(1.0, np.linalg.norm(y, "fro")):
            return y
    raise ArithmeticError("matrix square-root iteration stalled")


def logm(a, max_sqrts=40):
    """Principal matrix logarithm by inverse scaling and squaring.

    Repeated square roots bring the argument within `_THETA` of the
    identity, after which the Mercator series converges rapidly.
    Raises ArithmeticError when the argument cannot be brought into the
    series domain (e.g. eigenvalues near the negative real axis).
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    eye = np.eye(n)
    x = a
    s = 0
    while np.linalg.norm(x - eye, "fro") >= _THETA:
        if s >= max_sqrts:
            raise ArithmeticError("logarithm argument outside the series domain")
        x = _sqrtm_newton(x)
        s += 1
    e = x - eye
    out = np.zeros_like(e)
    term = eye.copy()
    for k in range(1, 41):
        term = term @ e
        out = out + term / k if k % 2 == 1 else out - term / k
        if np.linalg.norm(term, "fro") <= 1e-18 * k:
            break
    return out * (2.0**s)


def dexp_series(ad, order=12):
    """Sum of ad^k / (k+1)! for k = 0..order, the tangent series of expm.

    Evaluated with scaling and doubling so the truncation applies to a
    scaled argument: phi(2A) = phi(A) (e^A + I) / 2.
    """
    ad = np.asarray(ad, dtype=float)
    n = ad.shape[0]
    eye = np.eye(n)
    norm = np.linalg.norm(ad, "fro")
    s = 0
    if norm > _THETA:
        s = int(np.ceil(np.log2(norm / _THETA)))
    b = ad / (2.0**s)
    phi = eye.copy()
    for k in range(order, 0, -1):
        phi = eye + (b / (k + 1.0)) @ phi
    if s:
        ea = expm(b, order=order + 1)
        for _ in range(s):
            phi = phi @ (ea + eye) / 2.0
            ea = ea @ ea
    return phi


def _stack_scaling(stack):
    norm = np.sqrt(np.max(np.sum(stack * stack, axis=(1, 2))))
    if norm > _THETA:
        return int(np.ceil(np.log2(norm / _THETA)))
    return 0


def expm_stack(a, order=12):
    """expm applied along the first axis of a (k, n, n) stack.

    One scaling exponent (from the largest member) is shared by the
    whole stack; extra squarings on small members are harmless.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    eye = np.eye(n)
    s = _stack_scaling(a)
    b = a / (2.0**s)
    out = np.broadcast_to(eye, a.shape).copy()
    for k in range(order, 0, -1):
        out = eye + np.matmul(b / k, out)
    for _ in range(s):
        out = np.matmul(out, out)
    return out


def dexp_series_stack(ad, order=12):
    """dexp_series applied along the first axis of a (k, n, n) stack."""
    ad = np.asarray(ad, dtype=float)
    n = ad.shape[-1]
    eye = np.eye(n)
    s = _stack_scaling(ad)
    b = ad / (2.0**s)
    phi = np.broadcast_to(eye, ad.shape).copy()
    for k in range(order, 0, -1):
        phi = eye + np.matmul(b / (k + 1.0), phi)
    if s:
        ea = expm_stack(b, order=order + 1)
        for _ in range(s):
            phi = np.matmul(phi, (ea + eye) / 2.0)
            ea = np.matmul(ea, ea)
    return phi
