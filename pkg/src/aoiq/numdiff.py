"""Central-difference differentiation with Richardson extrapolation."""

from __future__ import annotations

from .errors import ConvergenceError

DEFAULT_LEVELS = 2
_CHECK_RTOL = 1e-6


def derivative(f, x0: float, h0: float, levels: int = DEFAULT_LEVELS, rtol: float = _CHECK_RTOL) -> float:
    """First derivative of f at x0.

    Central differences at step sizes h0/2^k, accelerated by Richardson
    extrapolation over ``levels`` refinements.  Converged when halving the
    step moves the extrapolated value by less than ``rtol`` relative.
    """
    diffs = [_central1(f, x0, h0 / 2**k) for k in range(levels + 2)]
    return _richardson(diffs, rtol)


def second_derivative(f, x0: float, h0: float, levels: int = DEFAULT_LEVELS, rtol: float = _CHECK_RTOL) -> float:
    """Second derivative of f at x0, same scheme as :func:`derivative`."""
    diffs = [_central2(f, x0, h0 / 2**k) for k in range(levels + 2)]
    return _richardson(diffs, rtol)


def _central1(f, x0, h):
    return (f(x0 + h) - f(x0 - h)) / (2.0 * h)


def _central2(f, x0, h):
    return (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h)


def _extrapolate(diffs):
    # both central stencils have even error expansions: eliminate h^2, h^4, ...
    table = list(diffs)
    for j in range(1, len(diffs)):
        factor = 4.0**j
        table = [
            (factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)
        ]
    return table[0]


def _richardson(diffs, rtol):
    coarse = _extrapolate(diffs[:-1])
    best = _extrapolate(diffs[1:])  # same depth, every step halved
    scale = max(abs(best), abs(coarse), 1e-300)
    if abs(best - coarse) > rtol * scale and abs(best - coarse) > 1e-12:
        raise ConvergenceError(f"numerical derivative did not converge: {coarse} vs {best}")
    return best
