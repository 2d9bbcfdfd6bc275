"""Radial profiles with closed-form derivatives.

A profile is a radial function ``u(r)`` on ``(0, inf)``.  The primary
representation works in the log variable ``t = log r`` with the Euler
operator ``theta = r d/dr``: every profile returns the channels

    e^{shift*t} * theta^j u(e^t),   j = 0..order

evaluated in log-space, so that power-law behaviour at both ends never
overflows.  Raw radial derivatives ``u, u', ..., u''''`` are recovered by
the Stirling identities ``r^j d^j/dr^j = theta (theta-1) ... (theta-j+1)``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import comb, expit

# r^j d^j/dr^j as a polynomial in theta (signed Stirling numbers, first kind)
_STIRLING = [
    [1.0],
    [0.0, 1.0],
    [0.0, -1.0, 1.0],
    [0.0, 2.0, -3.0, 1.0],
    [0.0, -6.0, 11.0, -6.0, 1.0],
]


class ProfileDomainError(ValueError):
    """A profile was asked for something its decay does not allow."""


class RadialProfile:
    """Base class for radial functions.

    Subclasses implement :meth:`theta` and :meth:`window`.  ``decay`` is the
    pair ``(alpha0, alpha_inf)`` with ``u ~ r^alpha0`` near 0 and
    ``u ~ r^(-alpha_inf)`` near infinity (``inf`` for faster than any power).
    """

    decay: tuple[float, float] = (math.inf, math.inf)

    def theta(self, t, shift: float = 0.0, order: int = 4) -> np.ndarray:
        raise NotImplementedError

    def window(self, shift: float, tol: float) -> tuple[float, float]:
        """Interval in ``t`` outside which ``e^{shift t} theta^j u`` is below
        ``tol`` relative to its size inside."""
        raise NotImplementedError

    def eval(self, r) -> np.ndarray:
        """Return an array ``(5, n)`` with ``u, u', u'', u''', u''''`` at ``r``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r <= 0):
            raise ProfileDomainError("radial profiles are defined for r > 0 only")
        return stirling_to_raw(self.theta(np.log(r), 0.0, 4), r)

    def __call__(self, r):
        return self.eval(r)[0]

    # linear structure -------------------------------------------------
    def __add__(self, other):
        return CombinationProfile([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return CombinationProfile([(1.0, self), (-1.0, other)])

    def __mul__(self, c):
        return CombinationProfile([(float(c), self)])

    __rmul__ = __mul__

    def __neg__(self):
        return CombinationProfile([(-1.0, self)])


def _bell_ratios(gd: np.ndarray, order: int) -> np.ndarray:
    """Given derivatives ``g', g'', ...`` return ``f^(j)/f`` for ``f = e^g``."""
    n = gd.shape[1]
    h = np.empty((order + 1, n))
    h[0] = 1.0
    for k in range(order):
        acc = np.zeros(n)
        for i in range(k + 1):
            acc += comb(k, i, exact=True) * gd[i] * h[k - i]
        h[k + 1] = acc
    return h


class ExpProfile(RadialProfile):
    """``u = sign * exp(g(t))``; subclasses provide ``g`` and its derivatives."""

    sign = 1.0

    def log_terms(self, t: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``g(t)`` and an array of ``g^(1..order)(t)``."""
        raise NotImplementedError

    def theta(self, t, shift=0.0, order=4):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        with np.errstate(over="ignore", invalid="ignore"):
            g, gd = self.log_terms(t, order)
            h = _bell_ratios(gd, order)
            amp = np.exp(g + shift * t)
            # far tails: amp underflows while the ratios may overflow
            return np.where(amp == 0.0, 0.0, self.sign * amp * h)


@lru_cache(maxsize=None)
def _logistic_polys(order: int) -> tuple:
    """Polynomials P_j with d^j sigma/dz^j = P_j(sigma) for the logistic sigma."""
    polys = [np.array([0.0, 1.0])]
    dsig = np.array([0.0, 1.0, -1.0])  # sigma (1 - sigma)
    for _ in range(order):
        polys.append(P.polymul(P.polyder(polys[-1]), dsig))
    return tuple(polys)


class PowerProfile(ExpProfile):
    """``u(r) = A r^p (1 + (r/scale)^(2q))^(-gamma)``.

    The extremal bubbles are the special case ``p = -mu/2``, ``q = b``,
    ``gamma = (N-4)/2``.
    """

    def __init__(self, amplitude: float, p: float, q: float, gamma: float, scale: float = 1.0):
        if q <= 0 or scale <= 0:
            raise ProfileDomainError("need q > 0 and scale > 0")
        if amplitude == 0:
            raise ProfileDomainError("use ZeroProfile for the zero function")
        self.amplitude = float(amplitude)
        self.sign = math.copysign(1.0, amplitude)
        self.p, self.q, self.gamma = float(p), float(q), float(gamma)
        self.scale = float(scale)
        self.decay = (self.p, 2 * self.q * self.gamma - self.p)

    def log_terms(self, t, order):
        z = 2 * self.q * (t - math.log(self.scale))
        g = math.log(abs(self.amplitude)) + self.p * t - self.gamma * np.logaddexp(0.0, z)
        sig = expit(z)
        polys = _logistic_polys(max(order - 1, 0))
        gd = np.empty((order, t.size))
        amp = -2 * self.q * self.gamma
        for j in range(order):
            gd[j] = amp * (2 * self.q) ** j * P.polyval(sig, polys[j])
        if order:
            gd[0] += self.p
        return g, gd

    def window(self, shift, tol):
        rho0 = shift + self.decay[0]
        rho1 = self.decay[1] - shift
        if rho0 <= 0 or rho1 <= 0:
            raise ProfileDomainError(
                f"profile with decay {self.decay} is not integrable against e^({shift} t)"
            )
        L = math.log(1.0 / tol)
        c = math.log(self.scale)
        pad = 3.0 / self.q
        return c - L / rho0 - pad, c + L / rho1 + pad


class GaussianProfile(ExpProfile):
    """``u(r) = A r^p exp(-(r/scale)^2)``, smooth and rapidly decaying."""

    def __init__(self, amplitude: float, scale: float = 1.0, p: float = 0.0):
        if scale <= 0 or amplitude == 0:
            raise ProfileDomainError("need scale > 0 and a nonzero amplitude")
        self.amplitude = float(amplitude)
        self.sign = math.copysign(1.0, amplitude)
        self.scale = float(scale)
        self.p = float(p)
        self.decay = (self.p, math.inf)

    def log_terms(self, t, order):
        e = np.exp(2.0 * (t - math.log(self.scale)))
        g = math.log(abs(self.amplitude)) + self.p * t - e
        gd = np.empty((order, t.size))
        for j in range(order):
            gd[j] = -(2.0 ** (j + 1)) * e
        if order:
            gd[0] += self.p
        return g, gd

    def window(self, shift, tol):
        rho0 = shift + self.p
        if rho0 <= 0:
            raise ProfileDomainError("not integrable at the origin")
        L = math.log(1.0 / tol)
        c = math.log(self.scale)
        return c - L / rho0 - 2.0, c + 0.5 * math.log(L + abs(shift) * 10 + 10) + 1.0


class LogGaussianProfile(ExpProfile):
    """``u(r) = A exp(-(log(r) - center)^2 / (2 width^2))``.

    Decays faster than any power at both ends, which makes it a convenient
    stand-in for a compactly supported bump.
    """

    def __init__(self, amplitude: float, center: float = 0.0, width: float = 1.0):
        if width <= 0 or amplitude == 0:
            raise ProfileDomainError("need width > 0 and a nonzero amplitude")
        self.amplitude = float(amplitude)
        self.sign = math.copysign(1.0, amplitude)
        self.center = float(center)
        self.width = float(width)
        self.decay = (math.inf, math.inf)

    def log_terms(self, t, order):
        x = t - self.center
        w2 = self.width ** 2
        g = math.log(abs(self.amplitude)) - 0.5 * x * x / w2
        gd = np.zeros((order, t.size))
        if order >= 1:
            gd[0] = -x / w2
        if order >= 2:
            gd[1] = -1.0 / w2
        return g, gd

    def window(self, shift, tol):
        L = math.log(1.0 / tol)
        w = self.width
        mid = self.center + shift * w * w
        half = w * math.sqrt(2.0 * L + (shift * w) ** 2) + 1.0
        return mid - half, mid + half


class ZeroProfile(RadialProfile):
    decay = (math.inf, math.inf)

    def theta(self, t, shift=0.0, order=4):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.zeros((order + 1, t.size))

    def window(self, shift, tol):
        return -1.0, 1.0


class CombinationProfile(RadialProfile):
    """Finite linear combination ``sum_i c_i u_i``."""

    def __init__(self, terms):
        flat = []
        for c, prof in terms:
            if isinstance(prof, CombinationProfile):
                flat.extend((c * c2, p2) for c2, p2 in prof.terms)
            else:
                flat.append((float(c), prof))
        self.terms = [(c, p) for c, p in flat if c != 0.0 and not isinstance(p, ZeroProfile)]
        if self.terms:
            self.decay = (
                min(p.decay[0] for _, p in self.terms),
                min(p.decay[1] for _, p in self.terms),
            )

    def theta(self, t, shift=0.0, order=4):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((order + 1, t.size))
        for c, prof in self.terms:
            out += c * prof.theta(t, shift, order)
        return out

    def window(self, shift, tol):
        if not self.terms:
            return -1.0, 1.0
        wins = [p.window(shift, tol) for _, p in self.terms]
        return min(w[0] for w in wins), max(w[1] for w in wins)


class DilationGenerator(RadialProfile):
    """``m u + r u'``, the derivative of ``lam^m u(lam r)`` at ``lam = 1``."""

    def __init__(self, base: RadialProfile, m: float):
        self.base = base
        self.m = float(m)
        self.decay = base.decay

    def theta(self, t, shift=0.0, order=4):
        th = self.base.theta(t, shift, order + 1)
        return self.m * th[: order + 1] + th[1:]

    def window(self, shift, tol):
        return self.base.window(shift, tol)


class PeriodicLogProfile(RadialProfile):
    """Profile given by samples of ``w(tau) = r^m u(r)`` with ``tau = b log r``.

    The samples live on the uniform periodic grid ``tau_j = -L + j h``,
    ``h = 2L/n``, and are interpolated by their trigonometric polynomial
    (Nyquist mode dropped).  Outside ``|tau| < L`` the profile is zero.
    """

    _CHUNK = 2048

    def __init__(self, samples, half_width: float, b: float, m: float):
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        if n % 2:
            raise ProfileDomainError("periodic grid needs an even number of samples")
        self.samples = samples
        self.L = float(half_width)
        self.b = float(b)
        self.m = float(m)
        coef = np.fft.rfft(samples) / n
        coef[-1] = 0.0
        self._coef = coef[1:-1]
        self._mean = coef[0].real
        self._freq = np.pi * np.arange(1, n // 2) / self.L
        self.decay = (math.inf, math.inf)

    def _tau_derivs(self, tau: np.ndarray, order: int) -> np.ndarray:
        out = np.zeros((order + 1, tau.size))
        out[0] = self._mean
        for s in range(0, tau.size, self._CHUNK):
            x = tau[s:s + self._CHUNK] + self.L
            phase = np.exp(1j * np.outer(x, self._freq))
            for j in range(order + 1):
                c = self._coef * (1j * self._freq) ** j
                out[j, s:s + self._CHUNK] += 2.0 * (phase @ c).real
        return out

    def theta(self, t, shift=0.0, order=4):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((order + 1, t.size))
        tau = self.b * t
        inside = np.abs(tau) < self.L
        if not np.any(inside):
            return out
        ti = t[inside]
        d = self._tau_derivs(tau[inside], order)
        fac = np.exp((shift - self.m) * ti)
        for j in range(order + 1):
            acc = np.zeros(ti.size)
            for i in range(j + 1):
                acc += comb(j, i, exact=True) * self.b ** i * (-self.m) ** (j - i) * d[i]
            out[j, inside] = fac * acc
        return out

    def window(self, shift, tol):
        return -self.L / self.b, self.L / self.b


def stirling_to_raw(theta_channels: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Convert theta-channels (shift 0) to raw derivatives at ``r``."""
    out = np.empty((len(_STIRLING), r.size))
    for j, coeffs in enumerate(_STIRLING):
        out[j] = sum(c * theta_channels[i] for i, c in enumerate(coeffs)) / r ** j
    return out


class PowerChangeProfile(RadialProfile):
    """``r^alpha * base(r^beta)`` for ``beta > 0``."""

    def __init__(self, base: RadialProfile, alpha: float, beta: float):
        if beta <= 0:
            raise ProfileDomainError(f"beta must be positive, got {beta}")
        self.base = base
        self.alpha = float(alpha)
        self.beta = float(beta)
        d0, d1 = base.decay
        self.decay = (self.alpha + self.beta * d0, self.beta * d1 - self.alpha)

    def theta(self, t, shift=0.0, order=4):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        al, be = self.alpha, self.beta
        th = self.base.theta(be * t, (shift + al) / be, order)
        out = np.zeros_like(th)
        for j in range(order + 1):
            for i in range(j + 1):
                out[j] += comb(j, i, exact=True) * al ** (j - i) * be ** i * th[i]
        return out

    def window(self, shift, tol):
        lo, hi = self.base.window((shift + self.alpha) / self.beta, tol)
        return lo / self.beta, hi / self.beta
