"""Sparse trigonometric polynomials and the norms used to study thin spectra.

A :class:`TrigPolynomial` stores integer frequencies and complex
coefficients.  Grid evaluation scatters coefficients into a power-of-two
buffer (frequencies reduced modulo the grid size) and applies one inverse
FFT.  Since ``|f|`` is unchanged by a modulation, frequencies are first
centred so that grids only need to resolve the spectral *width*.

Quadrature of ``|f|**q`` on ``G`` equispaced points is exact when ``q`` is an
even integer and ``G > (q/2) * width``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .core import IntegerSet
from .errors import InvalidInput, ResourceExceeded, VerificationFailed
from .rng import trial_generator

RIESZ_BUDGET = 5_000_000


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


class TrigPolynomial:
    """Finite sum ``f(t) = sum_n c_n e^{int}``.

    Parameters
    ----------
    freqs, coeffs : array_like
        Frequencies (int) and coefficients (complex).  Repeated frequencies
        are added and exact zeros are dropped.

    Examples
    --------
    >>> f = TrigPolynomial.from_dict({3: 0.5, -3: 0.5})
    >>> f.degree, f.is_real
    (3, True)
    """

    __slots__ = ("freqs", "coeffs")

    def __init__(self, freqs=(), coeffs=()):
        fr = np.asarray(freqs, dtype=np.int64).ravel()
        co = np.asarray(coeffs, dtype=np.complex128).ravel()
        if fr.shape != co.shape:
            raise InvalidInput("freqs and coeffs must have equal length")
        if fr.size:
            uniq, inv = np.unique(fr, return_inverse=True)
            if uniq.size != fr.size:
                acc = np.zeros(uniq.size, dtype=np.complex128)
                np.add.at(acc, inv, co)
                fr, co = uniq, acc
            else:
                order = np.argsort(fr)
                fr, co = fr[order], co[order]
            keep = co != 0
            fr, co = fr[keep], co[keep]
        self.freqs = fr
        self.coeffs = co

    # constructors -------------------------------------------------------
    @classmethod
    def from_dict(cls, d: Mapping[int, complex]) -> "TrigPolynomial":
        return cls(list(d.keys()), list(d.values()))

    @classmethod
    def exponential(cls, k: int) -> "TrigPolynomial":
        """``e_k(t) = e^{ikt}``."""
        return cls([k], [1.0])

    @classmethod
    def indicator(cls, A: Iterable[int]) -> "TrigPolynomial":
        """``e_A = sum_{k in A} e_k``."""
        a = IntegerSet(A).elements if not isinstance(A, IntegerSet) else A.elements
        return cls(a, np.ones(a.size))

    @classmethod
    def dirichlet(cls, N: int) -> "TrigPolynomial":
        k = np.arange(-N, N + 1)
        return cls(k, np.ones(k.size))

    @classmethod
    def zero(cls) -> "TrigPolynomial":
        return cls()

    # basic queries ------------------------------------------------------
    def __len__(self):
        return int(self.freqs.size)

    @property
    def degree(self) -> int:
        return int(np.max(np.abs(self.freqs))) if self.freqs.size else 0

    @property
    def width(self) -> int:
        """``max(freq) - min(freq)``."""
        return int(self.freqs[-1] - self.freqs[0]) if self.freqs.size else 0

    @property
    def is_zero(self) -> bool:
        return self.freqs.size == 0

    @property
    def is_real(self) -> bool:
        other = self.conj_reflect()
        return np.array_equal(self.freqs, other.freqs) and np.allclose(
            self.coeffs, other.coeffs, rtol=0, atol=1e-14
        )

    def coeff(self, n: int) -> complex:
        i = np.searchsorted(self.freqs, n)
        if i < self.freqs.size and self.freqs[i] == n:
            return complex(self.coeffs[i])
        return 0j

    def coeff_array(self, ns) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        out = np.zeros(ns.shape, dtype=np.complex128)
        if self.freqs.size == 0:
            return out
        i = np.minimum(np.searchsorted(self.freqs, ns), self.freqs.size - 1)
        hit = self.freqs[i] == ns
        out[hit] = self.coeffs[i[hit]]
        return out

    def l2_norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def l1_coeffs(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def conj_reflect(self) -> "TrigPolynomial":
        """``t -> conj(f(t))``: coefficient ``conj(c_{-n})`` at ``n``."""
        return TrigPolynomial(-self.freqs, np.conj(self.coeffs))

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        return TrigPolynomial(
            np.concatenate((self.freqs, other.freqs)), np.concatenate((self.coeffs, other.coeffs))
        )

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, a) -> "TrigPolynomial":
        return TrigPolynomial(self.freqs, self.coeffs * a)

    def __mul__(self, other):
        if np.isscalar(other):
            return self.scale(other)
        f = (self.freqs[:, None] + other.freqs[None, :]).ravel()
        c = (self.coeffs[:, None] * other.coeffs[None, :]).ravel()
        return TrigPolynomial(f, c)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        return np.array_equal(self.freqs, other.freqs) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        if len(self) <= 6:
            terms = ", ".join(f"{n}: {c:.6g}" for n, c in zip(self.freqs.tolist(), self.coeffs))
            return f"TrigPolynomial({{{terms}}})"
        return f"TrigPolynomial(<{len(self)} terms, degree {self.degree}>)"

    def restrict(self, mask) -> "TrigPolynomial":
        return TrigPolynomial(self.freqs[mask], self.coeffs[mask])

    # evaluation -----------------------------------------------------------
    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.exp(1j * np.multiply.outer(t, self.freqs)) @ self.coeffs

    def grid_values(self, G: int, centre: bool = False) -> np.ndarray:
        """Values at ``t_j = 2 pi j / G``, ``j = 0..G-1``.

        With ``centre=True`` the polynomial is first multiplied by
        ``e_{-m}`` (``m`` the spectral midpoint); moduli are unchanged and a
        grid larger than the width then avoids aliasing.
        """
        buf = np.zeros(G, dtype=np.complex128)
        if self.freqs.size:
            fr = self.freqs - self._mid() if centre else self.freqs
            np.add.at(buf, np.mod(fr, G), self.coeffs)
        return G * np.fft.ifft(buf)

    def _mid(self) -> int:
        return int((int(self.freqs[0]) + int(self.freqs[-1])) // 2) if self.freqs.size else 0

    def half_width(self) -> int:
        """Largest ``|n - m|`` over the centred spectrum."""
        if not self.freqs.size:
            return 0
        m = self._mid()
        return int(max(self.freqs[-1] - m, m - self.freqs[0]))

    # serialization --------------------------------------------------------
    def to_json(self) -> str:
        rows = [[int(n), float(c.real), float(c.imag)] for n, c in zip(self.freqs, self.coeffs)]
        return json.dumps({"coeffs": rows}, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "TrigPolynomial":
        rows = json.loads(text)["coeffs"]
        return cls([r[0] for r in rows], [complex(r[1], r[2]) for r in rows])


@dataclass
class NormReport:
    """A norm estimate with how it was obtained.

    ``method`` is one of ``grid-quadrature``, ``exact-count`` or
    ``monte-carlo``; ``error_estimate`` is nonnegative.
    """

    value: float
    method: str
    grid_size: int = 0
    trials: int = 0
    error_estimate: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_row(self) -> dict:
        row = {
            "value": self.value,
            "method": self.method,
            "grid_size": self.grid_size,
            "trials": self.trials,
            "error_estimate": self.error_estimate,
        }
        row.update({k: v for k, v in self.extra.items() if np.isscalar(v)})
        return row


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def sup_norm(f: TrigPolynomial, oversample: int = 4) -> NormReport:
    """Grid estimate of ``max |f|`` with a Bernstein error bound.

    The grid has ``next_pow2(oversample * (2 h + 2))`` points, ``h`` the
    centred half-width.  At a maximiser ``t*`` the real polynomial
    ``Re(e^{-i theta} f)`` (degree ``h``) peaks at ``||f||_inf`` and its
    second derivative is at most ``h^2 ||f||_inf`` (Bernstein), while some
    node lies within ``pi / G``; hence
    ``||f||_inf <= max_grid / (1 - (h pi / G)^2 / 2)``.  ``error_estimate``
    is the gap between that bound and the grid maximum.
    """
    if oversample < 4:
        raise InvalidInput("oversample must be >= 4")
    if f.is_zero:
        return NormReport(0.0, "grid-quadrature", 1, 0, 0.0)
    h = f.half_width()
    G = next_pow2(oversample * (2 * h + 2))
    vals = np.abs(f.grid_values(G, centre=True))
    m = float(vals.max())
    x = 0.5 * (h * math.pi / G) ** 2
    return NormReport(m, "grid-quadrature", G, 0, m * x / (1.0 - x), {"bernstein_ratio": x})


def _is_even_int(q) -> bool:
    return float(q).is_integer() and int(q) % 2 == 0


def default_lq_grid(f: TrigPolynomial, q: float) -> int:
    w = f.width
    need = max(math.ceil(q / 2) * w + 1, 2 * f.degree + 2, 8)
    if not _is_even_int(q):
        need *= 4
    return next_pow2(need)


def lq_norm(f: TrigPolynomial, q: float, grid_size: int | None = None) -> NormReport:
    """``(mean over the grid of |f|**q) ** (1/q)``.

    For even integer ``q`` the result is exact up to rounding as soon as
    ``grid_size > (q/2) * width``; ``extra['exact']`` records whether that
    holds.  For other ``q`` the error estimate compares with a grid half as
    fine (when admissible).
    """
    if q < 1:
        raise InvalidInput("q must be >= 1")
    G = default_lq_grid(f, q) if grid_size is None else int(grid_size)
    if G < 2 * f.degree + 2:
        raise InvalidInput(f"grid of {G} points is below 2*degree+2 = {2 * f.degree + 2}")
    if f.is_zero:
        return NormReport(0.0, "grid-quadrature", G, 0, 0.0, {"exact": True})

    def quad(n):
        v = np.abs(f.grid_values(n, centre=True))
        # scale out the maximum to keep large q finite
        s = v.max()
        return s * float(np.mean((v / s) ** q)) ** (1.0 / q)

    val = quad(G)
    exact = _is_even_int(q) and G > (q / 2) * f.width
    err = 0.0
    if not exact:
        half = G // 2
        if half >= 2 * f.degree + 2 and half > f.width:
            err = abs(val - quad(half))
    else:
        err = 8 * np.finfo(float).eps * val * math.log2(G)
    return NormReport(val, "grid-quadrature", G, 0, err, {"exact": exact, "q": q})


def lq_norm_exact_even(A, q: int, budget: int = 20_000_000) -> int:
    """``||e_A||_q ** q`` for even ``q``, by counting equal ``q/2``-fold sums.

    The distribution of ``a_1 + ... + a_r`` (``r = q/2``, ordered tuples)
    is built by ``r`` rounds of sorted merging; the answer is the sum of
    squared multiplicities.
    """
    if not _is_even_int(q) or q < 2:
        raise InvalidInput("q must be a positive even integer")
    a = IntegerSet(A).elements
    if a.size == 0:
        return 0
    r = int(q) // 2
    sums = np.zeros(1, dtype=np.int64)
    mult = np.ones(1, dtype=np.int64)
    if r * int(a[-1]) > (1 << 62):
        raise ResourceExceeded("sums exceed 64-bit range")
    for _ in range(r):
        if sums.size * a.size > budget:
            raise ResourceExceeded("tuple-sum table exceeds budget")
        s = (sums[:, None] + a[None, :]).ravel()
        m = np.repeat(mult, a.size)
        order = np.argsort(s, kind="stable")
        s, m = s[order], m[order]
        starts = np.concatenate(([0], np.nonzero(np.diff(s))[0] + 1))
        sums, mult = s[starts], np.add.reduceat(m, starts)
    if float(a.size) ** q < 9e18:
        return int(np.sum(mult * mult))
    return sum(int(x) * int(x) for x in mult.tolist())


def psi_parameter(A, p_grid=None) -> NormReport:
    """``max_p ||e_A||_p / sqrt(p)`` over a finite grid of ``p >= 2``.

    The default grid is the integers from 2 to ``max(8, 4 log |A|)``; the
    maximising ``p`` is stored in ``extra['argmax_p']``.
    """
    a = IntegerSet(A)
    if len(a) == 0:
        raise InvalidInput("psi_parameter needs a nonempty set")
    if p_grid is None:
        top = max(8, math.ceil(4 * math.log(len(a))))
        p_grid = list(range(2, top + 1))
    p_grid = [float(p) for p in p_grid]
    if any(p < 2 for p in p_grid):
        raise InvalidInput("p must be >= 2")
    f = TrigPolynomial.indicator(a)
    best, best_p, G, err = -1.0, None, 0, 0.0
    for p in p_grid:
        rep = lq_norm(f, p)
        v = rep.value / math.sqrt(p)
        if v > best:
            best, best_p, G, err = v, p, rep.grid_size, rep.error_estimate / math.sqrt(p)
    return NormReport(best, "grid-quadrature", G, 0, err, {"argmax_p": best_p})


def orlicz_psi2_norm(f: TrigPolynomial, grid_size: int | None = None, rtol: float = 1e-8):
    """Luxemburg norm for ``Psi(x) = exp(x**2) - 1`` on a grid.

    Smallest ``theta`` with ``mean(exp(|f|**2 / theta**2)) <= 2``, by
    bisection between ``||f||_2 / sqrt(log 2)`` (Jensen) and
    ``max|f| / sqrt(log 2)``.
    """
    if f.is_zero:
        raise InvalidInput("the zero polynomial has no Orlicz normalisation")
    G = grid_size or next_pow2(8 * (f.width + 2))
    v2 = np.abs(f.grid_values(G, centre=True)) ** 2
    ln2 = math.log(2.0)

    def excess(theta):
        x = v2 / theta**2
        m = x.max()
        return m + math.log(np.mean(np.exp(x - m))) - ln2

    lo = math.sqrt(v2.mean() / ln2)
    hi = math.sqrt(v2.max() / ln2)
    if hi - lo <= rtol * hi:
        return NormReport(hi, "grid-quadrature", G, 0, 0.0)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return NormReport(hi, "grid-quadrature", G, 0, hi - lo)


# ---------------------------------------------------------------------------
# kernels, Riesz products, pseudo-complements
# ---------------------------------------------------------------------------


def vallee_poussin(M: int) -> TrigPolynomial:
    """de la Vallee-Poussin kernel: 1 on ``[-M, M]``, linear down to 0 at ``±2M``."""
    if M < 1:
        raise InvalidInput("M must be >= 1")
    k = np.arange(-2 * M, 2 * M + 1)
    c = np.clip(2.0 - np.abs(k) / M, 0.0, 1.0)
    return TrigPolynomial(k, c)


def vallee_poussin_coeff(M: int, k) -> np.ndarray:
    return np.clip(2.0 - np.abs(np.asarray(k, dtype=np.float64)) / M, 0.0, 1.0)


def l1_norm(f: TrigPolynomial, oversample: int = 16) -> NormReport:
    """Grid quadrature of ``mean |f|``; the error estimate compares two grids."""
    if f.is_zero:
        return NormReport(0.0, "grid-quadrature", 1)
    G = next_pow2(oversample * (f.width + 2))
    v = float(np.mean(np.abs(f.grid_values(G, centre=True))))
    v2 = float(np.mean(np.abs(f.grid_values(2 * G, centre=True))))
    return NormReport(v2, "grid-quadrature", 2 * G, 0, abs(v2 - v))


def riesz_tail_mass(n: int, cap: int) -> float:
    """l1 mass of the terms with more than ``cap`` factors, out of ``2**n``."""
    return float(sum(math.comb(n, j) for j in range(cap + 1, n + 1)))


def riesz_product(B, support_cap: int | None = None, budget: int = RIESZ_BUDGET):
    """Coefficients of ``prod_{k in B} (1 + cos kt)``.

    Each factor is ``1 + (e_k + e_{-k}) / 2``, so the expansion has one term
    ``2**-|S|`` at ``sum_{k in S} eps_k k`` for every ``S`` and sign choice
    ``eps``; terms are expanded with ``|S| <= support_cap`` (all if None).
    Distinct terms may share a nonzero frequency, but a nonempty term at
    frequency 0 is a relation in ``B``: it raises :class:`InvalidInput`.

    The l1 mass dropped by truncation is :func:`riesz_tail_mass`.
    """
    b = IntegerSet(B).elements
    n = b.size
    cap = n if support_cap is None else min(int(support_cap), n)
    terms = sum(math.comb(n, j) << j for j in range(cap + 1))
    if terms > budget:
        raise ResourceExceeded(f"Riesz expansion needs {terms} terms (budget {budget})")
    fr = np.zeros(1, dtype=np.int64)
    co = np.ones(1, dtype=np.float64)
    sz = np.zeros(1, dtype=np.int16)
    for k in b.tolist():
        ok = sz < cap
        f2, c2, s2 = fr[ok], co[ok] * 0.5, sz[ok] + 1
        fr = np.concatenate((fr, f2 + k, f2 - k))
        co = np.concatenate((co, c2, c2))
        sz = np.concatenate((sz, s2, s2))
    if np.any((fr == 0) & (sz > 0)):
        raise InvalidInput("B carries a relation: a nonempty term lands on frequency 0")
    return TrigPolynomial(fr, co.astype(np.complex128))


@dataclass
class PseudoComplement:
    """``mu = 2 (delta_0 - V_M) * R_B`` and its three defining checks."""

    mu: TrigPolynomial
    on_B_ok: bool
    off_B_ok: bool
    norm_ok: bool
    min_on_B: float
    max_off_B: float
    l1_norm: float
    l1_error: float
    nu_bound: float

    @property
    def ok(self) -> bool:
        return self.on_B_ok and self.off_B_ok and self.norm_ok


def pseudo_complement(B, Lam, M: int, strict: bool = True, tol: float = 1e-6, bound: float = 8.0):
    """Measure with ``|mu^| >= 1`` on ``B``, ``mu^ = 0`` on ``Lam \\ B``, ``||mu|| <= 8``.

    ``mu^(k) = 2 (1 - V_M^(k)) R_B^(k)``.  The norm is the grid l1 norm of
    the polynomial ``mu`` (the atom at 0 is absorbed since ``delta_0 * R = R``);
    ``nu_bound = 2 (1 + ||V_M||_1)`` is the a-priori bound.

    Raises
    ------
    InvalidInput
        If ``min(B) <= 2M``, ``B`` is not contained in ``Lam`` or ``B`` has a
        relation.
    VerificationFailed
        If ``strict`` and one of the three checks fails beyond ``tol``;
        the exception's ``result`` holds the :class:`PseudoComplement`.
    """
    Bs, Ls = IntegerSet(B), IntegerSet(Lam)
    if len(Bs) == 0:
        raise InvalidInput("B must be nonempty")
    if not Bs.issubset(Ls):
        raise InvalidInput("B must be contained in Lambda")
    if int(Bs.elements[0]) <= 2 * M:
        raise InvalidInput("min(B) must exceed 2M")
    R = riesz_product(Bs)
    nu_hat = 1.0 - vallee_poussin_coeff(M, R.freqs)
    mu = TrigPolynomial(R.freqs, 2.0 * nu_hat * R.coeffs)
    on = np.abs(mu.coeff_array(Bs.elements))
    rest = Ls.difference(Bs).elements
    off = np.abs(mu.coeff_array(rest)) if rest.size else np.zeros(1)
    nrm = l1_norm(mu)
    V1 = l1_norm(vallee_poussin(M)).value
    res = PseudoComplement(
        mu=mu,
        on_B_ok=bool(on.min() >= 1.0 - tol),
        off_B_ok=bool(off.max() <= tol),
        norm_ok=bool(nrm.value <= bound + tol),
        min_on_B=float(on.min()),
        max_off_B=float(off.max()),
        l1_norm=nrm.value,
        l1_error=nrm.error_estimate,
        nu_bound=2.0 * (1.0 + V1),
    )
    if strict and not res.ok:
        failed = [n for n, ok in (("on B", res.on_B_ok), ("off B", res.off_B_ok), ("norm", res.norm_ok)) if not ok]
        raise VerificationFailed(f"pseudo-complement check failed: {', '.join(failed)}", res)
    return res


# ---------------------------------------------------------------------------
# Rademacher averages, partial sums, square function, rearrangements
# ---------------------------------------------------------------------------


def _signed_sups(f: TrigPolynomial, signs: np.ndarray, G: int) -> np.ndarray:
    """Grid maxima of ``sum r_n c_n e_n`` for each row of ``signs``."""
    buf = np.zeros((signs.shape[0], G), dtype=np.complex128)
    idx = np.mod(f.freqs - f._mid(), G)
    buf[:, idx] = signs * f.coeffs[None, :]
    return np.abs(G * np.fft.ifft(buf, axis=1)).max(axis=1)


def rademacher_norm(f: TrigPolynomial, trials: int = 200, seed: int = 0, oversample: int = 4):
    """Monte Carlo estimate of ``E || sum r_n f^(n) e_n ||_inf``.

    Each trial draws its signs from the generator keyed by ``(seed, trial)``;
    ``error_estimate`` is the standard error of the mean.
    """
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    if f.is_zero:
        return NormReport(0.0, "monte-carlo", 1, trials, 0.0)
    if len(f) == 1:
        v = float(abs(f.coeffs[0]))
        return NormReport(v, "monte-carlo", 1, trials, 0.0)
    G = next_pow2(oversample * (2 * f.half_width() + 2))
    chunk = max(1, min(trials, (1 << 24) // G))
    vals = []
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        signs = np.stack(
            [trial_generator(seed, t).choice((-1.0, 1.0), size=len(f)) for t in range(start, stop)]
        )
        vals.append(_signed_sups(f, signs, G))
    v = np.concatenate(vals)
    se = float(v.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return NormReport(math.fsum(v.tolist()) / trials, "monte-carlo", G, trials, se)


def partial_sum(f: TrigPolynomial, M: int, N: int) -> TrigPolynomial:
    """``S_{M,N} f``: the coefficients with frequency in ``[-M, N]``."""
    return f.restrict((f.freqs >= -M) & (f.freqs <= N))


def dyadic_block_index(freqs) -> np.ndarray:
    """Label of the dyadic block of each frequency.

    0 for frequency 0; ``j + 1`` for ``[2^j, 2^(j+1))``; ``-(j + 1)`` for
    ``(-2^(j+1), -2^j]``.
    """
    fr = np.asarray(freqs, dtype=np.int64)
    mag = np.abs(fr)
    j = np.zeros(fr.shape, dtype=np.int64)
    nz = mag > 0
    j[nz] = np.frexp(mag[nz].astype(np.float64))[1]  # floor(log2)+1, exact below 2**53
    return np.sign(fr) * j


def square_function(f: TrigPolynomial, grid_size: int | None = None) -> np.ndarray:
    """``(sum_k |f_k|**2) ** 0.5`` on ``t_j = 2 pi j / G``, ``f_k`` the dyadic pieces."""
    G = grid_size or next_pow2(2 * f.degree + 2)
    if G < 2 * f.degree + 2:
        raise InvalidInput("grid too small for the spectrum")
    acc = np.zeros(G)
    labels = dyadic_block_index(f.freqs)
    for lab in np.unique(labels):
        acc += np.abs(f.restrict(labels == lab).grid_values(G)) ** 2
    return np.sqrt(acc)


def phi_inverse(y, alpha: float, tol: float = 1e-10) -> np.ndarray:
    """Inverse of ``phi(x) = x log(1+x) ** alpha`` by vectorised bisection."""
    y = np.asarray(y, dtype=np.float64)
    lo = np.zeros_like(y)
    hi = np.maximum(1.0, y)
    while True:  # phi(hi) >= y; grow where needed
        short = hi * np.log1p(hi) ** alpha < y
        if not short.any():
            break
        hi = np.where(short, 2 * hi, hi)
    while np.any((hi - lo > tol * hi) & (hi > 0)):  # relative, so tiny y keep precision
        mid = 0.5 * (lo + hi)
        big = mid * np.log1p(mid) ** alpha >= y
        hi = np.where(big, mid, hi)
        lo = np.where(big, lo, mid)
    return hi


@dataclass
class Rearrangement:
    astar: np.ndarray
    functional: float  # sup_n phi^{-1}(n) a*_n
    fitted_C: float  # smallest C with a*_n <= C (log n)^alpha / n, n >= 3


def coefficient_rearrangement(f: TrigPolynomial, alpha: float) -> Rearrangement:
    """Non-increasing rearrangement of ``|f^|`` and weak Orlicz functionals."""
    if not alpha > 0:
        raise InvalidInput("alpha must be positive")
    a = np.sort(np.abs(f.coeffs))[::-1]
    if a.size == 0:
        return Rearrangement(a, 0.0, 0.0)
    n = np.arange(1, a.size + 1, dtype=np.float64)
    functional = float(np.max(phi_inverse(n, alpha) * a))
    tail = n >= 3
    C = float(np.max(a[tail] * n[tail] / np.log(n[tail]) ** alpha)) if tail.any() else 0.0
    return Rearrangement(a, functional, C)
