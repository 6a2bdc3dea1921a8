"""F-function polynomials, model schema and the built-in two-dimensional example.

An F-function is a sparse polynomial in a coordinate-like variable ``x``, a
momentum-like variable ``y`` and the separation constants ``z_1..z_N``. A
model is N such polynomials sharing the same constants; each one yields one
separated equation F_i(q_i, p_i, z) = 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ArgumentError, ForbiddenRegionError, UnsupportedModelError

DOMAIN_L2_LINE = "L2_line"


@dataclass(frozen=True)
class Term:
    coeff: float
    xpow: int
    ypow: int
    zpow: tuple[int, ...]

    @property
    def signature(self) -> tuple[int, int, tuple[int, ...]]:
        return (self.xpow, self.ypow, self.zpow)


@dataclass(frozen=True)
class PolynomialF:
    terms: tuple[Term, ...]

    def __post_init__(self):
        terms = tuple(
            Term(float(t.coeff), int(t.xpow), int(t.ypow), tuple(int(k) for k in t.zpow))
            for t in self.terms
        )
        if not terms:
            raise ArgumentError("F-function needs at least one term")
        n = len(terms[0].zpow)
        sigs = set()
        for t in terms:
            if len(t.zpow) != n:
                raise ArgumentError("all terms need zpow vectors of the same length")
            if t.xpow < 0 or t.ypow < 0 or min(t.zpow, default=0) < 0:
                raise ArgumentError(f"negative exponent in term {t}")
            if not math.isfinite(t.coeff):
                raise ArgumentError(f"non-finite coefficient in term {t}")
            if t.signature in sigs:
                raise ArgumentError(f"duplicate exponent signature {t.signature}")
            sigs.add(t.signature)
        if max(t.ypow for t in terms) < 1:
            raise ArgumentError("F-function must depend on the momentum variable y")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_c", np.array([t.coeff for t in terms]))
        object.__setattr__(self, "_xp", np.array([t.xpow for t in terms]))
        object.__setattr__(self, "_yp", np.array([t.ypow for t in terms]))
        object.__setattr__(self, "_zp", np.array([t.zpow for t in terms], dtype=int).reshape(len(terms), n))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[float, int, int, Sequence[int]]]) -> "PolynomialF":
        """Build from (coeff, xpow, ypow, zpow) tuples, merging repeats and dropping zeros."""
        acc: dict[tuple, float] = {}
        for c, xp, yp, zp in terms:
            key = (int(xp), int(yp), tuple(int(k) for k in zp))
            acc[key] = acc.get(key, 0.0) + float(c)
        return cls(tuple(Term(c, *k) for k, c in acc.items() if c != 0.0))

    @property
    def n_z(self) -> int:
        return self._zp.shape[1]

    def zfactor(self, z: NDArray) -> NDArray:
        return np.prod(np.asarray(z, dtype=float)[None, :] ** self._zp, axis=1)

    def y_split(self, x: ArrayLike, z: ArrayLike) -> tuple[NDArray, NDArray]:
        """Coefficients (A, B) of F = A(x, z) y^2 + B(x, z).

        Raises UnsupportedModelError outside the even, at-most-quadratic class.
        """
        if np.any(self._yp % 2 == 1) or np.any(self._yp > 2):
            raise UnsupportedModelError("only even momentum powers up to y^2 are supported")
        z = _check_z(self, z)
        x = np.asarray(x, dtype=float)
        cz = self._c * self.zfactor(z)
        xp = x[..., None] ** self._xp
        a = np.sum(np.where(self._yp == 2, cz, 0.0) * xp, axis=-1)
        b = np.sum(np.where(self._yp == 0, cz, 0.0) * xp, axis=-1)
        return a, b

    def y_split_dx(self, x: ArrayLike, z: ArrayLike) -> tuple[NDArray, NDArray]:
        """x-derivatives (A', B') of the coefficients returned by y_split."""
        z = _check_z(self, z)
        x = np.asarray(x, dtype=float)
        cz = self._c * self.zfactor(z) * self._xp
        xp = x[..., None] ** np.maximum(self._xp - 1, 0)
        a = np.sum(np.where(self._yp == 2, cz, 0.0) * xp, axis=-1)
        b = np.sum(np.where(self._yp == 0, cz, 0.0) * xp, axis=-1)
        return a, b

    def dz(self, x: float, y: float, z: ArrayLike) -> NDArray:
        """Gradient of F with respect to the separation constants."""
        z = _check_z(self, z)
        base = self._c * float(x) ** self._xp * float(y) ** self._yp
        out = np.empty(self.n_z)
        for k in range(self.n_z):
            pk = self._zp[:, k]
            zk = z.copy()
            zpow = self._zp.copy()
            zpow[:, k] = np.maximum(pk - 1, 0)
            out[k] = np.sum(base * pk * np.prod(zk[None, :] ** zpow, axis=1))
        return out


def _check_z(f: PolynomialF, z: ArrayLike) -> NDArray:
    z = np.asarray(z, dtype=float)
    if z.shape != (f.n_z,):
        raise ArgumentError(f"z must have length {f.n_z}, got shape {z.shape}")
    return z


def eval_f(f: PolynomialF, x: float, y: float, z: ArrayLike) -> float:
    """Evaluate sum(coeff * x^xpow * y^ypow * prod z_k^zpow_k)."""
    z = _check_z(f, z)
    return float(np.sum(f._c * float(x) ** f._xp * float(y) ** f._yp * f.zfactor(z)))


def y_radicand(f: PolynomialF, x: ArrayLike, z: ArrayLike) -> NDArray:
    """Y^2 = -B/A for F = A y^2 + B; positive where the motion is allowed."""
    a, b = f.y_split(x, z)
    if np.any(a == 0.0):
        raise UnsupportedModelError("coefficient of y^2 vanishes")
    return -b / a


def solve_y_branch(f: PolynomialF, x: float, z: ArrayLike, sign: int = 1) -> float:
    """Momentum Y(x, z) = sign*sqrt(-B/A) solving F(x, Y, z) = 0."""
    if sign not in (1, -1):
        raise ArgumentError("sign must be +1 or -1")
    a, b = f.y_split(x, z)
    if a == 0.0:
        raise UnsupportedModelError("coefficient of y^2 vanishes")
    rad = float(-b / a)
    # rounding slack relative to the size of the individual terms
    slack = 1e-14 * float(np.sum(np.abs(f._c * f.zfactor(np.asarray(z, float)) * float(x) ** f._xp)) / abs(a))
    if rad < -slack:
        raise ForbiddenRegionError(f"radicand {rad:.6g} < 0 at x={x}")
    return sign * math.sqrt(max(rad, 0.0))


@dataclass(frozen=True)
class ModelSpec:
    n_dims: int
    fs: tuple[PolynomialF, ...]
    hbar: float
    branch_seed: tuple[float, ...]
    domain: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n_dims < 1:
            raise ArgumentError("n_dims must be positive")
        object.__setattr__(self, "fs", tuple(self.fs))
        object.__setattr__(self, "branch_seed", tuple(float(v) for v in self.branch_seed))
        if len(self.fs) != self.n_dims:
            raise ArgumentError(f"expected {self.n_dims} F-functions, got {len(self.fs)}")
        if any(f.n_z != self.n_dims for f in self.fs):
            raise ArgumentError("every zpow vector must have length n_dims")
        if len(self.branch_seed) != self.n_dims:
            raise ArgumentError("branch_seed must have length n_dims")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ArgumentError("hbar must be a positive real")
        domain = tuple(self.domain) or (DOMAIN_L2_LINE,) * self.n_dims
        if len(domain) != self.n_dims or any(d != DOMAIN_L2_LINE for d in domain):
            raise ArgumentError(f"only the '{DOMAIN_L2_LINE}' domain tag is supported")
        object.__setattr__(self, "domain", domain)
        for f in self.fs:
            # the sign of the quantized momentum only drops out for even powers
            f.y_split(0.0, np.zeros(self.n_dims))

    def to_dict(self) -> dict:
        return {
            "n_dims": self.n_dims,
            "hbar": self.hbar,
            "branch_seed": list(self.branch_seed),
            "fs": [
                [
                    {"coeff": t.coeff, "xpow": t.xpow, "ypow": t.ypow, "zpow": list(t.zpow)}
                    for t in f.terms
                ]
                for f in self.fs
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        try:
            fs = tuple(
                PolynomialF(tuple(Term(t["coeff"], t["xpow"], t["ypow"], tuple(t["zpow"])) for t in terms))
                for terms in d["fs"]
            )
            return cls(int(d["n_dims"]), fs, float(d["hbar"]), tuple(d["branch_seed"]))
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f"malformed model: {exc!r}") from exc

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"model file is not JSON: {exc}") from exc


@dataclass(frozen=True)
class ExampleParams:
    """Deformation length ``a``, nonlinearity ``eps`` and Planck constant ``hbar``."""

    a: float = 1.3
    eps: float = 0.7
    hbar: float = 0.5

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ArgumentError(f"a must be positive, got {self.a}")
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise ArgumentError(f"eps must be nonnegative, got {self.eps}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ArgumentError(f"hbar must be positive, got {self.hbar}")

    @property
    def h_max(self) -> float:
        """Accumulation point a^2/2 of the discrete spectrum."""
        return 0.5 * self.a * self.a


def _vector(v: ArrayLike, name: str) -> NDArray:
    arr = np.array(v, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} entries must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PhasePoint:
    q: NDArray
    p: NDArray

    def __post_init__(self):
        q, p = _vector(self.q, "q"), _vector(self.p, "p")
        if q.shape != p.shape:
            raise ArgumentError("q and p must have the same length")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size

    def as_vector(self) -> NDArray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, v: ArrayLike) -> "PhasePoint":
        v = np.asarray(v, dtype=float)
        n = v.size // 2
        return cls(v[:n], v[n:])


@dataclass(frozen=True)
class SpectralPoint:
    h: NDArray
    qnums: tuple[int, ...]
    hbar: float

    def __post_init__(self):
        h = _vector(self.h, "h")
        qnums = tuple(int(k) for k in self.qnums)
        if len(qnums) != h.size:
            raise ArgumentError("h and qnums must have the same length")
        if min(qnums) < 0:
            raise ArgumentError("quantum numbers must be nonnegative")
        if not self.hbar > 0:
            raise ArgumentError("hbar must be positive")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "qnums", qnums)


@dataclass(frozen=True)
class EnergyMap:
    """Polynomial E(h_1..h_N) given as (coeff, powers) terms."""

    terms: tuple[tuple[float, tuple[int, ...]], ...] = field(default=())

    def __post_init__(self):
        terms = tuple((float(c), tuple(int(k) for k in pw)) for c, pw in self.terms)
        if not all(math.isfinite(c) for c, _ in terms):
            raise ArgumentError("energy-map coefficients must be finite")
        if len({len(pw) for _, pw in terms}) > 1:
            raise ArgumentError("energy-map terms must share one dimension")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def projection(cls, i: int, n: int) -> "EnergyMap":
        return cls(((1.0, tuple(int(k == i) for k in range(n))),))


def compose_energy(e: EnergyMap, h: ArrayLike) -> float:
    h = np.asarray(h, dtype=float)
    total = 0.0
    for c, pw in e.terms:
        if len(pw) != h.size:
            raise ArgumentError(f"h must have length {len(pw)}, got {h.size}")
        total += c * float(np.prod(h ** np.asarray(pw)))
    return total


def build_example_model(params: ExampleParams) -> ModelSpec:
    """The two-dimensional example with separation constants z = (h, g).

    F_{1,2} = x^2 + y^2 - eps/(2a^4) h^2 - (2x^2/a^2 + 1) h +/- g
    """
    a2 = params.a * params.a
    quad = -params.eps / (2.0 * a2 * a2)

    def f(gsign: float) -> PolynomialF:
        return PolynomialF.from_terms(
            [
                (1.0, 2, 0, (0, 0)),
                (1.0, 0, 2, (0, 0)),
                (quad, 0, 0, (2, 0)),
                (-2.0 / a2, 2, 0, (1, 0)),
                (-1.0, 0, 0, (1, 0)),
                (gsign, 0, 0, (0, 1)),
            ]
        )

    return ModelSpec(2, (f(1.0), f(-1.0)), params.hbar, (0.0, 0.0))


def match_example(model: ModelSpec, rtol: float = 1e-12) -> ExampleParams | None:
    """Recover ExampleParams when ``model`` is (numerically) the example model."""
    if model.n_dims != 2:
        return None
    coef = {t.signature: t.coeff for t in model.fs[0].terms}
    c_x2h = coef.get((2, 0, (1, 0)))
    if c_x2h is None or c_x2h >= 0:
        return None
    a = math.sqrt(-2.0 / c_x2h)
    eps = -2.0 * a**4 * coef.get((0, 0, (2, 0)), 0.0)
    try:
        ref = build_example_model(ExampleParams(a, eps, model.hbar))
    except ArgumentError:
        return None
    for f, g in zip(model.fs, ref.fs):
        fc = {t.signature: t.coeff for t in f.terms}
        gc = {t.signature: t.coeff for t in g.terms}
        if fc.keys() != gc.keys():
            return None
        if any(abs(fc[k] - gc[k]) > rtol * max(1.0, abs(gc[k])) for k in gc):
            return None
    return ExampleParams(a, eps, model.hbar)
