"""Complex scalars stored as real pairs and the dimensionless groups of the
time-spectral convection-diffusion problem."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

Number = Union[int, float, complex, "Cx"]


@dataclass(frozen=True)
class Cx:
    """Complex value with explicit real and imaginary parts.

    Arithmetic mixes freely with Python numbers; ``complex(z)`` converts back.
    """

    re: float
    im: float = 0.0

    def __post_init__(self):
        re, im = float(self.re), float(self.im)
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValueError(f"non-finite complex value ({re}, {im})")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def of(cls, z: Number) -> "Cx":
        if isinstance(z, Cx):
            return z
        z = complex(z)
        return cls(z.real, z.imag)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)

    def conjugate(self) -> "Cx":
        return Cx(self.re, -self.im)

    def __neg__(self):
        return Cx(-self.re, -self.im)

    def __add__(self, other):
        return Cx.of(complex(self) + complex(_as_number(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Cx.of(complex(self) - complex(_as_number(other)))

    def __rsub__(self, other):
        return Cx.of(complex(_as_number(other)) - complex(self))

    def __mul__(self, other):
        return Cx.of(complex(self) * complex(_as_number(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Cx.of(complex(self) / complex(_as_number(other)))

    def __rtruediv__(self, other):
        return Cx.of(complex(_as_number(other)) / complex(self))

    def isclose(self, other, rel_tol=1e-12, abs_tol=0.0) -> bool:
        return cmath.isclose(complex(self), complex(_as_number(other)),
                             rel_tol=rel_tol, abs_tol=abs_tol)


def _as_number(z):
    if isinstance(z, Cx):
        return complex(z)
    if isinstance(z, (int, float, complex, np.number)):
        return z
    raise TypeError(f"unsupported operand {type(z).__name__}")


def cx_fn(kind: str, z: Number) -> Cx:
    """Evaluate an elementary function on the principal branch.

    Parameters
    ----------
    kind : {"exp", "sqrt", "sinh", "cosh", "coth"}
    z : complex-like

    Raises
    ------
    ZeroDivisionError
        ``coth`` at zero.
    """
    w = complex(z)
    if kind == "exp":
        out = cmath.exp(w)
    elif kind == "sqrt":
        out = cmath.sqrt(w)
    elif kind == "sinh":
        out = cmath.sinh(w)
    elif kind == "cosh":
        out = cmath.cosh(w)
    elif kind == "coth":
        if w == 0:
            raise ZeroDivisionError("coth is singular at 0")
        out = cmath.cosh(w) / cmath.sinh(w)
    else:
        raise ValueError(f"unknown function {kind!r}")
    return Cx.of(out)


@dataclass(frozen=True)
class PhysicalParams:
    """Frequency, velocity, diffusivity and domain length of one Fourier mode.

    ``velocity`` is a scalar in 1D or a sequence in 2D/3D.
    """

    omega: float
    velocity: object
    kappa: float
    domain_length: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be strictly positive")
        if not self.domain_length > 0:
            raise ValueError("domain_length must be positive")
        if self.omega < 0:
            raise ValueError("omega must be nonnegative")

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(np.atleast_1d(self.velocity)))

    @classmethod
    def from_groups(cls, P: float, W: float, kappa: float = 1.0,
                    domain_length: float = 1.0, direction=None) -> "PhysicalParams":
        """Physical parameters that realize domain Peclet ``P`` and Womersley ``W``.

        ``direction`` (a vector) turns the signed speed into a velocity vector.
        """
        a = 2.0 * kappa * P / domain_length
        omega = kappa * W ** 2 / domain_length ** 2
        velocity = a if direction is None else a * np.asarray(direction, float)
        return cls(omega=omega, velocity=velocity, kappa=kappa, domain_length=domain_length)

    @classmethod
    def from_element_groups(cls, alpha: float, beta: float, h: float,
                            kappa: float = 1.0, domain_length: float = 1.0) -> "PhysicalParams":
        """Physical parameters giving element Peclet ``alpha`` and ``beta`` at size ``h``."""
        return cls(omega=6.0 * kappa * beta / h ** 2, velocity=2.0 * kappa * alpha / h,
                   kappa=kappa, domain_length=domain_length)


@dataclass(frozen=True)
class DimensionlessGroups:
    P: float
    W: float
    alpha: float
    beta: float


def dimensionless_groups(params: PhysicalParams, h: float) -> DimensionlessGroups:
    """Domain and element Peclet/Womersley numbers for element size ``h``.

    The velocity enters through its signed value in 1D and its magnitude
    otherwise.
    """
    if not h > 0:
        raise ValueError("element size must be positive")
    v = np.atleast_1d(np.asarray(params.velocity, dtype=float))
    a = float(v[0]) if v.size == 1 else float(np.linalg.norm(v))
    L, k = params.domain_length, params.kappa
    return DimensionlessGroups(
        P=a * L / (2.0 * k),
        W=L * math.sqrt(params.omega / k),
        alpha=a * h / (2.0 * k),
        beta=params.omega * h * h / (6.0 * k),
    )
