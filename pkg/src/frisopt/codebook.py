"""Unit-modulus phase codebooks and angular quantization primitives.

All angle helpers accept scalars or numpy arrays and broadcast elementwise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from os import PathLike
from typing import Sequence, Union

import numpy as np

from frisopt.errors import InvalidArgumentError

TWO_PI = 2.0 * np.pi

# Relative slack (in units of one grid step) below which two grid points count as tied.
_TIE_TOL = 1e-10


def _check_levels(m_p: int) -> int:
    if int(m_p) != m_p or m_p < 2:
        raise InvalidArgumentError(f"m_p must be an integer >= 2, got {m_p!r}")
    return int(m_p)


def _scalarize(x, like):
    return float(x) if np.ndim(like) == 0 else x


def wrap(phi):
    """Map angles to the principal interval (-pi, pi]."""
    arr = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("wrap() requires finite angles")
    out = arr - TWO_PI * np.ceil((arr - np.pi) / TWO_PI)
    # ceil() can land one period low when (arr - pi) / 2pi rounds to an integer from above
    out = np.where(out <= -np.pi, out + TWO_PI, out)
    return _scalarize(out, phi)


def quant_residual(phi, m_p: int):
    """Angular distance from ``phi`` to the nearest point of the ``m_p``-ary phase grid."""
    m_p = _check_levels(m_p)
    step = TWO_PI / m_p
    x = np.mod(np.asarray(phi, dtype=float), step)
    out = np.minimum(x, step - x)
    return _scalarize(np.abs(out), phi)


def _nearest_index(phi, m_p: int) -> np.ndarray:
    step = TWO_PI / m_p
    t = np.mod(np.asarray(phi, dtype=float), TWO_PI) / step
    k = np.ceil(t - 0.5 - _TIE_TOL).astype(np.int64)
    # the midpoint between k = m_p - 1 and k = 0 resolves to the smaller index, 0
    k = np.where(np.abs(t - (m_p - 0.5)) <= _TIE_TOL, 0, k)
    return np.mod(k, m_p)


def nearest_codeword(phi, m_p: int):
    """Index and value of the regular-polygon codeword closest in angle to ``phi``.

    Exact midpoint ties resolve to the smaller index.
    """
    m_p = _check_levels(m_p)
    k = _nearest_index(phi, m_p)
    w = np.exp(1j * TWO_PI * k / m_p)
    if np.ndim(phi) == 0:
        return int(k), complex(w)
    return k, w


def polygon_support(phi, m_p: int):
    """Support function of the regular ``m_p``-gon inscribed in the unit circle."""
    return _scalarize(np.cos(quant_residual(phi, m_p)), phi)


@dataclass(frozen=True)
class PhaseCodebook:
    """A finite set of distinct unit-modulus reflection coefficients."""

    codewords: np.ndarray

    def __post_init__(self):
        cw = np.atleast_1d(np.asarray(self.codewords, dtype=complex)).copy()
        if cw.ndim != 1 or cw.size == 0:
            raise InvalidArgumentError("codebook must be a nonempty 1-D collection")
        if not np.all(np.isfinite(cw)):
            raise InvalidArgumentError("codewords must be finite")
        if np.max(np.abs(np.abs(cw) - 1.0)) > 1e-12:
            raise InvalidArgumentError("codewords must have unit modulus")
        ang = np.sort(np.mod(np.angle(cw), TWO_PI))
        if cw.size > 1:
            gaps = np.diff(np.append(ang, ang[0] + TWO_PI))
            if np.min(gaps) <= 1e-12:
                raise InvalidArgumentError("codewords must be pairwise distinct")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    def __len__(self) -> int:
        return self.codewords.size

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.codewords)

    @classmethod
    def from_angles(cls, angles: Sequence[float]) -> "PhaseCodebook":
        return cls(np.exp(1j * np.asarray(angles, dtype=float)))

    @classmethod
    def from_json(cls, text: str) -> "PhaseCodebook":
        angles = json.loads(text)
        if not isinstance(angles, list) or not all(isinstance(a, (int, float)) for a in angles):
            raise InvalidArgumentError("codebook JSON must be an array of angles in radians")
        return cls.from_angles(angles)

    @classmethod
    def load(cls, path: Union[str, PathLike]) -> "PhaseCodebook":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def to_json(self) -> str:
        return json.dumps([float(a) for a in self.phases])


@dataclass(frozen=True)
class RegularPolygonCodebook:
    """The ``m_p`` uniformly spaced phases ``exp(j 2 pi k / m_p)``, kept implicit."""

    m_p: int

    def __post_init__(self):
        _check_levels(self.m_p)

    def __len__(self) -> int:
        return self.m_p

    def materialize(self) -> PhaseCodebook:
        # Only for cross-checks; the closed-form path never enumerates codewords.
        return PhaseCodebook(np.exp(1j * TWO_PI * np.arange(self.m_p) / self.m_p))


def general_support(direction: complex, cb: PhaseCodebook) -> tuple[float, complex]:
    """Largest projection ``Re{conj(direction) * w}`` over the codebook and its argmax.

    Ties go to the lowest codeword index.
    """
    if len(cb) == 0:
        raise InvalidArgumentError("empty codebook")
    if abs(abs(direction) - 1.0) > 1e-9:
        raise InvalidArgumentError("direction must have unit modulus")
    proj = np.real(np.conj(direction) * cb.codewords)
    i = int(np.argmax(proj))
    return float(proj[i]), complex(cb.codewords[i])
