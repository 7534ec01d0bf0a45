"""Exact FRIS configuration for a fixed beamformer via directional support search.

For a direction ``phi`` every port gets a score (its best projection onto
``e^{j phi}``), the ``m_o`` best ports are selected and each is given its
maximizing codeword.  The support value as a function of ``phi`` is a
piecewise sinusoid; its maximizer is found among a finite candidate set made
of the codeword-switch angles, the Top-``m_o`` switch angles and the
stationary point of every region.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from frisopt.codebook import (
    TWO_PI,
    PhaseCodebook,
    RegularPolygonCodebook,
    _check_levels,
    _nearest_index,
    quant_residual,
)
from frisopt.errors import InvalidArgumentError

CodebookSpec = Union[RegularPolygonCodebook, PhaseCodebook, Sequence[PhaseCodebook]]

_DEDUP_TOL = 1e-12
_CROSS_TOL = 1e-12
_MIN_RESULTANT = 1e-15
_EVAL_CHUNK = 1024


@dataclass(frozen=True)
class CascadedLink:
    """Direct-path scalar ``d`` and per-port cascaded coefficients ``h`` for one beamformer."""

    d: complex
    h: np.ndarray

    def __post_init__(self):
        h = np.atleast_1d(np.asarray(self.h, dtype=complex)).copy()
        d = complex(self.d)
        if h.ndim != 1 or h.size < 1:
            raise InvalidArgumentError("a link needs at least one port")
        if not (np.all(np.isfinite(h)) and np.isfinite(d.real) and np.isfinite(d.imag)):
            raise InvalidArgumentError("link coefficients must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "d", d)

    @property
    def num_ports(self) -> int:
        return self.h.size

    @property
    def a(self) -> np.ndarray:
        return np.abs(self.h)

    @property
    def alpha(self) -> np.ndarray:
        return np.angle(self.h)

    @property
    def a_d(self) -> float:
        return abs(self.d)

    @property
    def alpha_d(self) -> float:
        return float(np.angle(self.d))


@dataclass(frozen=True)
class FrisConfiguration:
    """Selected ports, per-port coefficients (zero off the selection) and the combined sum."""

    gamma: tuple
    w: np.ndarray
    z: complex
    phi: float | None = None
    support: float | None = None

    @property
    def abs_z(self) -> float:
        return abs(self.z)

    @classmethod
    def from_selection(cls, link: CascadedLink, gamma, codewords, phi=None, support=None):
        gamma = tuple(int(m) for m in gamma)
        w = np.zeros(link.num_ports, dtype=complex)
        w[list(gamma)] = np.asarray(codewords, dtype=complex)
        order = np.argsort(gamma, kind="stable")
        gamma = tuple(gamma[i] for i in order)
        z = link.d + complex(np.sum(link.h[list(gamma)] * w[list(gamma)]))
        w.setflags(write=False)
        return cls(gamma=gamma, w=w, z=z, phi=phi, support=support)


@dataclass(frozen=True)
class DirectionalEvaluation:
    phi: float
    support_value: float
    gamma: tuple
    codewords: Mapping[int, complex]


@dataclass(frozen=True)
class BreakpointPartition:
    """Regions of ``[0, 2pi)`` on which codewords and the selected set stay fixed.

    Region ``l`` is the open interval ``(lower[l], upper[l])``; the last region wraps
    past ``2pi`` so ``upper`` may exceed it.
    """

    breakpoints: np.ndarray
    quant_breakpoints: np.ndarray
    switch_angles: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    codeword_index: np.ndarray
    gamma: np.ndarray  # (regions, m_o) selected ports, ascending per row
    resultants: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.lower.size

    def stationary_candidates(self) -> np.ndarray:
        """``arg C_l`` for every region whose resultant direction falls inside it."""
        ok = np.abs(self.resultants) >= _MIN_RESULTANT
        ang = np.mod(np.angle(self.resultants), TWO_PI)
        off = np.mod(ang - self.lower, TWO_PI)
        inside = ok & (off > 0) & (off < self.upper - self.lower)
        return np.sort(np.mod(self.lower[inside] + off[inside], TWO_PI))

    def candidates(self) -> np.ndarray:
        return _dedupe(np.concatenate([self.breakpoints, self.stationary_candidates()]))


# ---------------------------------------------------------------------------
# per-port geometry


class _PolygonPorts:
    """Closed-form scores for a shared regular polygon codebook."""

    def __init__(self, link: CascadedLink, m_p: int):
        self.m_p = _check_levels(m_p)
        self.a = link.a
        self.alpha = link.alpha

    def quant_breaks(self) -> np.ndarray:
        return build_quant_breakpoints(self.alpha, self.m_p)

    def scores(self, phis: np.ndarray):
        rel = phis[:, None] - self.alpha[None, :]
        return self.a * np.cos(quant_residual(rel, self.m_p)), _nearest_index(rel, self.m_p)

    def indices(self, phis: np.ndarray) -> np.ndarray:
        return _nearest_index(phis[:, None] - self.alpha[None, :], self.m_p)

    def betas(self, idx: np.ndarray) -> np.ndarray:
        return self.alpha + TWO_PI * idx / self.m_p

    def codewords(self, ports, idx) -> np.ndarray:
        return np.exp(1j * TWO_PI * np.asarray(idx) / self.m_p)


class _FinitePorts:
    """Scores for arbitrary finite codebooks, one per port (possibly shared)."""

    def __init__(self, link: CascadedLink, codebooks: Sequence[PhaseCodebook]):
        if len(codebooks) != link.num_ports:
            raise InvalidArgumentError("need exactly one codebook per port")
        sizes = [len(cb) for cb in codebooks]
        if min(sizes) == 0:
            raise InvalidArgumentError("empty codebook")
        width = max(sizes)
        self.a = link.a
        self.alpha = link.alpha
        self.valid = np.zeros((link.num_ports, width), dtype=bool)
        self.cw = np.ones((link.num_ports, width), dtype=complex)
        for m, cb in enumerate(codebooks):
            self.valid[m, : sizes[m]] = True
            self.cw[m, : sizes[m]] = cb.codewords
        # phase of the effective vertex h_m * w for every codeword
        self.theta = self.alpha[:, None] + np.angle(self.cw)

    def quant_breaks(self) -> np.ndarray:
        out = []
        for m in range(self.a.size):
            t = np.sort(np.mod(self.theta[m, self.valid[m]], TWO_PI))
            if self.a[m] == 0.0 or t.size < 2:
                continue
            gaps = np.diff(np.append(t, t[0] + TWO_PI))
            out.append(np.mod(t + gaps / 2.0, TWO_PI))
        return _dedupe(np.concatenate(out)) if out else np.empty(0)

    def scores(self, phis: np.ndarray):
        proj = self.a[None, :, None] * np.cos(phis[:, None, None] - self.theta[None, :, :])
        proj = np.where(self.valid[None], proj, -np.inf)
        idx = np.argmax(proj, axis=2)
        return np.take_along_axis(proj, idx[..., None], axis=2)[..., 0], idx

    def indices(self, phis: np.ndarray) -> np.ndarray:
        return self.scores(phis)[1]

    def betas(self, idx: np.ndarray) -> np.ndarray:
        return np.take_along_axis(np.broadcast_to(self.theta, idx.shape + self.theta.shape[1:]),
                                  idx[..., None], axis=-1)[..., 0]

    def codewords(self, ports, idx) -> np.ndarray:
        return self.cw[np.asarray(ports), np.asarray(idx)]


def _ports_for(link: CascadedLink, cb: CodebookSpec):
    if isinstance(cb, RegularPolygonCodebook):
        return _PolygonPorts(link, cb.m_p)
    if isinstance(cb, PhaseCodebook):
        return _FinitePorts(link, [cb] * link.num_ports)
    return _FinitePorts(link, list(cb))


# ---------------------------------------------------------------------------
# helpers


def _dedupe(angles) -> np.ndarray:
    t = np.sort(np.mod(np.asarray(angles, dtype=float).ravel(), TWO_PI))
    if t.size == 0:
        return t
    keep = np.concatenate([[True], np.diff(t) > _DEDUP_TOL])
    t = t[keep]
    if t.size > 1 and t[-1] - t[0] > TWO_PI - _DEDUP_TOL:
        t = t[:-1]
    return t


def _regions(breaks: np.ndarray):
    if breaks.size == 0:
        return np.array([0.0]), np.array([TWO_PI])
    return breaks, np.append(breaks[1:], breaks[0] + TWO_PI)


def _check_mo(m_o: int, num_ports: int) -> int:
    if int(m_o) != m_o or not 1 <= m_o <= num_ports:
        raise InvalidArgumentError(f"m_o must satisfy 1 <= m_o <= {num_ports}, got {m_o!r}")
    return int(m_o)


def _top_indices(scores: np.ndarray, m_o: int) -> np.ndarray:
    # stable sort on -score keeps the lower index first among equal scores
    return np.argsort(-scores, axis=-1, kind="stable")[..., :m_o]


def _top_mask_one_sided(b: np.ndarray, phi: np.ndarray, m_o: int, side: int) -> np.ndarray:
    """Top-``m_o`` membership just right (side=+1) or left (side=-1) of ``phi``.

    ``b`` holds the region-fixed vertices ``a_m e^{j beta_m}`` row by row; ties in value
    are resolved by the slope in the direction of travel, then by index.
    """
    rot = np.exp(-1j * phi)[:, None] * b
    val = rot.real
    order = np.argsort(-val, axis=1, kind="stable")
    mask = np.zeros(b.shape, dtype=bool)
    np.put_along_axis(mask, order[:, :m_o], True, axis=1)
    if m_o == b.shape[1]:
        return mask
    # rows whose cut sits on a (near) tie need the slope to decide
    cut = np.take_along_axis(val, order[:, m_o - 1 : m_o + 1], axis=1)
    scale = np.maximum(np.max(np.abs(b), axis=1), 1e-300)
    tied = np.flatnonzero(cut[:, 0] - cut[:, 1] <= 1e-12 * scale)
    if tied.size:
        slope = side * rot.imag[tied]
        idx = np.broadcast_to(np.arange(b.shape[1]), slope.shape)
        # values within the tie quantum compare equal so the slope breaks the tie
        level = np.round(val[tied] / (1e-12 * scale[tied, None]))
        sub = np.lexsort((idx, -slope, -level), axis=-1)
        rows = np.zeros((tied.size, b.shape[1]), dtype=bool)
        np.put_along_axis(rows, sub[:, :m_o], True, axis=1)
        mask[tied] = rows
    return mask


def _sweep_switches(b: np.ndarray, in_set: np.ndarray, lo: float, hi: float) -> list:
    """Follow the Top set across one region and return the angles where it changes.

    Only pairs straddling the selection cut are examined: a non-selected port ``j``
    overtakes a selected port ``i`` where ``Re{e^{-j phi}(b_i - b_j)}`` crosses zero
    downward, i.e. at ``arg(b_i - b_j) + pi/2``.
    """
    in_set = in_set.copy()
    ports = np.arange(b.size)
    out, phi = [], lo
    for _ in range(4 * b.size * b.size + 8):
        ins, outs = ports[in_set], ports[~in_set]
        if ins.size == 0 or outs.size == 0:
            break
        c = b[ins][:, None] - b[outs][None, :]
        t = np.mod(np.angle(c) + np.pi / 2 - phi + _CROSS_TOL, TWO_PI) - _CROSS_TOL
        t = np.where(np.abs(c) > 0.0, t, np.inf)
        flat = int(np.argmin(t))
        step = t.flat[flat]
        if not phi + step < hi - _CROSS_TOL:
            break
        i, j = divmod(flat, outs.size)
        phi = phi + max(step, 0.0)
        in_set[ins[i]] = False
        in_set[outs[j]] = True
        out.append(phi)
    return out


# ---------------------------------------------------------------------------
# public operations


def port_score(phi: float, h_m: complex, cb: PhaseCodebook) -> tuple[float, complex]:
    """Best projection of ``h_m * w`` onto ``e^{j phi}`` over the codebook, with its codeword."""
    if len(cb) == 0:
        raise InvalidArgumentError("empty codebook")
    if not np.isfinite(h_m):
        raise InvalidArgumentError("h_m must be finite")
    proj = np.real(np.exp(-1j * phi) * h_m * cb.codewords)
    i = int(np.argmax(proj))
    return float(proj[i]), complex(cb.codewords[i])


def port_score_polygon(phi: float, a_m: float, alpha_m: float, m_p: int) -> tuple[float, int]:
    """Closed-form port score ``a_m cos(residual(phi - alpha_m))`` and the codeword index."""
    m_p = _check_levels(m_p)
    if a_m < 0:
        raise InvalidArgumentError("a_m must be nonnegative")
    rel = phi - alpha_m
    return float(a_m * np.cos(quant_residual(rel, m_p))), int(_nearest_index(rel, m_p))


def top_mo_select(scores: Sequence[float], m_o: int) -> tuple:
    """Indices of the ``m_o`` largest scores, ties to the lowest index, in ascending order."""
    scores = np.asarray(scores, dtype=float)
    m_o = _check_mo(m_o, scores.size)
    return tuple(sorted(int(i) for i in _top_indices(scores, m_o)))


def support_profile(phis, link: CascadedLink, cb: CodebookSpec, m_o: int) -> np.ndarray:
    """Vectorized support value at every angle in ``phis``."""
    m_o = _check_mo(m_o, link.num_ports)
    return _support_values(np.atleast_1d(np.asarray(phis, dtype=float)), link, _ports_for(link, cb), m_o)


def _support_values(phis: np.ndarray, link: CascadedLink, ports, m_o: int) -> np.ndarray:
    out = np.empty(phis.size)
    for start in range(0, phis.size, _EVAL_CHUNK):
        p = phis[start : start + _EVAL_CHUNK]
        s, _ = ports.scores(p)
        top = np.take_along_axis(s, _top_indices(s, m_o), axis=1)
        out[start : start + _EVAL_CHUNK] = np.real(np.exp(-1j * p) * link.d) + top.sum(axis=1)
    return out


def _configuration_at(phi: float, link: CascadedLink, ports, m_o: int) -> FrisConfiguration:
    s, idx = ports.scores(np.array([phi]))
    top = _top_indices(s, m_o)[0]
    support = float(np.real(np.exp(-1j * phi) * link.d) + s[0, top].sum())
    cws = ports.codewords(top, idx[0, top])
    return FrisConfiguration.from_selection(link, top, cws, phi=float(phi), support=support)


def support_at(phi: float, link: CascadedLink, cb: CodebookSpec, m_o: int) -> DirectionalEvaluation:
    """Support value, Top-``m_o`` set and maximizing codewords in direction ``e^{j phi}``."""
    m_o = _check_mo(m_o, link.num_ports)
    cfg = _configuration_at(float(phi), link, _ports_for(link, cb), m_o)
    return DirectionalEvaluation(
        phi=float(phi),
        support_value=cfg.support,
        gamma=cfg.gamma,
        codewords={m: complex(cfg.w[m]) for m in cfg.gamma},
    )


def build_quant_breakpoints(alphas, m_p: int) -> np.ndarray:
    """Angles where some port's nearest polygon codeword switches, sorted in ``[0, 2pi)``."""
    m_p = _check_levels(m_p)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    mids = (2 * np.arange(m_p) + 1) * np.pi / m_p
    return _dedupe(alphas[:, None] + mids[None, :])


def region_resultant(gamma, betas, amps, d: complex) -> complex:
    """``d + sum_m a_m e^{j beta_m}`` over the selected ports of one region.

    ``betas`` and ``amps`` are either indexed by port (length ``M``) or aligned with ``gamma``.
    """
    gamma = list(gamma)
    betas = np.asarray(betas, dtype=float)
    amps = np.asarray(amps, dtype=float)
    if betas.size != len(gamma):
        betas, amps = betas[gamma], amps[gamma]
    return complex(d) + complex(np.sum(amps * np.exp(1j * betas)))


def _switch_angles(ports, link: CascadedLink, m_o: int, qbreaks: np.ndarray) -> np.ndarray:
    lo, hi = _regions(qbreaks)
    b = link.a * np.exp(1j * ports.betas(ports.indices(0.5 * (lo + hi))))
    left = _top_mask_one_sided(b, lo, m_o, +1)
    right = _top_mask_one_sided(b, hi, m_o, -1)
    found = []
    for r in np.flatnonzero(np.any(left != right, axis=1)):
        found.extend(_sweep_switches(b[r], left[r], lo[r], hi[r]))
    return _dedupe(found)


def detect_top_switch_angles(link: CascadedLink, m_o: int, m_p: int, breakpoints=None) -> np.ndarray:
    """Angles where the Top-``m_o`` port set changes inside the codeword-switch partition."""
    m_o = _check_mo(m_o, link.num_ports)
    ports = _PolygonPorts(link, m_p)
    qb = ports.quant_breaks() if breakpoints is None else _dedupe(breakpoints)
    return _switch_angles(ports, link, m_o, qb)


def _partition(ports, link: CascadedLink, m_o: int) -> BreakpointPartition:
    qb = ports.quant_breaks()
    switches = _switch_angles(ports, link, m_o, qb)
    br = _dedupe(np.concatenate([qb, switches]))
    lo, hi = _regions(br)
    s, idx = ports.scores(0.5 * (lo + hi))
    top = _top_indices(s, m_o)
    vertices = link.a * np.exp(1j * ports.betas(idx))
    resultants = link.d + np.take_along_axis(vertices, top, axis=1).sum(axis=1)
    return BreakpointPartition(
        breakpoints=br,
        quant_breakpoints=qb,
        switch_angles=switches,
        lower=lo,
        upper=hi,
        codeword_index=idx,
        gamma=np.sort(top, axis=1),
        resultants=resultants,
    )


def build_partition(link: CascadedLink, m_o: int, cb: CodebookSpec) -> BreakpointPartition:
    """Partition of the direction circle into fixed-structure regions for ``cb``."""
    m_o = _check_mo(m_o, link.num_ports)
    return _partition(_ports_for(link, cb), link, m_o)


def _best_on(candidates: np.ndarray, link: CascadedLink, ports, m_o: int) -> FrisConfiguration:
    values = _support_values(candidates, link, ports, m_o)
    # candidates are sorted, so argmax's first hit is the smallest maximizing angle
    return _configuration_at(float(candidates[int(np.argmax(values))]), link, ports, m_o)


def optimize_polygon(link: CascadedLink, m_o: int, m_p: int) -> FrisConfiguration:
    """Globally optimal ports and polygon codewords maximizing ``|d + sum h_m w_m|``."""
    m_o = _check_mo(m_o, link.num_ports)
    ports = _PolygonPorts(link, m_p)
    return _best_on(_partition(ports, link, m_o).candidates(), link, ports, m_o)


def optimize_general(
    link: CascadedLink,
    cb: CodebookSpec,
    m_o: int,
    strategy: str = "exact_partition",
    n_phi: int = 4096,
) -> FrisConfiguration:
    """FRIS configuration for arbitrary finite codebooks.

    ``exact_partition`` searches the finite critical-angle set and is globally optimal;
    ``uniform_grid`` scans ``n_phi`` equally spaced directions.
    """
    m_o = _check_mo(m_o, link.num_ports)
    ports = _ports_for(link, cb)
    if strategy == "exact_partition":
        cands = _partition(ports, link, m_o).candidates()
    elif strategy == "uniform_grid":
        if n_phi < 1:
            raise InvalidArgumentError("n_phi must be positive")
        cands = TWO_PI * np.arange(n_phi) / n_phi
    else:
        raise InvalidArgumentError(f"unknown strategy {strategy!r}")
    return _best_on(cands, link, ports, m_o)


def optimize(link: CascadedLink, m_o: int, cb: CodebookSpec) -> FrisConfiguration:
    """Dispatch to the closed-form polygon solver or the exact general one."""
    if isinstance(cb, RegularPolygonCodebook):
        return optimize_polygon(link, m_o, cb.m_p)
    return optimize_general(link, cb, m_o)
