"""Alternating optimization between the MRT beamformer and the FRIS configuration."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from frisopt.baselines import per_port_codebooks
from frisopt.channel import (
    ChannelRealization,
    SystemParams,
    cascaded_link,
    effective_channel,
    fallback_beamformer,
    mrt,
)
from frisopt.errors import DegenerateChannelError, InvalidArgumentError
from frisopt.support_search import CascadedLink, CodebookSpec, FrisConfiguration, _check_mo, optimize

FrisUpdate = Callable[[CascadedLink], FrisConfiguration]
Observer = Callable[[int, CascadedLink, FrisConfiguration], None]


def achievable_rate(z: complex, sigma2: float) -> float:
    """``log2(1 + |z|^2 / sigma2)`` in bits per channel use."""
    if not sigma2 > 0:
        raise InvalidArgumentError("sigma2 must be positive")
    return float(np.log1p(abs(z) ** 2 / sigma2) / np.log(2.0))


@dataclass(frozen=True)
class AoIteration:
    iteration: int
    abs_z: float
    rate: float
    gamma: tuple
    beam_gain: float  # ||a|| of the effective channel the beamformer was matched to


@dataclass
class AoTrace:
    records: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def abs_z(self) -> np.ndarray:
        return np.array([r.abs_z for r in self.records])


@dataclass(frozen=True)
class AoResult:
    f_b: np.ndarray
    config: FrisConfiguration
    trace: AoTrace
    link: CascadedLink

    @property
    def abs_z(self) -> float:
        return self.config.abs_z


def initial_configuration(num_ports: int, m_o: int, cb: CodebookSpec, rng: np.random.Generator) -> np.ndarray:
    """Random feasible start: ``m_o`` uniformly chosen ports, each with a uniform codeword."""
    m_o = _check_mo(m_o, num_ports)
    cbs = per_port_codebooks(cb, num_ports)
    w = np.zeros(num_ports, dtype=complex)
    ports = rng.choice(num_ports, size=m_o, replace=False)
    for m in ports:
        w[m] = cbs[m].codewords[rng.integers(len(cbs[m]))]
    return w


def ao_solve(
    real: ChannelRealization,
    params: SystemParams,
    cb: CodebookSpec,
    rng: Optional[np.random.Generator] = None,
    *,
    w0: Optional[np.ndarray] = None,
    fris_update: Optional[FrisUpdate] = None,
    observer: Optional[Observer] = None,
) -> AoResult:
    """Run the beamformer / FRIS alternation until ``|z|`` moves by at most ``epsilon``.

    ``fris_update`` replaces the optimal FRIS step (benchmarks plug in their own rule);
    ``observer`` sees every (iteration, link, configuration) triple.
    """
    m_o = _check_mo(params.m_o, real.num_ports)
    if w0 is None:
        if rng is None:
            raise InvalidArgumentError("need an rng or an explicit initial configuration")
        w0 = initial_configuration(real.num_ports, m_o, cb, rng)
    if fris_update is None:
        def fris_update(link):
            return optimize(link, m_o, cb)

    w, prev = np.asarray(w0, dtype=complex), 0.0
    trace = AoTrace()
    f_b = link = cfg = None
    for t in range(1, params.max_iters + 1):
        a = effective_channel(w, real)
        try:
            f_b = mrt(a, params.p)
        except DegenerateChannelError:
            f_b = fallback_beamformer(real.num_antennas, params.p)
        link = cascaded_link(real, f_b)
        if link.d == 0 and not np.any(link.h):
            raise DegenerateChannelError("every link coefficient vanishes")
        cfg = fris_update(link)
        if observer is not None:
            observer(t, link, cfg)
        trace.records.append(AoIteration(t, cfg.abs_z, achievable_rate(cfg.z, params.sigma2),
                                         cfg.gamma, float(np.linalg.norm(a))))
        w = cfg.w
        if abs(cfg.abs_z - prev) <= params.epsilon:
            trace.converged = True
            break
        prev = cfg.abs_z
    return AoResult(f_b=f_b, config=cfg, trace=trace, link=link)


def trace_rows(trial: int, trace: AoTrace) -> list:
    return [(trial, r.iteration, r.abs_z, r.rate) for r in trace.records]


def write_trace_csv(rows: Iterable, fh: Optional[io.TextIOBase] = None) -> str:
    """CSV ``trial,iter,abs_z,rate``; returns the text and also writes it to ``fh`` if given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "iter", "abs_z", "rate"])
    for trial, it, abs_z, rate in rows:
        writer.writerow([trial, it, f"{abs_z:.17g}", f"{rate:.17g}"])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
