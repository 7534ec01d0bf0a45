"""Benchmark FRIS rules and the exhaustive-search oracle."""
from __future__ import annotations

from itertools import combinations
from math import comb, prod

import numpy as np

from frisopt.codebook import PhaseCodebook, RegularPolygonCodebook
from frisopt.errors import InstanceTooLargeError, InvalidArgumentError
from frisopt.support_search import CascadedLink, CodebookSpec, FrisConfiguration, _check_mo

ORACLE_GUARD = 10**8


def per_port_codebooks(cb: CodebookSpec, num_ports: int) -> list[PhaseCodebook]:
    if isinstance(cb, RegularPolygonCodebook):
        return [cb.materialize()] * num_ports
    if isinstance(cb, PhaseCodebook):
        return [cb] * num_ports
    cbs = list(cb)
    if len(cbs) != num_ports:
        raise InvalidArgumentError("need exactly one codebook per port")
    return cbs


def _aligned_codewords(link: CascadedLink, gamma, cbs) -> list[complex]:
    # quantized phase alignment: project e^{j(arg d - arg h_m)} onto the codebook
    ref = np.angle(link.d) if link.d != 0 else 0.0
    out = []
    for m in gamma:
        target = np.exp(1j * (ref - np.angle(link.h[m])))
        proj = np.real(np.conj(target) * cbs[m].codewords)
        out.append(complex(cbs[m].codewords[int(np.argmax(proj))]))
    return out


def random_ports_baseline(link: CascadedLink, m_o: int, cb: CodebookSpec, rng: np.random.Generator,
                          gamma=None) -> FrisConfiguration:
    """Uniformly random port subset with quantized phase alignment.

    ``gamma`` pins a previously drawn subset (the AO loop redraws nothing per iteration).
    """
    m_o = _check_mo(m_o, link.num_ports)
    if gamma is None:
        gamma = draw_port_subset(link.num_ports, m_o, rng)
    cbs = per_port_codebooks(cb, link.num_ports)
    return FrisConfiguration.from_selection(link, gamma, _aligned_codewords(link, gamma, cbs))


def draw_port_subset(num_ports: int, m_o: int, rng: np.random.Generator) -> tuple:
    return tuple(sorted(int(m) for m in rng.choice(num_ports, size=m_o, replace=False)))


def top_h_baseline(link: CascadedLink, m_o: int, cb: CodebookSpec) -> FrisConfiguration:
    """The ``m_o`` strongest ports by ``|h_m|`` with quantized phase alignment."""
    m_o = _check_mo(m_o, link.num_ports)
    gamma = sorted(int(m) for m in np.argsort(-link.a, kind="stable")[:m_o])
    cbs = per_port_codebooks(cb, link.num_ports)
    return FrisConfiguration.from_selection(link, gamma, _aligned_codewords(link, gamma, cbs))


def oracle_work(num_ports: int, m_o: int, sizes) -> int:
    if len(set(sizes)) == 1:
        return comb(num_ports, m_o) * sizes[0] ** m_o
    return sum(prod(sizes[m] for m in g) for g in combinations(range(num_ports), m_o))


def _check_guard(num_ports, m_o, sizes, guard):
    work = oracle_work(num_ports, m_o, sizes)
    if work > guard:
        raise InstanceTooLargeError(f"exhaustive search needs {work} evaluations (> {guard})")


def exhaustive_oracle(link: CascadedLink, m_o: int, cb: CodebookSpec,
                      guard: int = ORACLE_GUARD) -> tuple[complex, FrisConfiguration]:
    """Brute force over every port subset and codeword tuple.

    Ties keep the lexicographically smallest (subset, codeword indices).
    """
    m_o = _check_mo(m_o, link.num_ports)
    cbs = per_port_codebooks(cb, link.num_ports)
    _check_guard(link.num_ports, m_o, [len(c) for c in cbs], guard)
    best_val, best = -1.0, None
    for gamma in combinations(range(link.num_ports), m_o):
        sums = np.array([link.d])
        for m in gamma:
            sums = (sums[:, None] + link.h[m] * cbs[m].codewords[None, :]).ravel()
        mag = np.abs(sums)
        i = int(np.argmax(mag))
        if mag[i] > best_val:
            best_val, best = mag[i], (gamma, i)
    gamma, flat = best
    idx = np.unravel_index(flat, [len(cbs[m]) for m in gamma])
    cfg = FrisConfiguration.from_selection(link, gamma, [cbs[m].codewords[k] for m, k in zip(gamma, idx)])
    return cfg.z, cfg


def joint_exhaustive_oracle(real, m_o: int, cb: CodebookSpec, power: float,
                            guard: int = ORACLE_GUARD) -> tuple[float, FrisConfiguration]:
    """End-to-end optimum: every FRIS configuration paired with its own MRT beamformer.

    Returns ``max sqrt(P) ||a(w)||`` and the maximizing configuration, expressed on the
    link induced by that configuration's MRT beamformer.
    """
    from frisopt.channel import cascaded_link, mrt_beamformer

    num_ports = real.num_ports
    m_o = _check_mo(m_o, num_ports)
    cbs = per_port_codebooks(cb, num_ports)
    _check_guard(num_ports, m_o, [len(c) for c in cbs], guard)
    # a(w) = h_d + sum_m conj(w_m) conj(G_m) h_r,m
    v = np.conj(real.g) * real.h_r[:, None]
    n = real.num_antennas
    best_val, best = -1.0, None
    for gamma in combinations(range(num_ports), m_o):
        acc = real.h_d[None, :]
        for m in gamma:
            acc = (acc[:, None, :] + np.conj(cbs[m].codewords)[None, :, None] * v[m]).reshape(-1, n)
        norms = np.linalg.norm(acc, axis=1)
        i = int(np.argmax(norms))
        if norms[i] > best_val:
            best_val, best = norms[i], (gamma, i)
    gamma, flat = best
    idx = np.unravel_index(flat, [len(cbs[m]) for m in gamma])
    w = np.zeros(num_ports, dtype=complex)
    w[list(gamma)] = [cbs[m].codewords[k] for m, k in zip(gamma, idx)]
    link = cascaded_link(real, mrt_beamformer(w, real, power))
    cfg = FrisConfiguration.from_selection(link, gamma, w[list(gamma)])
    return float(np.sqrt(power) * best_val), cfg


def gain_ratio(z: complex, z_opt: complex) -> float:
    """Achieved gain normalized by the optimum, ``|z| / |z_opt|``."""
    if abs(z_opt) == 0:
        raise InvalidArgumentError("z_opt must be nonzero")
    return abs(z) / abs(z_opt)
