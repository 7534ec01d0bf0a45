from itertools import combinations

import numpy as np
import pytest

from conftest import enumerate_best, random_link
from frisopt.baselines import (
    draw_port_subset,
    exhaustive_oracle,
    gain_ratio,
    joint_exhaustive_oracle,
    oracle_work,
    per_port_codebooks,
    random_ports_baseline,
    top_h_baseline,
)
from frisopt.channel import SystemGeometry, SystemParams, correlation_matrix, draw_channels, mrt, port_positions
from frisopt.codebook import PhaseCodebook, RegularPolygonCodebook
from frisopt.errors import InstanceTooLargeError, InvalidArgumentError
from frisopt.rng import stream
from frisopt.support_search import CascadedLink, optimize_polygon

# chi-square 0.999 quantile with 9 degrees of freedom
CHI2_9_999 = 27.877


def test_top_h_picks_strongest_and_aligns():
    link = CascadedLink(d=1j, h=np.array([0.1, 2.0 * np.exp(0.3j), 1.0, 0.5]))
    cfg = top_h_baseline(link, 2, RegularPolygonCodebook(4))
    assert cfg.gamma == (1, 2)
    # target phase pi/2 - 0.3 for port 1 -> codeword 1j; pi/2 for port 2 -> 1j
    assert cfg.w[1] == pytest.approx(1j) and cfg.w[2] == pytest.approx(1j)


def test_top_h_ties_to_lower_index():
    link = CascadedLink(d=1, h=np.ones(4))
    assert top_h_baseline(link, 2, RegularPolygonCodebook(2)).gamma == (0, 1)


def test_random_subset_is_uniform():
    counts = {g: 0 for g in combinations(range(5), 2)}
    trials = 20_000
    for t in range(trials):
        counts[draw_port_subset(5, 2, stream(0, t, "baseline"))] += 1
    expected = trials / len(counts)
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < CHI2_9_999


def test_random_baseline_respects_pinned_subset(rng):
    link = random_link(rng, 6)
    cfg = random_ports_baseline(link, 3, RegularPolygonCodebook(8), None, gamma=(4, 1, 2))
    assert cfg.gamma == (1, 2, 4)
    drawn = random_ports_baseline(link, 3, RegularPolygonCodebook(8), np.random.default_rng(1))
    assert len(drawn.gamma) == 3


def test_oracle_matches_recursive_enumeration(rng):
    for _ in range(40):
        num = int(rng.integers(2, 7))
        link = random_link(rng, num)
        m_o = int(rng.integers(1, num + 1))
        books = [PhaseCodebook.from_angles(rng.uniform(0, 6.28, int(rng.integers(1, 5)))) for _ in range(num)]
        z, cfg = exhaustive_oracle(link, m_o, books)
        assert abs(z) == pytest.approx(enumerate_best(link, m_o, [b.codewords for b in books]), rel=1e-12)
        assert cfg.z == z and len(cfg.gamma) == m_o


def test_oracle_tie_keeps_lexicographic_first():
    link = CascadedLink(d=0, h=np.ones(3))
    _, cfg = exhaustive_oracle(link, 1, RegularPolygonCodebook(2))
    assert cfg.gamma == (0,) and cfg.w[0] == 1


def test_oracle_guard():
    link = CascadedLink(d=0, h=np.ones(20))
    with pytest.raises(InstanceTooLargeError):
        exhaustive_oracle(link, 10, RegularPolygonCodebook(8))
    assert oracle_work(5, 2, [8] * 5) == 10 * 64
    assert oracle_work(3, 2, [1, 2, 3]) == 2 + 3 + 6


def test_joint_oracle_is_mrt_of_best_configuration(rng):
    geom = SystemGeometry(m_x=2)
    params = SystemParams(n=3, m_o=2)
    corr = correlation_matrix(port_positions(geom), geom.wavelength)
    real = draw_channels(geom, params, corr, stream(5, 0, "channel"))
    cb = RegularPolygonCodebook(4)
    val, cfg = joint_exhaustive_oracle(real, 2, cb, power=2.0)
    best = 0.0
    for gamma in combinations(range(4), 2):
        for ks in np.ndindex(4, 4):
            w = np.zeros(4, dtype=complex)
            w[list(gamma)] = np.exp(0.5j * np.pi * np.array(ks))
            a = real.h_d + real.g.conj().T @ (np.conj(w) * real.h_r)
            best = max(best, np.sqrt(2.0) * np.linalg.norm(a))
    assert val == pytest.approx(best, rel=1e-12)
    assert cfg.abs_z == pytest.approx(val, rel=1e-9)
    # no fixed-beamformer configuration beats the joint optimum
    f = mrt(rng.normal(size=3) + 1j * rng.normal(size=3), 2.0)
    from frisopt.channel import cascaded_link
    assert optimize_polygon(cascaded_link(real, f), 2, 4).abs_z <= val + 1e-15


def test_gain_ratio():
    assert gain_ratio(1 + 1j, 2j) == pytest.approx(np.sqrt(2) / 2)
    with pytest.raises(InvalidArgumentError):
        gain_ratio(1, 0)


def test_per_port_codebooks_length_checked():
    cb = PhaseCodebook.from_angles([0.0])
    with pytest.raises(InvalidArgumentError):
        per_port_codebooks([cb, cb], 3)
