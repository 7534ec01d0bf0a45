import numpy as np
import pytest

from frisopt.ao import achievable_rate, ao_solve, initial_configuration, trace_rows, write_trace_csv
from frisopt.baselines import top_h_baseline
from frisopt.channel import (
    ChannelRealization,
    SystemGeometry,
    SystemParams,
    correlation_matrix,
    draw_channels,
    port_positions,
)
from frisopt.codebook import RegularPolygonCodebook
from frisopt.errors import DegenerateChannelError, InvalidArgumentError
from frisopt.rng import stream


def _real(m_x=4, n=8, seed=0, trial=0, snr_db=20.0):
    geom = SystemGeometry(m_x=m_x)
    params = SystemParams.from_snr_db(snr_db, n=n, m_o=4)
    corr = correlation_matrix(port_positions(geom), geom.wavelength)
    return draw_channels(geom, params, corr, stream(seed, trial, "channel")), params


def test_rate_example():
    assert achievable_rate(1.0, 1.0) == pytest.approx(1.0)
    assert achievable_rate(np.sqrt(3), 1.0) == pytest.approx(2.0)
    with pytest.raises(InvalidArgumentError):
        achievable_rate(1.0, 0.0)


def test_initial_configuration_feasible():
    w = initial_configuration(16, 5, RegularPolygonCodebook(8), stream(0, 0, "init"))
    assert np.count_nonzero(w) == 5
    assert np.allclose(np.abs(w[w != 0]), 1.0)


def test_ao_monotone_and_converges():
    cb = RegularPolygonCodebook(8)
    for trial in range(10):
        real, params = _real(trial=trial)
        res = ao_solve(real, params, cb, stream(0, trial, "init"))
        z = res.trace.abs_z
        assert np.all(np.diff(z) >= -1e-9)
        assert res.trace.converged
        assert res.trace.iterations <= params.max_iters
        assert res.abs_z == pytest.approx(z[-1])


def test_ao_iteration_cap():
    real, params = _real()
    capped = SystemParams(n=params.n, m_o=4, p=params.p, epsilon=0.0, max_iters=1)
    res = ao_solve(real, capped, RegularPolygonCodebook(8), stream(0, 0, "init"))
    assert res.trace.iterations == 1 and not res.trace.converged


def test_ao_observer_and_custom_update():
    real, params = _real()
    cb = RegularPolygonCodebook(8)
    seen = []
    res = ao_solve(real, params, cb, stream(0, 0, "init"),
                   fris_update=lambda link: top_h_baseline(link, 4, cb),
                   observer=lambda t, link, cfg: seen.append((t, cfg.abs_z)))
    assert [t for t, _ in seen] == list(range(1, res.trace.iterations + 1))


def test_ao_needs_start():
    real, params = _real()
    with pytest.raises(InvalidArgumentError):
        ao_solve(real, params, RegularPolygonCodebook(8))


def test_ao_all_zero_channel():
    real = ChannelRealization(g=np.zeros((4, 2), complex), h_r=np.zeros(4, complex), h_d=np.zeros(2, complex))
    params = SystemParams(n=2, m_o=2)
    with pytest.raises(DegenerateChannelError):
        ao_solve(real, params, RegularPolygonCodebook(4), w0=np.array([1, 1, 0, 0], complex))


def test_ao_zero_start_channel_falls_back():
    # a(w0) vanishes but the FRIS path is usable: the fallback beamformer keeps AO alive
    g = np.zeros((2, 2), complex)
    g[0, 0] = 1.0
    real = ChannelRealization(g=g, h_r=np.array([1.0, 0], complex), h_d=np.zeros(2, complex))
    res = ao_solve(real, SystemParams(n=2, m_o=1), RegularPolygonCodebook(4), w0=np.array([0, 1], complex))
    assert res.abs_z == pytest.approx(1.0)


def test_trace_csv_format():
    real, params = _real()
    res = ao_solve(real, params, RegularPolygonCodebook(8), stream(0, 0, "init"))
    text = write_trace_csv(trace_rows(0, res.trace))
    lines = text.strip().split("\n")
    assert lines[0] == "trial,iter,abs_z,rate"
    assert len(lines) == res.trace.iterations + 1
    assert float(lines[1].split(",")[2]) == res.trace.records[0].abs_z
