"""FRIS geometry, spatially correlated fading, cascaded coefficients and MRT."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from frisopt.errors import DegenerateChannelError, InvalidArgumentError
from frisopt.rng import complex_normal
from frisopt.support_search import CascadedLink

SPEED_OF_LIGHT = 299_792_458.0
REFERENCE_DISTANCE = 1.0


@dataclass(frozen=True)
class SystemGeometry:
    """Node positions (meters) and FRIS aperture.

    The FRIS is an ``m_x`` by ``m_y`` port grid in the x-z plane around ``fris_center``
    with spacing ``w_x * wavelength / m_x`` on both axes; ``m_y`` defaults to ``m_x``.
    """

    bs_pos: tuple = (0.0, 0.0, 5.0)
    fris_center: tuple = (10.0, 10.0, 5.0)
    user_pos: tuple = (50.0, 0.0, 0.0)
    m_x: int = 8
    w_x: float = 2.0
    carrier_hz: float = 3.5e9
    m_y: int | None = None

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def rows(self) -> int:
        return self.m_x if self.m_y is None else self.m_y

    @property
    def num_ports(self) -> int:
        return self.m_x * self.rows

    @property
    def spacing(self) -> float:
        return self.w_x * self.wavelength / self.m_x


@dataclass(frozen=True)
class SystemParams:
    n: int = 16
    m_o: int = 8
    p: float = 1.0
    sigma2: float = 1.0
    k_factor_db: float = 3.0
    pathloss_exp: float = 2.5
    epsilon: float = 1e-6
    max_iters: int = 50

    def __post_init__(self):
        if self.p <= 0 or self.sigma2 <= 0:
            raise InvalidArgumentError("power and noise variance must be positive")
        if self.n < 1 or self.m_o < 1:
            raise InvalidArgumentError("n and m_o must be positive")

    @classmethod
    def from_snr_db(cls, snr_db: float, **kw) -> "SystemParams":
        return cls(p=10.0 ** (snr_db / 10.0), sigma2=1.0, **kw)

    @property
    def snr(self) -> float:
        return self.p / self.sigma2


@dataclass(frozen=True)
class SpatialCorrelation:
    r: np.ndarray
    r_sqrt: np.ndarray


@dataclass(frozen=True)
class ChannelRealization:
    g: np.ndarray  # (M, N) BS -> FRIS
    h_r: np.ndarray  # (M,) FRIS -> user
    h_d: np.ndarray  # (N,) BS -> user
    path_gains: dict = field(default_factory=dict)

    @property
    def num_ports(self) -> int:
        return self.h_r.size

    @property
    def num_antennas(self) -> int:
        return self.h_d.size

    def to_json(self) -> str:
        def pairs(x):
            return np.stack([x.real, x.imag], axis=-1).tolist()

        return json.dumps({
            "g": pairs(self.g),
            "h_r": pairs(self.h_r),
            "h_d": pairs(self.h_d),
            "path_gains": self.path_gains,
        })

    @classmethod
    def from_json(cls, text: str) -> "ChannelRealization":
        raw = json.loads(text)

        def unpair(x):
            arr = np.asarray(x, dtype=float)
            return arr[..., 0] + 1j * arr[..., 1]

        return cls(unpair(raw["g"]), unpair(raw["h_r"]), unpair(raw["h_d"]), raw.get("path_gains", {}))


def port_positions(geom: SystemGeometry) -> np.ndarray:
    """(M, 3) port coordinates, x varying fastest."""
    if geom.m_x < 1 or geom.rows < 1:
        raise InvalidArgumentError("grid dimensions must be >= 1")
    ix = (np.arange(geom.m_x) - (geom.m_x - 1) / 2.0) * geom.spacing
    iz = (np.arange(geom.rows) - (geom.rows - 1) / 2.0) * geom.spacing
    xx, zz = np.meshgrid(ix, iz)
    offsets = np.stack([xx.ravel(), np.zeros(xx.size), zz.ravel()], axis=1)
    return np.asarray(geom.fris_center, dtype=float) + offsets


def correlation_matrix(positions: np.ndarray, wavelength: float) -> SpatialCorrelation:
    """Isotropic-scattering correlation ``j0(2 pi |p_m - p_i| / lambda)`` and its PSD square root."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    dist = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=-1)
    # np.sinc(x) = sin(pi x) / (pi x), so j0(2 pi d / lambda) = sinc(2 d / lambda)
    r = np.sinc(2.0 * dist / wavelength)
    vals, vecs = np.linalg.eigh(r)
    vals = np.clip(vals, 0.0, None)
    r_sqrt = (vecs * np.sqrt(vals)) @ vecs.T
    r_sqrt = 0.5 * (r_sqrt + r_sqrt.T)
    return SpatialCorrelation(r=r, r_sqrt=r_sqrt)


def clipped(corr: SpatialCorrelation) -> np.ndarray:
    vals, vecs = np.linalg.eigh(corr.r)
    return (vecs * np.clip(vals, 0.0, None)) @ vecs.T


def path_gain(dist_m: float, wavelength: float, exponent: float) -> float:
    """Log-distance power gain anchored at the free-space gain at 1 m."""
    if dist_m < REFERENCE_DISTANCE:
        raise InvalidArgumentError(f"distance {dist_m} m is inside the {REFERENCE_DISTANCE} m reference")
    ref = (wavelength / (4.0 * np.pi * REFERENCE_DISTANCE)) ** 2
    return float(ref * (dist_m / REFERENCE_DISTANCE) ** (-exponent))


def _steering(offsets: np.ndarray, direction: np.ndarray, wavelength: float) -> np.ndarray:
    return np.exp(1j * 2.0 * np.pi / wavelength * offsets @ direction)


def los_component(geom: SystemGeometry, n: int) -> np.ndarray:
    """Unit-modulus plane-wave BS-FRIS outer product.

    The BS is a half-wavelength ULA along x centered at ``bs_pos``.
    """
    lam = geom.wavelength
    bs = np.asarray(geom.bs_pos, dtype=float)
    center = np.asarray(geom.fris_center, dtype=float)
    u = (bs - center) / np.linalg.norm(bs - center)
    a_fris = _steering(port_positions(geom) - center, u, lam)
    bs_offsets = np.zeros((n, 3))
    bs_offsets[:, 0] = (np.arange(n) - (n - 1) / 2.0) * lam / 2.0
    a_bs = _steering(bs_offsets, -u, lam)
    return np.outer(a_fris, np.conj(a_bs))


def link_path_gains(geom: SystemGeometry, exponent: float) -> dict:
    bs, ris, ue = (np.asarray(p, dtype=float) for p in (geom.bs_pos, geom.fris_center, geom.user_pos))
    lam = geom.wavelength
    return {
        "bs_fris": path_gain(float(np.linalg.norm(ris - bs)), lam, exponent),
        "fris_user": path_gain(float(np.linalg.norm(ue - ris)), lam, exponent),
        "bs_user": path_gain(float(np.linalg.norm(ue - bs)), lam, exponent),
    }


def draw_channels(geom: SystemGeometry, params: SystemParams, corr: SpatialCorrelation,
                  rng: np.random.Generator, los: np.ndarray | None = None) -> ChannelRealization:
    """One correlated channel realization: Rician BS-FRIS, Rayleigh FRIS-user and direct link."""
    m, n = geom.num_ports, params.n
    if corr.r_sqrt.shape != (m, m):
        raise InvalidArgumentError("correlation does not match the geometry")
    if los is None:
        los = los_component(geom, n)
    kappa = 10.0 ** (params.k_factor_db / 10.0)
    gains = link_path_gains(geom, params.pathloss_exp)
    # draw order is part of the reproducibility contract
    h_d = complex_normal(rng, n)
    g_nlos = complex_normal(rng, (m, n))
    h_r = complex_normal(rng, m)
    g_tilde = np.sqrt(kappa / (kappa + 1.0)) * los + np.sqrt(1.0 / (kappa + 1.0)) * g_nlos
    return ChannelRealization(
        g=np.sqrt(gains["bs_fris"]) * (corr.r_sqrt @ g_tilde),
        h_r=np.sqrt(gains["fris_user"]) * (corr.r_sqrt @ h_r),
        h_d=np.sqrt(gains["bs_user"]) * h_d,
        path_gains=gains,
    )


def cascaded_link(real: ChannelRealization, f_b: np.ndarray) -> CascadedLink:
    """Scalar direct term ``h_d^H f`` and per-port cascaded coefficients ``conj(h_r,m) G_m f``."""
    f_b = np.asarray(f_b, dtype=complex)
    if f_b.shape != (real.num_antennas,) or real.g.shape != (real.num_ports, real.num_antennas):
        raise InvalidArgumentError("beamformer and channel dimensions disagree")
    return CascadedLink(d=np.vdot(real.h_d, f_b), h=np.conj(real.h_r) * (real.g @ f_b))


def effective_channel(w: np.ndarray, real: ChannelRealization) -> np.ndarray:
    """Vector ``a`` with ``a^H f = d + sum_m w_m h_m`` for any beamformer ``f``."""
    w = np.asarray(w, dtype=complex)
    return real.h_d + real.g.conj().T @ (np.conj(w) * real.h_r)


def mrt(a: np.ndarray, p: float) -> np.ndarray:
    """``sqrt(p) a / ||a||``; raises when the channel vanishes."""
    norm = np.linalg.norm(a)
    if norm < 1e-15:
        raise DegenerateChannelError("effective channel norm is zero")
    return np.sqrt(p) * np.asarray(a, dtype=complex) / norm


def mrt_beamformer(w: np.ndarray, real: ChannelRealization, p: float) -> np.ndarray:
    return mrt(effective_channel(w, real), p)


def fallback_beamformer(n: int, p: float) -> np.ndarray:
    f = np.zeros(n, dtype=complex)
    f[0] = np.sqrt(p)
    return f
