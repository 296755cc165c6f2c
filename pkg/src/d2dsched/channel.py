"""Network geometry, dual-slope pathloss link budget and channel realizations.

Gains follow the receiver-row / transmitter-column convention:
``gains[i, j]`` is the power gain from Tx_j to Rx_i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

SPEED_OF_LIGHT = 299792458.0
FADING_MODELS = ("none", "rayleigh_unit_mean")
MAX_PLACEMENT_REDRAWS = 10_000


@dataclass(frozen=True)
class NetworkConfig:
    """RF, geometry and randomness parameters of one experiment."""

    num_pairs: int = 100
    area_side_m: float = 1000.0
    link_dist_min_m: float = 2.0
    link_dist_max_m: float = 65.0
    tx_power_dbm: float = 20.0
    noise_psd_dbm_hz: float = -184.0
    noise_figure_db: float = 7.0
    antenna_gain_db: float = -2.5
    carrier_freq_hz: float = 2.4e9
    bandwidth_hz: float = 5e6
    antenna_height_m: float = 1.5
    fading_model: str = "rayleigh_unit_mean"
    rng_seed: int = 1

    def __post_init__(self):
        if int(self.num_pairs) != self.num_pairs or self.num_pairs < 1:
            raise ValueError(f"num_pairs must be a positive integer, got {self.num_pairs!r}")
        if not 0 < self.link_dist_min_m < self.link_dist_max_m <= self.area_side_m:
            raise ValueError(
                "need 0 < link_dist_min_m < link_dist_max_m <= area_side_m, got "
                f"{self.link_dist_min_m}, {self.link_dist_max_m}, {self.area_side_m}"
            )
        for name in ("tx_power_dbm", "noise_psd_dbm_hz", "noise_figure_db", "antenna_gain_db"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if not self.carrier_freq_hz > 0:
            raise ValueError("carrier_freq_hz must be positive")
        if not self.antenna_height_m > 0:
            raise ValueError("antenna_height_m must be positive")
        if self.fading_model not in FADING_MODELS:
            raise ValueError(f"fading_model must be one of {FADING_MODELS}, got {self.fading_model!r}")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def breakpoint_distance_m(self) -> float:
        h = self.antenna_height_m
        return 4.0 * h * h / self.wavelength_m

    @property
    def breakpoint_loss_db(self) -> float:
        h = self.antenna_height_m
        lam = self.wavelength_m
        return abs(20.0 * math.log10(lam**2 / (8.0 * math.pi * h * h)))

    @property
    def tx_power_w(self) -> float:
        return 10.0 ** ((self.tx_power_dbm - 30.0) / 10.0)


def config_field_types() -> dict[str, type]:
    return {f.name: f.type for f in fields(NetworkConfig)}


def pathloss_db(distance_m, cfg: NetworkConfig):
    """Dual-slope pathloss in dB: 20 dB/decade up to the breakpoint, 40 beyond.

    Accepts a scalar or an array of distances.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("distance must be strictly positive")
    r_bp = cfg.breakpoint_distance_m
    ratio = np.log10(d / r_bp)
    loss = cfg.breakpoint_loss_db + 6.0 + np.where(d <= r_bp, 20.0 * ratio, 40.0 * ratio)
    return float(loss) if loss.ndim == 0 else loss


def link_budget_gain_linear(distance_m, cfg: NetworkConfig):
    """Linear power gain of a link, antenna gain counted at both ends."""
    gain_db = 2.0 * cfg.antenna_gain_db - np.asarray(pathloss_db(distance_m, cfg))
    out = 10.0 ** (gain_db / 10.0)
    return float(out) if np.ndim(out) == 0 else out


def noise_power_w(cfg: NetworkConfig) -> float:
    dbm = cfg.noise_psd_dbm_hz + 10.0 * math.log10(cfg.bandwidth_hz) + cfg.noise_figure_db
    return 10.0 ** ((dbm - 30.0) / 10.0)


def drop_rng(seed: int, num_pairs: int, drop_index: int) -> np.random.Generator:
    """Independent random substream for one Monte Carlo drop.

    The stream depends only on (seed, K, drop index), so results do not
    depend on how drops are distributed over workers.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(num_pairs), int(drop_index)))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class Topology:
    tx: np.ndarray  # (K, 2) positions in meters
    rx: np.ndarray  # (K, 2)

    @property
    def num_pairs(self) -> int:
        return self.tx.shape[0]

    def distances(self) -> np.ndarray:
        """``d[i, j]`` = distance from Tx_j to Rx_i."""
        diff = self.rx[:, None, :] - self.tx[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    def link_distances(self) -> np.ndarray:
        return np.hypot(*(self.rx - self.tx).T)


def drop_topology(cfg: NetworkConfig, rng: np.random.Generator) -> Topology:
    """Drop K pairs: Tx uniform in the square, Rx at U[dmin, dmax] and uniform angle.

    A receiver falling outside the square gets a new angle; its link distance
    is kept, so link distances stay exactly uniform.
    """
    k, side = cfg.num_pairs, cfg.area_side_m
    tx = rng.uniform(0.0, side, size=(k, 2))
    dist = rng.uniform(cfg.link_dist_min_m, cfg.link_dist_max_m, size=k)
    rx = np.empty_like(tx)
    pending = np.arange(k)
    for _ in range(MAX_PLACEMENT_REDRAWS):
        angle = rng.uniform(0.0, 2.0 * math.pi, size=pending.size)
        cand = tx[pending] + dist[pending, None] * np.column_stack((np.cos(angle), np.sin(angle)))
        inside = np.all((cand >= 0.0) & (cand <= side), axis=1)
        rx[pending[inside]] = cand[inside]
        pending = pending[~inside]
        if pending.size == 0:
            return Topology(tx=tx, rx=rx)
    raise RuntimeError(
        f"could not place {pending.size} receiver(s) inside the area after "
        f"{MAX_PLACEMENT_REDRAWS} redraws"
    )


@dataclass(frozen=True)
class ChannelRealization:
    """One drop: K x K power gains plus the all-active SINR prediction."""

    gains: np.ndarray
    noise_power_w: float
    tx_power_w: float
    sinr_all_active: np.ndarray = field(init=False)
    snr: np.ndarray = field(init=False)

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if g.ndim < 2 or g.shape[-1] != g.shape[-2]:
            raise ValueError(f"gains must be (..., K, K), got shape {g.shape}")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("gains must be finite and nonnegative")
        if not (self.noise_power_w > 0 and self.tx_power_w > 0):
            raise ValueError("noise and transmit power must be positive")
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)
        direct = self.direct
        interference = cross_gains(g).sum(axis=-1)
        sinr = direct / (interference + self.noise_over_power)
        snr = direct * self.tx_power_w / self.noise_power_w
        sinr.setflags(write=False)
        snr.setflags(write=False)
        object.__setattr__(self, "sinr_all_active", sinr)
        object.__setattr__(self, "snr", snr)

    @property
    def num_pairs(self) -> int:
        return self.gains.shape[-1]

    @property
    def direct(self) -> np.ndarray:
        return np.diagonal(self.gains, axis1=-2, axis2=-1).copy()

    @property
    def noise_over_power(self) -> float:
        return self.noise_power_w / self.tx_power_w


def cross_gains(gains: np.ndarray) -> np.ndarray:
    """Copy of ``gains`` with the direct links zeroed.

    Summing this avoids the cancellation of ``row sum - direct`` when a direct
    gain is many orders above its interferers.
    """
    k = gains.shape[-1]
    return np.where(np.eye(k, dtype=bool), 0.0, gains)


def realize_channel(topology: Topology, cfg: NetworkConfig, rng: np.random.Generator) -> ChannelRealization:
    gains = link_budget_gain_linear(topology.distances(), cfg)
    if cfg.fading_model == "rayleigh_unit_mean":
        gains = gains * rng.exponential(1.0, size=gains.shape)
    return ChannelRealization(gains=gains, noise_power_w=noise_power_w(cfg), tx_power_w=cfg.tx_power_w)


def realize_iid_rayleigh(k: int, power_w: float, rng: np.random.Generator, size=None) -> ChannelRealization:
    """I.i.d. unit-mean exponential gains with unit noise.

    ``size`` adds leading batch dimensions, e.g. ``size=10**6`` draws a
    million K x K drops at once.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not power_w > 0:
        raise ValueError("power_w must be positive")
    batch = () if size is None else tuple(np.atleast_1d(size))
    gains = rng.exponential(1.0, size=batch + (k, k))
    return ChannelRealization(gains=gains, noise_power_w=1.0, tx_power_w=float(power_w))


def geometric_drop(cfg: NetworkConfig, drop_index: int, seed: int | None = None):
    """Topology, realization and the stream positioned after both, for one drop."""
    rng = drop_rng(cfg.rng_seed if seed is None else seed, cfg.num_pairs, drop_index)
    topo = drop_topology(cfg, rng)
    return topo, realize_channel(topo, cfg, rng), rng
