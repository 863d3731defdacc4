"""Synthetic channel sounding, channel merging and empirical estimators.

Three scenario presets stand in for measured chambers: a single line of
sight ray with weak diffuse power (``anechoic``), several comparable
reflections without line of sight (``reverberation``) and a line of sight
ray with a few weaker reflections (``indoor``).  Every preset produces
``11 x 11`` receive positions on a 4 cm grid times ``3 x 3`` transmitter
orientations, each a frequency response on the default 651-point grid.

Rays are modeled as (image) point sources.  For an array element at ``p``
a ray contributes ``a g_az g_pol exp(-j 2 pi f |p - q| / c + j theta)``,
where ``q`` is the source position, ``g_az`` and ``g_pol`` are cosine-power
gains of the pointing and polarization mismatch, and ``a`` scales with the
inverse path length.  White complex Gaussian noise models the diffuse part.
All preset values are synthetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .fading import AmplitudePdf

__all__ = [
    "SPEED_OF_LIGHT",
    "URA_SIZE",
    "URA_SPACING",
    "TAGS",
    "FrequencyGrid",
    "ChannelSelector",
    "ChannelMeta",
    "ChannelResponse",
    "ChannelSet",
    "RaySpec",
    "ScenarioPreset",
    "PRESETS",
    "MergedConfig",
    "CircularDensity",
    "CirProfile",
    "ChannelError",
    "element_position",
    "cosine_power_gain",
    "channel_from_rays",
    "synth_scenario",
    "merge",
    "merge_config",
    "sample_configs",
    "pair_distance",
    "kde_pdf",
    "empirical_pdf",
    "phase_diff_pdf",
    "cir",
    "cir_peaks",
]

SPEED_OF_LIGHT = 299_792_458.0
URA_SIZE = 11
URA_SPACING = 0.04
TAGS = (-1, 0, 1)

# amplitude gain of 0.1 (-20 dB in power) at 30 degrees off boresight
_GAIN_EXPONENT = math.log(0.1) / math.log(math.cos(math.radians(30.0)))


class ChannelError(ValueError):
    """Invalid channel operation (grid mismatch, pairing constraint, ...)."""


# ---------------------------------------------------------------------------
# Containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency grid of the sounder (Hz)."""

    f_start: float = 24.25e9
    f_step: float = 5e6
    n_points: int = 651

    def __post_init__(self):
        if not (self.f_step > 0 and self.n_points >= 1 and self.f_start >= 0):
            raise ValueError("frequency grid needs f_start >= 0, f_step > 0 and n_points >= 1")

    @property
    def f_stop(self) -> float:
        return self.f_start + (self.n_points - 1) * self.f_step

    def frequencies(self) -> np.ndarray:
        return self.f_start + self.f_step * np.arange(self.n_points)


class ChannelSelector(NamedTuple):
    """Receive position and transmitter orientation tags of one channel."""

    row: int
    col: int
    azimuth: int
    roll: int

    @property
    def rx(self) -> tuple[int, int]:
        return (self.row, self.col)

    @property
    def tx(self) -> tuple[int, int]:
        return (self.azimuth, self.roll)


@dataclass(frozen=True)
class ChannelMeta:
    """Scenario label, array index and orientation tags of a channel.

    Merged channels keep the common receive position or orientation of
    their parents (``None`` where the parents differ) and list the
    parents in ``parents``.
    """

    scenario: str
    rx: tuple[int, int] | None
    tx: tuple[int, int] | None
    parents: tuple["ChannelMeta", ...] = ()

    def __post_init__(self):
        if self.rx is not None:
            row, col = self.rx
            if not (0 <= row < URA_SIZE and 0 <= col < URA_SIZE):
                raise ValueError(f"rx index {self.rx} outside the {URA_SIZE}x{URA_SIZE} array")
        if self.tx is not None:
            if self.tx[0] not in TAGS or self.tx[1] not in TAGS:
                raise ValueError(f"orientation tags {self.tx} must be in {TAGS}")

    @classmethod
    def of(cls, scenario: str, sel: ChannelSelector) -> "ChannelMeta":
        return cls(scenario, sel.rx, sel.tx)


@dataclass
class ChannelResponse:
    """Complex frequency response in volts on a frequency grid."""

    grid: FrequencyGrid
    h: np.ndarray
    meta: ChannelMeta

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=complex)
        if self.h.shape != (self.grid.n_points,):
            raise ValueError(f"h has shape {self.h.shape}, grid expects ({self.grid.n_points},)")


@dataclass
class ChannelSet:
    """All channels of one synthesized (or loaded) scenario.

    Channels are stored in the order azimuth tag, roll tag, row, column.
    """

    scenario: str
    grid: FrequencyGrid
    channels: list[ChannelResponse]

    def __len__(self) -> int:
        return len(self.channels)

    def __iter__(self):
        return iter(self.channels)

    @staticmethod
    def index(sel: ChannelSelector) -> int:
        a, b = sel.azimuth + 1, sel.roll + 1
        return ((a * 3 + b) * URA_SIZE + sel.row) * URA_SIZE + sel.col

    def get(self, sel: ChannelSelector) -> ChannelResponse:
        ch = self.channels[self.index(sel)]
        if ch.meta.rx != sel.rx or ch.meta.tx != sel.tx:
            raise ChannelError("channel set is not in canonical order")
        return ch

    def matrix(self) -> np.ndarray:
        """Responses stacked as an array of shape ``(len, n_points)``."""
        return np.stack([c.h for c in self.channels])


def all_selectors() -> list[ChannelSelector]:
    """Every selector in the canonical channel-set order."""
    return [ChannelSelector(row, col, az, roll)
            for az in TAGS for roll in TAGS
            for row in range(URA_SIZE) for col in range(URA_SIZE)]


@dataclass(frozen=True)
class RaySpec:
    """One specular contribution as seen by one array element."""

    amplitude: float
    delay: float
    phase0: float = 0.0
    direction: tuple[float, float, float] = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if self.amplitude < 0 or self.delay < 0:
            raise ValueError("ray amplitude and delay must be non-negative")
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or abs(float(np.linalg.norm(d)) - 1.0) > 1e-9:
            raise ValueError("ray direction must be a unit 3-vector")


@dataclass(frozen=True)
class MergedConfig:
    """A pair of channels to be summed, identified by a letter label."""

    id: str
    pair_kind: str
    first: ChannelSelector
    second: ChannelSelector

    def __post_init__(self):
        if self.pair_kind == "shared-tx":
            if self.first.tx != self.second.tx or self.first.rx == self.second.rx:
                raise ChannelError(f"{self.id}: shared-tx pair needs equal tags and distinct positions")
        elif self.pair_kind == "shared-rx":
            if self.first.rx != self.second.rx or self.first.tx == self.second.tx:
                raise ChannelError(f"{self.id}: shared-rx pair needs equal positions and distinct tags")
        else:
            raise ChannelError(f"unknown pair kind {self.pair_kind!r}")

    @property
    def orientation_change(self) -> str:
        """``pointing``, ``polarization`` or ``both`` for shared-rx pairs."""
        if self.pair_kind != "shared-rx":
            return "none"
        az = self.first.azimuth != self.second.azimuth
        roll = self.first.roll != self.second.roll
        return "both" if az and roll else ("pointing" if az else "polarization")


# ---------------------------------------------------------------------------
# Geometry and synthesis
# ---------------------------------------------------------------------------

def element_position(row, col) -> np.ndarray:
    """Position (m) of a URA element; the array lies in the XZ plane."""
    row = np.asarray(row, dtype=float)
    col = np.asarray(col, dtype=float)
    mid = 0.5 * (URA_SIZE - 1)
    return np.stack([(col - mid) * URA_SPACING, np.zeros_like(row), (mid - row) * URA_SPACING], axis=-1)


def cosine_power_gain(angle):
    """Amplitude gain ``cos(angle)**q`` with ``q`` giving -20 dB at 30 degrees."""
    c = np.cos(np.asarray(angle, dtype=float))
    return np.where(c > 0, np.abs(c) ** _GAIN_EXPONENT, 0.0)


@dataclass(frozen=True)
class ScenarioPreset:
    """Synthetic chamber description.

    Parameters
    ----------
    name : str
    distance : float
        Length (m) of the shortest specular path.
    azimuth_deg, roll_deg : tuple of float
        Transmitter angles for tags ``-1, 0, 1``.
    los : bool
        Whether the shortest path is a direct ray.
    n_reflections : tuple of int
        Inclusive range of the number of reflected rays.
    reflection_db : tuple of float
        Range of reflected-ray power relative to the strongest ray.
    extra_path : tuple of float
        Range of excess path length (m) of reflections.
    diffuse_db : tuple of float
        Range of diffuse power below the specular power of each channel.
    total_power : float
        Mean power (V^2) over all channels.
    """

    name: str
    distance: float
    azimuth_deg: tuple[float, float, float]
    roll_deg: tuple[float, float, float] = (-30.0, 0.0, 30.0)
    los: bool = True
    n_reflections: tuple[int, int] = (0, 0)
    reflection_db: tuple[float, float] = (0.0, 0.0)
    extra_path: tuple[float, float] = (0.5, 6.0)
    departure_spread_deg: float = 20.0
    polarization_spread_deg: float = 20.0
    diffuse_db: tuple[float, float] = (30.0, 30.0)
    total_power: float = 1e-4


PRESETS: dict[str, ScenarioPreset] = {
    "anechoic": ScenarioPreset(
        name="anechoic", distance=1.60, azimuth_deg=(-30.0, 0.0, 30.0), los=True,
        n_reflections=(0, 0), diffuse_db=(30.0, 30.0), total_power=4e-4),
    "reverberation": ScenarioPreset(
        name="reverberation", distance=6.00, azimuth_deg=(-30.0, 0.0, 30.0), los=False,
        n_reflections=(4, 7), reflection_db=(-3.0, 0.0), extra_path=(0.3, 6.0),
        departure_spread_deg=25.0, diffuse_db=(10.0, 15.0), total_power=5e-5),
    "indoor": ScenarioPreset(
        name="indoor", distance=3.50, azimuth_deg=(-30.0, -15.0, 0.0), los=True,
        n_reflections=(2, 5), reflection_db=(-10.0, -3.0), extra_path=(0.4, 5.0),
        departure_spread_deg=30.0, diffuse_db=(18.0, 22.0), total_power=1e-4),
}


@dataclass
class _RaySource:
    position: np.ndarray     # image source position (m)
    weight: float            # amplitude scale before path loss
    phase0: float
    departure: float         # departure azimuth offset (rad)
    polarization: float      # polarization tilt (rad)


def _draw_sources(preset: ScenarioPreset, rng: np.random.Generator) -> list[_RaySource]:
    sources = []
    d = preset.distance
    spread = math.radians(preset.departure_spread_deg)
    pol = math.radians(preset.polarization_spread_deg)
    if preset.los:
        sources.append(_RaySource(np.array([0.0, d, 0.0]), 1.0, float(rng.uniform(-np.pi, np.pi)), 0.0, 0.0))
    else:
        # the wall bounce straight ahead is the reference path
        sources.append(_RaySource(np.array([0.0, d, 0.0]), 1.0, float(rng.uniform(-np.pi, np.pi)),
                                  0.0, float(rng.uniform(-0.25, 0.25) * pol)))
    lo, hi = preset.n_reflections
    n_ref = int(rng.integers(lo, hi + 1)) if hi > 0 else 0
    if not preset.los:
        n_ref = max(0, n_ref - 1)
    for _ in range(n_ref):
        path = d + float(rng.uniform(*preset.extra_path))
        theta = float(rng.uniform(-1.0, 1.0)) * math.radians(35.0)
        elev = float(rng.uniform(-1.0, 1.0)) * math.radians(15.0)
        pos = path * np.array([math.sin(theta) * math.cos(elev), math.cos(theta) * math.cos(elev), math.sin(elev)])
        rel_db = float(rng.uniform(*preset.reflection_db))
        # undo the extra spreading loss so the drawn level is the received level
        weight = 10.0 ** (rel_db / 20.0) * path / d
        sources.append(_RaySource(pos, weight, float(rng.uniform(-np.pi, np.pi)),
                                  float(rng.uniform(-1.0, 1.0) * spread),
                                  float(rng.uniform(-1.0, 1.0) * pol)))
    return sources


def _channel_rays(sources, preset: ScenarioPreset, sel: ChannelSelector, scale: float) -> list[RaySpec]:
    p = element_position(sel.row, sel.col)
    az = math.radians(preset.azimuth_deg[sel.azimuth + 1])
    roll = math.radians(preset.roll_deg[sel.roll + 1])
    rays = []
    for src in sources:
        vec = src.position - p
        dist = float(np.linalg.norm(vec))
        direction = vec / dist
        # horizontal departure angle of the ray towards this element
        depart = math.atan2(-direction[0], direction[1]) + src.departure
        g = float(cosine_power_gain(depart - az) * cosine_power_gain(roll - src.polarization))
        amp = scale * src.weight * g * preset.distance / dist
        rays.append(RaySpec(amp, dist / SPEED_OF_LIGHT, src.phase0, tuple(direction)))
    return rays


def channel_from_rays(rays: Sequence[RaySpec], grid: FrequencyGrid = FrequencyGrid(),
                      diffuse_power: float = 0.0, rng=None,
                      meta: ChannelMeta | None = None) -> ChannelResponse:
    """Frequency response of a set of rays plus white complex Gaussian noise.

    Parameters
    ----------
    rays : sequence of RaySpec
    grid : FrequencyGrid
    diffuse_power : float
        Mean power ``E|D(f)|^2`` of the diffuse term (V^2).
    rng : numpy.random.Generator, optional
        Required when ``diffuse_power > 0``.
    """
    f = grid.frequencies()
    h = np.zeros(grid.n_points, dtype=complex)
    for ray in rays:
        h += ray.amplitude * np.exp(1j * (ray.phase0 - 2.0 * np.pi * f * ray.delay))
    if diffuse_power > 0:
        if rng is None:
            raise ValueError("a generator is needed for the diffuse term")
        sd = math.sqrt(0.5 * diffuse_power)
        h += sd * (rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points))
    if meta is None:
        meta = ChannelMeta("synthetic", None, None)
    return ChannelResponse(grid, h, meta)


def _seed_sequence(kind: str, seed) -> np.random.SeedSequence:
    key = sum((i + 1) * ord(ch) for i, ch in enumerate(kind))
    return np.random.SeedSequence([int(seed), key])


def synth_scenario(kind: str, seed: int, grid: FrequencyGrid = FrequencyGrid(),
                   preset: ScenarioPreset | None = None) -> ChannelSet:
    """Synthesize the 1089 channels of a scenario.

    The ray geometry is drawn once per scenario; every receive position
    then gets its own child generator for the diffuse term and its level,
    so positions could be synthesized independently in any order.  The
    ray amplitudes are scaled so that the mean specular power over all
    channels, plus the mean diffuse power, equals ``preset.total_power``.

    Parameters
    ----------
    kind : {"anechoic", "reverberation", "indoor"}
    seed : int
    grid : FrequencyGrid
    preset : ScenarioPreset, optional
        Overrides the built-in preset of ``kind``.
    """
    if preset is None:
        if kind not in PRESETS:
            raise ValueError(f"unknown scenario {kind!r}; expected one of {sorted(PRESETS)}")
        preset = PRESETS[kind]
    ss = _seed_sequence(kind, seed)
    geo_seed, *pos_seeds = ss.spawn(1 + URA_SIZE * URA_SIZE)
    sources = _draw_sources(preset, np.random.default_rng(geo_seed))
    selectors = all_selectors()
    rays = [_channel_rays(sources, preset, sel, 1.0) for sel in selectors]
    # specular power of each channel, cross terms average out over frequency
    spec = np.array([sum(r.amplitude ** 2 for r in rs) for rs in rays])
    pos_rngs = [np.random.default_rng(s) for s in pos_seeds]
    ratios = np.empty(len(selectors))
    for i, sel in enumerate(selectors):
        rng = pos_rngs[sel.row * URA_SIZE + sel.col]
        lo, hi = preset.diffuse_db
        ratios[i] = 10.0 ** (-rng.uniform(lo, hi) / 10.0) if hi > lo else 10.0 ** (-lo / 10.0)
    scale2 = preset.total_power / float(np.mean(spec * (1.0 + ratios)))
    scale = math.sqrt(scale2)
    channels = []
    for i, sel in enumerate(selectors):
        rng = pos_rngs[sel.row * URA_SIZE + sel.col]
        scaled = [RaySpec(r.amplitude * scale, r.delay, r.phase0, r.direction) for r in rays[i]]
        channels.append(channel_from_rays(scaled, grid, spec[i] * scale2 * ratios[i], rng,
                                          ChannelMeta.of(kind, sel)))
    return ChannelSet(kind, grid, channels)


# ---------------------------------------------------------------------------
# Merging and configuration sampling
# ---------------------------------------------------------------------------

def merge(h1: ChannelResponse, h2: ChannelResponse) -> ChannelResponse:
    """Equally weighted sum of two channels.

    The pair must share either the transmitter orientation or the receive
    position.  Channels with unknown position and orientation (``None``)
    are accepted as generic synthetic inputs.
    """
    if h1.grid != h2.grid:
        raise ChannelError("channels live on different frequency grids")
    m1, m2 = h1.meta, h2.meta
    generic = (m1.rx is None and m1.tx is None) or (m2.rx is None and m2.tx is None)
    shared_tx = m1.tx is not None and m1.tx == m2.tx
    shared_rx = m1.rx is not None and m1.rx == m2.rx
    if not (generic or shared_tx or shared_rx):
        raise ChannelError("merged channels must share the transmitter orientation or the receive position")
    scenario = m1.scenario if m1.scenario == m2.scenario else f"{m1.scenario}+{m2.scenario}"
    meta = ChannelMeta(scenario, m1.rx if shared_rx else None, m1.tx if shared_tx else None, (m1, m2))
    return ChannelResponse(h1.grid, h1.h + h2.h, meta)


def merge_config(channels: ChannelSet, config: MergedConfig) -> ChannelResponse:
    """Merged channel of a configuration drawn from a channel set."""
    return merge(channels.get(config.first), channels.get(config.second))


def _label(i: int) -> str:
    out = ""
    i += 1
    while i > 0:
        i, rem = divmod(i - 1, 26)
        out = chr(ord("A") + rem) + out
    return out


def pair_distance(a: ChannelSelector, b: ChannelSelector) -> float:
    """Distance (m) between the array positions of two selectors."""
    return URA_SPACING * math.hypot(a.row - b.row, a.col - b.col)


def _all_position_pairs():
    cells = [(r, c) for r in range(URA_SIZE) for c in range(URA_SIZE)]
    pairs = [(a, b) for i, a in enumerate(cells) for b in cells[i + 1:]]
    dist = np.array([math.hypot(a[0] - b[0], a[1] - b[1]) for a, b in pairs]) * URA_SPACING
    return pairs, dist


def sample_configs(count: int = 142, seed: int = 0, n_shared_rx: int | None = None) -> list[MergedConfig]:
    """Randomly chosen channel pairs for merging.

    Shared-Tx pairs are drawn by stratified sampling over the sorted list
    of all position pairs, one pair per equal-count stratum, so their
    distance distribution tracks that of all pairs to within one stratum
    (KS distance about ``1 / n``).  Each gets a random orientation.
    Shared-Rx pairs get a random position and two distinct orientations;
    the first three cycle through the pointing, polarization and combined
    changes so all three kinds are present.

    Parameters
    ----------
    count : int
        Total number of configurations (default 142).
    seed : int
    n_shared_rx : int, optional
        Size of the shared-Rx subset; by default ``round(11 * count / 142)``.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if n_shared_rx is None:
        n_shared_rx = int(round(11 * count / 142))
    n_shared_rx = min(max(0, n_shared_rx), count)
    n_shared_tx = count - n_shared_rx
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 142]))
    pairs, dist = _all_position_pairs()
    order = np.argsort(dist, kind="stable")
    configs: list[tuple[str, ChannelSelector, ChannelSelector]] = []
    if n_shared_tx:
        edges = np.linspace(0, len(pairs), n_shared_tx + 1).astype(int)
        for lo, hi in zip(edges[:-1], edges[1:]):
            a, b = pairs[int(order[rng.integers(lo, max(hi, lo + 1))])]
            if rng.random() < 0.5:
                a, b = b, a
            az, roll = (int(t) for t in rng.choice(TAGS, 2))
            configs.append(("shared-tx", ChannelSelector(*a, az, roll), ChannelSelector(*b, az, roll)))
    kinds = ["pointing", "polarization", "both"]
    seen = set()
    i = 0
    while i < n_shared_rx:
        kind = kinds[i] if i < 3 else kinds[int(rng.integers(3))]
        row, col = (int(v) for v in rng.integers(0, URA_SIZE, 2))
        az1, roll1 = (int(t) for t in rng.choice(TAGS, 2))
        az2 = int(rng.choice([t for t in TAGS if t != az1])) if kind != "polarization" else az1
        roll2 = int(rng.choice([t for t in TAGS if t != roll1])) if kind != "pointing" else roll1
        key = (row, col, frozenset([(az1, roll1), (az2, roll2)]))
        if key in seen:
            continue
        seen.add(key)
        configs.append(("shared-rx", ChannelSelector(row, col, az1, roll1), ChannelSelector(row, col, az2, roll2)))
        i += 1
    perm = rng.permutation(len(configs))
    return [MergedConfig(_label(k), *configs[j]) for k, j in enumerate(perm)]


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def kde_pdf(samples, n_points: int = 100, upper: float | None = None,
            power: float | None = None) -> AmplitudePdf:
    """Gaussian kernel density estimate of non-negative amplitudes.

    The bandwidth follows Silverman's rule ``0.9 min(sd, IQR / 1.34) n^(-1/5)``
    and the kernel is reflected at zero so no mass leaks to negative
    amplitudes.  The grid is uniform on ``[0, upper]`` with ``upper``
    defaulting to ``1.05 max(samples)``.  The returned pdf carries the
    sample mean power ``mean(samples**2)`` unless ``power`` is given.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 30:
        raise ValueError("at least 30 samples are needed for a density estimate")
    if n_points < 10:
        raise ValueError("n_points must be at least 10")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("amplitude samples must be finite and non-negative")
    sd = float(np.std(x, ddof=1))
    iqr = float(np.subtract(*np.percentile(x, [75, 25])))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    top = float(np.max(x))
    hi = 1.05 * top if upper is None else float(upper)
    if not hi > 0:
        raise ValueError("the density grid needs a positive upper end")
    grid = np.linspace(0.0, hi, n_points)
    # a degenerate (constant) sample gets a kernel one grid step wide
    bw = 0.9 * spread * x.size ** (-0.2) if spread > 1e-12 * top else grid[1]
    dens = np.zeros(n_points)
    norm = 1.0 / (x.size * bw * math.sqrt(2.0 * math.pi))
    step = max(1, 2_000_000 // n_points)
    for a in range(0, x.size, step):
        xs = x[a:a + step]
        u = (grid[:, None] - xs[None, :]) / bw
        v = (grid[:, None] + xs[None, :]) / bw
        dens += np.exp(-0.5 * u * u).sum(axis=1) + np.exp(-0.5 * v * v).sum(axis=1)
    dens *= norm
    return AmplitudePdf(grid, dens, float(np.mean(x * x)) if power is None else power)


def empirical_pdf(h: ChannelResponse, n_points: int = 100) -> AmplitudePdf:
    """Amplitude density of a channel, pooling its frequency points.

    Each frequency point is one realization of the amplitude ``|H(f)|``.
    """
    return kde_pdf(np.abs(h.h), n_points)


@dataclass(frozen=True)
class CircularDensity:
    """Histogram density on ``[-pi, pi]``."""

    edges: np.ndarray
    density: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def integral(self) -> float:
        return float(np.sum(self.density * self.widths))


def _wrap(x):
    return np.angle(np.exp(1j * np.asarray(x, dtype=float)))


def phase_diff_pdf(h1: ChannelResponse, h2: ChannelResponse, n_bins: int = 36) -> CircularDensity:
    """Density of the wrapped phase difference ``arg h2 - arg h1``."""
    if h1.grid != h2.grid:
        raise ChannelError("channels live on different frequency grids")
    if n_bins < 2:
        raise ValueError("n_bins must be at least 2")
    diff = np.angle(h2.h * np.conj(h1.h))
    edges = np.linspace(-np.pi, np.pi, n_bins + 1)
    counts, _ = np.histogram(diff, edges)
    density = counts / (diff.size * np.diff(edges))
    return CircularDensity(edges, density)


@dataclass(frozen=True)
class CirProfile:
    """Delay-domain magnitude of a channel."""

    delay: np.ndarray
    magnitude: np.ndarray

    @property
    def resolution(self) -> float:
        return float(self.delay[1] - self.delay[0]) if self.delay.size > 1 else 0.0


def cir(h: ChannelResponse, window: str | None = "hann") -> CirProfile:
    """Magnitude of the inverse DFT of the (optionally windowed) response.

    The delay axis runs over ``[0, 1 / f_step)`` in steps of
    ``1 / (n_points f_step)``.  Without a window, Parseval's identity
    ``sum |cir|^2 = sum |h|^2 / n_points`` holds.
    """
    n = h.grid.n_points
    if window in (None, "none"):
        w = np.ones(n)
    elif window == "hann":
        w = np.hanning(n)
    else:
        raise ValueError(f"unknown window {window!r}")
    mag = np.abs(np.fft.ifft(h.h * w))
    delay = np.arange(n) / (n * h.grid.f_step)
    return CirProfile(delay, mag)


def cir_peaks(profile: CirProfile, count: int, min_separation: int = 2) -> np.ndarray:
    """Bins of the ``count`` largest local maxima, sorted by delay."""
    mag = profile.magnitude
    left = np.roll(mag, 1)
    right = np.roll(mag, -1)
    cand = np.flatnonzero((mag >= left) & (mag >= right))
    cand = cand[np.argsort(mag[cand])[::-1]]
    chosen: list[int] = []
    n = mag.size
    for c in cand:
        if all(min(abs(c - k), n - abs(c - k)) > min_separation for k in chosen):
            chosen.append(int(c))
        if len(chosen) == count:
            break
    return np.array(sorted(chosen), dtype=int)
