"""Delay-coupled emitter pair: echo-series amplitudes, closed-form Laplace
images, and the retarded junction noise spectrum."""

import numpy as np
import pytest
import sympy as sp

from bandedge import (JunctionRates, LaplaceAmplitudes, NoiseResult,
                      ReservoirSpec, RetardedAmplitudes, TwoDotConfig,
                      noise_spectrum, retarded_amplitudes_laplace,
                      retarded_amplitudes_series, retarded_noise_spectrum)
from bandedge.errors import (DomainError, GridError, TransformError,
                             TruncationError)
from bandedge.numerics.laplace import TimeGrid

RATES = JunctionRates(Gamma_L=0.1, Gamma_R=0.5)


def two_pi_config():
    return TwoDotConfig(gamma_0=1.0, r=2.0 * np.pi, v=1.0, theta=np.pi)


def symmetric_grid(w_max, m):
    half = np.linspace(w_max / m, w_max, m)
    return np.concatenate([-half[::-1], [0.0], half])


def series_on(config, t_max, dt, m_max=None):
    count = int(round(t_max / dt)) + 1
    grid = TimeGrid(dt=dt, count=count)
    if m_max is None:
        m_max = int(np.ceil(t_max / config.tau_d)) + 1
    return retarded_amplitudes_series(config, grid, m_max=m_max)


def forward_images(amps, s_points):
    """Simpson quadrature of the sampled amplitudes against exp(-s t)."""
    grid = amps.grid
    t = grid.times
    weights = np.full(grid.count, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    weights *= grid.dt / 3.0
    out = []
    for s in s_points:
        kernel = weights * np.exp(-s * t)
        out.append((complex(kernel @ amps.b1), complex(kernel @ amps.b2)))
    return out


@pytest.fixture(scope="module")
def two_pi_noise():
    grid = symmetric_grid(4.0, 400)
    return grid, retarded_noise_spectrum(two_pi_config(), RATES, grid)


class TestTwoDotConfig:
    def test_delay_is_distance_over_velocity(self):
        cfg = TwoDotConfig(gamma_0=0.5, r=3.0, v=1.5, theta=0.0)
        assert cfg.tau_d == pytest.approx(2.0, rel=1e-15)

    @pytest.mark.parametrize("theta,flag", [(2.9, False), (3.0, True),
                                            (np.pi, True)])
    def test_regime_flag_threshold(self, theta, flag):
        cfg = TwoDotConfig(gamma_0=1.0, r=1.0, v=1.0, theta=theta)
        assert cfg.retarded_regime is flag

    @pytest.mark.parametrize("field,value", [("gamma_0", 0.0),
                                             ("gamma_0", -1.0),
                                             ("r", 0.0), ("v", -2.0),
                                             ("gamma_0", np.nan),
                                             ("theta", np.inf)])
    def test_invalid_parameters_rejected(self, field, value):
        params = {"gamma_0": 1.0, "r": 1.0, "v": 1.0, "theta": 0.0}
        params[field] = value
        with pytest.raises(DomainError):
            TwoDotConfig(**params)


class TestRetardedAmplitudes:
    def setup_method(self):
        self.grid = TimeGrid(dt=0.01, count=101)
        self.t = self.grid.times

    def test_length_mismatch_rejected(self):
        with pytest.raises(GridError):
            RetardedAmplitudes(grid=self.grid,
                               b1=np.exp(-self.t),
                               b2=np.zeros(100))

    def test_nonfinite_amplitudes_rejected(self):
        b1 = np.exp(-self.t).astype(complex)
        b1[50] = np.nan
        with pytest.raises(DomainError):
            RetardedAmplitudes(grid=self.grid, b1=b1, b2=np.zeros(101))

    def test_wrong_initial_values_rejected(self):
        decay = np.exp(-self.t).astype(complex)
        with pytest.raises(DomainError):
            RetardedAmplitudes(grid=self.grid, b1=0.5 * decay,
                               b2=np.zeros(101))
        with pytest.raises(DomainError):
            RetardedAmplitudes(grid=self.grid, b1=decay,
                               b2=np.full(101, 0.1 + 0j))

    def test_norm_overflow_rejected(self):
        # second amplitude switching on above the unitarity budget
        b2 = np.full(101, 0.9 + 0j)
        b2[0] = 0.0
        with pytest.raises(DomainError):
            RetardedAmplitudes(grid=self.grid,
                               b1=np.exp(-self.t).astype(complex), b2=b2)

    def test_survival_is_total_population(self):
        b1 = np.exp(-self.t) * np.exp(0.3j * self.t)
        b2 = np.zeros(101, dtype=complex)
        b2[1:] = 0.5 * (1.0 - np.exp(-self.t[1:]))
        amps = RetardedAmplitudes(grid=self.grid, b1=b1, b2=b2)
        expected = np.abs(b1) ** 2 + np.abs(b2) ** 2
        assert np.array_equal(amps.survival, expected)


class TestEchoSeries:
    def test_second_dot_silent_before_one_delay(self):
        cfg = two_pi_config()
        amps = series_on(cfg, t_max=30.0, dt=cfg.tau_d / 256)
        t = amps.grid.times
        assert np.all(amps.b2[t < cfg.tau_d] == 0.0)

    def test_first_dot_bare_before_two_delays(self):
        cfg = two_pi_config()
        amps = series_on(cfg, t_max=30.0, dt=cfg.tau_d / 256)
        t = amps.grid.times
        pre = t < 2.0 * cfg.tau_d
        assert np.max(np.abs(amps.b1[pre] - np.exp(-t[pre]))) == 0.0

    def test_initial_conditions_exact(self):
        amps = series_on(two_pi_config(), t_max=5.0, dt=0.01)
        assert amps.b1[0] == 1.0 + 0.0j
        assert amps.b2[0] == 0.0 + 0.0j

    @pytest.mark.parametrize("seed", range(6))
    def test_population_never_exceeds_unity(self, seed):
        rng = np.random.default_rng(seed)
        cfg = TwoDotConfig(gamma_0=1.0,
                           r=float(rng.uniform(0.5, 4.0) * np.pi),
                           v=1.0,
                           theta=float(rng.uniform(0.0, 2.0 * np.pi)))
        amps = series_on(cfg, t_max=40.0, dt=cfg.tau_d / 128)
        assert amps.survival.max() <= 1.0 + 1e-9

    def test_truncated_series_rejected(self):
        cfg = two_pi_config()
        with pytest.raises(TruncationError):
            series_on(cfg, t_max=60.0, dt=0.05, m_max=3)

    def test_extra_terms_beyond_horizon_change_nothing(self):
        cfg = two_pi_config()
        a = series_on(cfg, t_max=25.0, dt=0.05, m_max=6)
        b = series_on(cfg, t_max=25.0, dt=0.05, m_max=40)
        assert np.array_equal(a.b1, b.b1)
        assert np.array_equal(a.b2, b.b2)

    @pytest.mark.parametrize("m_max", [-1, 2.5])
    def test_invalid_truncation_order_rejected(self, m_max):
        grid = TimeGrid(dt=0.05, count=201)
        with pytest.raises(DomainError):
            retarded_amplitudes_series(two_pi_config(), grid, m_max=m_max)

    def test_matches_direct_power_series(self):
        # brute-force echo sum, small orders evaluated without windowing
        cfg = TwoDotConfig(gamma_0=1.0, r=2.0, v=1.0, theta=1.3)
        tau = cfg.tau_d
        dt = tau / 64
        amps = series_on(cfg, t_max=14.0, dt=dt)
        t = amps.grid.times
        even = np.zeros_like(t, dtype=complex)
        odd = np.zeros_like(t, dtype=complex)
        phase = 1j * np.exp(1j * cfg.theta)
        fact = 1.0
        for m in range(8):
            if m > 0:
                fact *= m
            shifted = t - m * tau
            live = shifted >= 0.0
            x = cfg.gamma_0 * shifted[live]
            term = np.zeros_like(t, dtype=complex)
            term[live] = phase ** m * x ** m * np.exp(-x) / fact
            if m % 2 == 0:
                even += term
            else:
                odd += term
        assert np.max(np.abs(amps.b1 - even)) < 1e-13
        assert np.max(np.abs(amps.b2 - odd)) < 1e-13


class TestLaplaceImages:
    @pytest.mark.parametrize("s", [0.0 + 1j, -0.1 + 0j, complex(np.nan, 0)])
    def test_left_half_plane_rejected(self, s):
        with pytest.raises(DomainError):
            retarded_amplitudes_laplace(two_pi_config(), s)

    def test_amplitudes_are_half_sum_and_difference(self):
        img = retarded_amplitudes_laplace(two_pi_config(), 0.4 + 1.1j)
        assert isinstance(img, LaplaceAmplitudes)
        assert img.b1 == (img.c_plus + img.c_minus) / 2.0
        assert img.b2 == (img.c_plus - img.c_minus) / 2.0

    def test_decoupled_limit_is_bare_pole(self):
        cfg = TwoDotConfig(gamma_0=2.0, r=1e9, v=1.0, theta=0.7)
        for s in (0.5 + 0j, 1.0 + 3.0j, 0.05 - 2.0j):
            img = retarded_amplitudes_laplace(cfg, s)
            bare = 1.0 / (s + cfg.gamma_0)
            assert img.c_plus == pytest.approx(bare, rel=1e-15)
            assert img.c_minus == pytest.approx(bare, rel=1e-15)

    @pytest.mark.parametrize("radius", [1e5, 1e7])
    def test_initial_value_limit(self, radius):
        # s * image -> initial value with O(1/s) residue
        cfg = two_pi_config()
        for phi in (0.2, 1.0):
            s = radius * np.exp(1j * phi)
            img = retarded_amplitudes_laplace(cfg, s)
            assert abs(s * img.b1 - 1.0) < 10.0 / radius
            assert abs(s * img.b2) < 10.0 / radius

    def test_geometric_echo_expansion(self):
        s, g, td, t = sp.symbols("s g t_d t", positive=True)
        th = sp.symbols("theta", real=True)
        w = sp.I * g * sp.exp(sp.I * th) * sp.exp(-s * td)
        closed = 1 / (s + g - w)
        images = sum((sp.I * sp.exp(sp.I * th)) ** m * g ** m
                     * sp.exp(-s * m * td) / (s + g) ** (m + 1)
                     for m in range(4))
        remainder = w ** 4 / ((s + g) ** 4 * (s + g - w))
        assert sp.simplify(closed - images - remainder) == 0
        for m in range(4):
            pole = sp.inverse_laplace_transform(1 / (s + g) ** (m + 1), s, t)
            want = t ** m * sp.exp(-g * t) / sp.factorial(m) * sp.Heaviside(t)
            assert sp.simplify(pole - want) == 0

    def test_forward_transform_matches_closed_form(self):
        cfg = two_pi_config()
        amps = series_on(cfg, t_max=600.0, dt=cfg.tau_d / 8192)
        points = [0.05 + 0j, 0.3 + 0j, 1.0 + 0j, 0.05 + 2.0j,
                  0.3 - 0.5j, 1.0 + 6.0j, 0.2 + 1.0j]
        worst = 0.0
        for s, (f1, f2) in zip(points, forward_images(amps, points)):
            img = retarded_amplitudes_laplace(cfg, s)
            worst = max(worst, abs(f1 - img.b1), abs(f2 - img.b2))
        assert worst < 1e-8


class TestRetardedNoise:
    def test_grid_must_be_increasing(self):
        with pytest.raises(GridError):
            retarded_noise_spectrum(two_pi_config(), RATES,
                                    np.array([0.0, 0.5, 0.5]))

    def test_grid_must_be_finite(self):
        with pytest.raises(GridError):
            retarded_noise_spectrum(two_pi_config(), RATES,
                                    np.array([0.0, np.inf]))

    def test_decoupled_pair_reduces_to_single_dot(self):
        cfg = TwoDotConfig(gamma_0=1.0, r=1e9, v=1.0, theta=0.7)
        grid = symmetric_grid(3.0, 150)
        res = retarded_noise_spectrum(cfg, RATES, grid)
        flat = ReservoirSpec(delta=-1.0, C=0.0, gamma=2.0 * cfg.gamma_0,
                             kind="minimum")
        ref = noise_spectrum(flat, RATES, grid)
        assert np.max(np.abs(res.fano - ref.fano)) < 1e-8

    def test_zero_frequency_matches_renewal_moments(self, two_pi_noise):
        # independent route: waiting-time moments of the emission stage
        grid, res = two_pi_noise
        cfg = two_pi_config()
        amps = series_on(cfg, t_max=3500.0, dt=cfg.tau_d / 512)
        t = amps.grid.times
        weights = np.full(t.size, 2.0)
        weights[1::2] = 4.0
        weights[0] = weights[-1] = 1.0
        weights *= amps.grid.dt / 3.0
        n = amps.survival
        mean_s = weights @ n
        mean_s2 = 2.0 * weights @ (t * n)
        gl, gr = RATES.Gamma_L, RATES.Gamma_R
        mean_tot = 1.0 / gl + 1.0 / gr + mean_s
        var_tot = 1.0 / gl ** 2 + 1.0 / gr ** 2 + mean_s2 - mean_s ** 2
        i_zero = np.flatnonzero(grid == 0.0)[0]
        assert res.fano[i_zero] == pytest.approx(var_tot / mean_tot ** 2,
                                                 rel=1e-4)

    def test_spectrum_symmetric_and_smooth(self, two_pi_noise):
        grid, res = two_pi_noise
        assert isinstance(res, NoiseResult)
        assert np.array_equal(res.fano, res.fano[::-1])
        assert res.jumps == ()

    def test_departs_from_markov_at_moderate_delay(self):
        cfg = TwoDotConfig(gamma_0=1.0, r=np.pi, v=1.0, theta=np.pi)
        grid = symmetric_grid(3.0, 300)
        res = retarded_noise_spectrum(cfg, RATES, grid)
        flat = ReservoirSpec(delta=-1.0, C=0.0, gamma=2.0 * cfg.gamma_0,
                             kind="minimum")
        ref = noise_spectrum(flat, RATES, grid)
        assert np.max(np.abs(res.fano - ref.fano)) > 0.01

    def test_ripple_spacing_tracks_inverse_delay(self, two_pi_noise):
        grid, res = two_pi_noise
        cfg = two_pi_config()
        pos = grid > 0.25
        w, f = grid[pos], res.fano[pos]
        interior = (f[1:-1] > f[:-2]) & (f[1:-1] > f[2:])
        peaks = w[1:-1][interior]
        assert peaks.size >= 3
        spacing = np.median(np.diff(peaks))
        assert spacing == pytest.approx(2.0 * np.pi / cfg.tau_d, rel=0.1)

    def test_slow_phase_reported_as_nonconvergent(self):
        cfg = TwoDotConfig(gamma_0=1.0, r=2.0 * np.pi, v=1.0, theta=2.0)
        with pytest.raises(TransformError):
            retarded_noise_spectrum(cfg, RATES, symmetric_grid(2.0, 100))
