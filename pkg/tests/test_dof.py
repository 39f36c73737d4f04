"""Exact bound arithmetic and antenna optimization."""

from fractions import Fraction

import numpy as np
import pytest

from fadingdof.dof import (
    chi_const,
    chi_const_max,
    chi_gen,
    chi_low,
    chi_low_star,
    chi_low_star_brute,
    chi_upper,
    dof_report,
    ell,
    figure1_curves,
    optimal_active_tx,
    residual_noise_variances,
    virtual_simo_K,
)
from fadingdof.model import (
    ColoringMatrix,
    Dims,
    InvalidConfigurationError,
    constant_model,
    standard_complex_gaussian,
)

F = Fraction


def test_chi_const_values():
    assert chi_const(2, 3, 4) == 1
    assert chi_const(1, 1, 1) == 0  # M = min{1, 1, 0} = 0


def test_chi_const_max_bounded_by_quarter_block():
    # enumerate N = 2..50: max <= N/4 with equality exactly at even N
    for N in range(2, 51):
        m = N // 2
        val = chi_const(m, m, N)
        assert val <= F(N, 4)
        assert (val == F(N, 4)) == (N % 2 == 0)
        assert chi_const_max(N) == val


def test_chi_gen_values():
    assert chi_gen(2, 4) == F(3, 2)
    assert chi_gen(5, 1) == 0
    assert chi_gen(3, 4) == F(9, 4)  # maximizing antenna count N-1 at Q=1


def test_chi_upper_values():
    assert chi_upper(2, 4) == F(3, 2)
    assert chi_upper(1, 2) == F(1, 2)


def test_chi_low_values():
    assert chi_low(2, 3, 4, 1) == F(3, 2)
    assert chi_low(1, 1, 1, 1) == 0
    # N = T_eff*Q: second argument collapses, bound becomes trivial
    assert chi_low(2, 3, 4, 2) <= 0


def test_chi_low_star_closed_form_cases():
    assert optimal_active_tx(9, 4, 1) == 3
    assert chi_low_star(3, 9, 4, 1) == F(9, 4)
    for N in range(2, 7):
        assert chi_low_star(3, 5, N, N) == 0  # N = Q >= 2: trivial bound


def test_chi_low_star_matches_brute_force_everywhere():
    for N in range(1, 11):
        for Q in range(1, 4):
            for T in range(1, 9):
                for R in range(1, 9):
                    assert chi_low_star(T, R, N, Q) == chi_low_star_brute(T, R, N, Q), (
                        T,
                        R,
                        N,
                        Q,
                    )


def test_ordering_and_monotonicity_invariants():
    for N in range(1, 13):
        for Q in range(1, 4):
            for T in range(1, 9):
                prev = None
                for R in range(1, 12):
                    star = chi_low_star(T, R, N, Q)
                    assert star <= chi_upper(T, N)
                    if prev is not None:
                        assert star >= prev  # nondecreasing in R
                    prev = star
            if N >= 2:
                for R in range(1, 12):
                    assert optimal_active_tx(R, N, Q) < F(N, Q)


def test_ell_values_and_regime_bound():
    assert ell(2, 3, 4, 1) == 0
    assert ell(1, 1, 2, 1) == 0
    for N in range(2, 13):
        for Q in range(1, N):
            for T_eff in range(1, N):
                if T_eff * Q >= N:
                    continue
                r_max = -(-T_eff * (N - 1) // (N - T_eff * Q))
                for R in range(T_eff, r_max + 1):
                    assert ell(T_eff, R, N, Q) < N - T_eff * Q


def test_figure1_unconstrained_values():
    rows = figure1_curves([1, 4, 1000])
    assert len(rows) == 2  # N = 1 skipped
    assert rows[0][1] == F(9, 4)
    assert rows[1][1] == F(998001, 250000)


def test_figure1_capped_ratios_converge_to_one():
    rows = figure1_curves([50, 200, 2000], antenna_cap=4)
    lowers = [float(r[2]) for r in rows]
    uppers = [float(r[3]) for r in rows]
    for lo, up in zip(lowers, uppers):
        assert lo <= up
    assert abs(lowers[-1] - 1.0) < 1e-2
    assert abs(uppers[-1] - 1.0) < 1e-2
    # the gap shrinks as N grows
    assert uppers[2] - lowers[2] < uppers[0] - lowers[0]


def test_virtual_simo_constant_model():
    dims = Dims.create(2, 2, 4, 1, T_eff=2)
    Z = constant_model(dims)
    K = virtual_simo_K(Z, dims)
    assert K == pytest.approx(2.0 * (1 + 1e-6), rel=1e-12)
    assert np.all(residual_noise_variances(Z, K) > 0)


def test_virtual_simo_single_entry_boundary():
    dims = Dims.create(1, 1, 3, 1)
    blocks = np.zeros((1, 1, 3, 1), dtype=complex)
    blocks[0, 0, 1, 0] = 1.0
    Z = ColoringMatrix(blocks)
    K = virtual_simo_K(Z, dims)
    assert K == pytest.approx(1.0 + 1e-6, rel=1e-12)
    resid = residual_noise_variances(Z, K)[0]
    assert 0 < resid[1] < 1e-5
    assert resid[0] == pytest.approx(1.0) and resid[2] == pytest.approx(1.0)


def test_virtual_simo_rejects_zero_coloring():
    dims = Dims.create(1, 1, 3, 1)
    Z = ColoringMatrix(np.zeros((1, 1, 3, 1), dtype=complex))
    with pytest.raises(InvalidConfigurationError):
        virtual_simo_K(Z, dims)


def test_virtual_simo_snr_bound_monte_carlo():
    # sampled SNR of one split channel stays below T*K*rho
    dims = Dims.create(2, 2, 4, 1, T_eff=2)
    Z = constant_model(dims)
    K, rho, n = virtual_simo_K(Z, dims), 10.0, 200_000
    rng = np.random.default_rng(99)
    s = standard_complex_gaussian(rng, n)
    x = standard_complex_gaussian(rng, (n, dims.N))
    w = standard_complex_gaussian(rng, (n, dims.N))
    signal = np.mean(K * rho * np.abs(s) ** 2 * np.sum(np.abs(x) ** 2, axis=1))
    noise = np.mean(np.sum(np.abs(w) ** 2, axis=1))
    assert signal / noise <= dims.T_eff * K * rho * 1.03


def test_report_is_exact_and_consistent():
    rep = dof_report(Dims.create(2, 3, 4, 1))
    for val in (rep.chi_const, rep.chi_gen_upper, rep.chi_low_star, rep.T_opt, rep.eta):
        assert isinstance(val, Fraction)
    assert rep.chi_low_star <= rep.chi_gen_upper
    assert (rep.chi_const, rep.chi_gen_upper, rep.chi_low_star) == (1, F(3, 2), F(3, 2))
    assert (rep.ell, rep.theta_R, rep.M) == (0, 2, 2)
