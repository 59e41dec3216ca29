# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hedgelab import stream
from hedgelab.market import (MarketParams, MarketState, MarketError, bsm_price, greeks,
                             implied_vol, implied_vol_from_price, quote_option, step_market,
                             simulate_paths)

MATURITIES = [1, 30, 60, 90]
MONEYNESS = np.linspace(0.8, 1.2, 9)

def close(value, reference, rtol=1e-4, atol=1e-8):
  return abs(value - reference) <= rtol * abs(reference) + atol

@pytest.mark.parametrize('days', MATURITIES)
def test_greeks_match_finite_differences(days):
  T = days / 252.0
  K = 10.0
  r, q, sigma = 0.01, 0.02, 0.3
  for m in MONEYNESS:
    S = m * K
    h = 1e-4 * S
    delta, gamma, vega = greeks(S, K, T, r, q, sigma)
    up = bsm_price(S + h, K, T, r, q, sigma)
    mid = bsm_price(S, K, T, r, q, sigma)
    down = bsm_price(S - h, K, T, r, q, sigma)
    assert close(delta, (up - down) / (2 * h))
    assert close(gamma, (up - 2 * mid + down) / (h * h))
    s = 1e-5
    bump = (bsm_price(S, K, T, r, q, sigma + s) - bsm_price(S, K, T, r, q, sigma - s)) / (2 * s)
    assert close(vega, bump)

def test_put_call_parity():
  rng = stream(7)
  n = 10000
  S = rng.uniform(5, 15, n)
  K = rng.uniform(5, 15, n)
  T = rng.uniform(0, 1, n)
  r = 0.03
  q = 0.01
  sigma = rng.uniform(0.05, 0.8, n)
  call = bsm_price(S, K, T, r, q, sigma, True)
  put = bsm_price(S, K, T, r, q, sigma, False)
  np.testing.assert_allclose(call - put, S * np.exp(-q * T) - K * np.exp(-r * T), rtol=0, atol=1e-10)

@given(st.floats(5, 15), st.floats(5, 15), st.floats(1e-3, 1), st.floats(0.05, 0.8))
def test_put_greeks_follow_parity(S, K, T, sigma):
  call_delta, call_gamma, call_vega = greeks(S, K, T, 0.0, 0.02, sigma, True)
  put_delta, put_gamma, put_vega = greeks(S, K, T, 0.0, 0.02, sigma, False)
  assert put_delta == pytest.approx(call_delta - math.exp(-0.02 * T), abs=1e-12)
  assert put_gamma == call_gamma
  assert put_vega == call_vega

def test_expiry_values():
  assert bsm_price(12.0, 10.0, 0.0, 0.0, 0.0, 0.3) == 2.0
  assert bsm_price(8.0, 10.0, 0.0, 0.0, 0.0, 0.3) == 0.0
  assert greeks(12.0, 10.0, 0.0, 0.0, 0.0, 0.3) == (1.0, 0.0, 0.0)
  assert greeks(8.0, 10.0, 0.0, 0.0, 0.0, 0.3) == (0.0, 0.0, 0.0)
  assert greeks(10.0, 10.0, 0.0, 0.0, 0.0, 0.3)[0] == 0.5

def test_invalid_quotes():
  with pytest.raises(MarketError):
    bsm_price(-1.0, 10.0, 0.1, 0.0, 0.0, 0.3)
  with pytest.raises(MarketError):
    bsm_price(10.0, 10.0, -0.1, 0.0, 0.0, 0.3)
  with pytest.raises(MarketError):
    bsm_price(10.0, 10.0, 0.1, 0.0, 0.0, float('nan'))

def test_implied_vol_constant_when_no_vol_of_vol():
  for K in (8.0, 10.0, 12.0):
    assert implied_vol(10.0, K, 0.5, 0.3, 0.0, -0.7) == pytest.approx(0.3, abs=1e-15)

def test_implied_vol_at_the_money():
  T = 30 / 252.0
  expected = 0.3 * (1 + (-0.7 * 0.3 * 0.3 / 4 + (2 - 3 * 0.49) * 0.09 / 24) * T)
  assert implied_vol(10.0, 10.0, T, 0.3, 0.3, -0.7) == pytest.approx(expected, rel=1e-12)
  # Just off the money the expansion is continuous.
  assert implied_vol(10.0, 10.0 * (1 + 1e-7), T, 0.3, 0.3, -0.7) == pytest.approx(expected, rel=1e-6)

def test_implied_vol_skew_follows_correlation():
  T = 0.25
  low = implied_vol(10.0, 9.0, T, 0.3, 0.5, -0.7)
  high = implied_vol(10.0, 11.0, T, 0.3, 0.5, -0.7)
  assert low > high

def test_implied_vol_rejects_bad_inputs():
  with pytest.raises(MarketError):
    implied_vol(-10.0, 10.0, 0.1, 0.3, 0.3, -0.7)
  with pytest.raises(MarketError):
    implied_vol(10.0, 10.0, 0.1, 0.0, 0.3, -0.7)

def test_implied_vol_from_price_inverts_bsm():
  price = bsm_price(10.0, 11.0, 0.4, 0.01, 0.0, 0.27)
  assert implied_vol_from_price(price, 10.0, 11.0, 0.4, 0.01, 0.0) == pytest.approx(0.27, abs=1e-9)
  with pytest.raises(MarketError):
    implied_vol_from_price(20.0, 10.0, 11.0, 0.4, 0.01, 0.0)

def test_market_params_validation():
  with pytest.raises(MarketError):
    MarketParams(sigma0=0.0)
  with pytest.raises(MarketError):
    MarketParams(rho=1.5)
  with pytest.raises(MarketError):
    MarketParams(vol_of_vol=-0.1)
  params = MarketParams(mu=0.05, r=0.02, q=0.01)
  assert params.risk_neutral().mu == pytest.approx(0.01)
  assert params.dt == 1 / 252.0

def test_step_without_vol_of_vol_keeps_vol():
  params = MarketParams()
  state = MarketState(10.0, 0.3, 0)
  following = step_market(state, params, params.dt, 1.3, -2.0)
  assert following.vol == 0.3
  assert following.day == 1
  assert following.spot == pytest.approx(10.0 * math.exp(-0.5 * 0.09 / 252 + 0.3 * math.sqrt(1 / 252.0) * 1.3))

def test_step_rejects_non_finite_shocks():
  params = MarketParams()
  with pytest.raises(MarketError):
    step_market(MarketState(10.0, 0.3), params, params.dt, float('nan'), 0.0)

def test_quote_option_rejects_expired():
  params = MarketParams()
  with pytest.raises(MarketError):
    quote_option(MarketState(10.0, 0.3, 5), params, 10.0, 4)

def test_quote_option_arrays():
  params = MarketParams(vol_of_vol=0.3)
  market = MarketState(10.0, 0.3, 2)
  quote = quote_option(market, params, np.array([9.0, 10.0]), np.array([32, 62]), np.array([True, False]))
  single = quote_option(market, params, 10.0, 62, False)
  assert quote.price_per_unit[1] == pytest.approx(single.price_per_unit)
  assert quote.delta[1] == pytest.approx(single.delta)

def test_martingale_under_risk_neutral_drift():
  params = MarketParams(sigma0=0.3, vol_of_vol=0.3, rho=-0.7).risk_neutral()
  spots, vols = simulate_paths(params, 10.0, 30, stream(11), 100000)
  terminal = spots[:, -1]
  error = np.std(terminal) / math.sqrt(len(terminal))
  assert abs(terminal.mean() - 10.0) < 3 * error
  assert vols.shape == (100000, 31)

def test_hagan_matches_monte_carlo_at_the_money():
  params = MarketParams(sigma0=0.3, vol_of_vol=0.3, rho=-0.7)
  spots, _ = simulate_paths(params, 10.0, 30, stream(12), 100000)
  price = np.maximum(spots[:, -1] - 10.0, 0.0).mean()
  T = 30 / 252.0
  simulated = implied_vol_from_price(price, 10.0, 10.0, T, 0.0, 0.0)
  assert simulated == pytest.approx(implied_vol(10.0, 10.0, T, 0.3, 0.3, -0.7), abs=0.005)

@settings(max_examples=50)
@given(st.integers(0, 2 ** 31))
def test_paths_are_reproducible(seed):
  params = MarketParams(vol_of_vol=0.2)
  first = simulate_paths(params, 10.0, 5, stream(seed), 3)
  second = simulate_paths(params, 10.0, 5, stream(seed), 3)
  np.testing.assert_array_equal(first[0], second[0])
  np.testing.assert_array_equal(first[1], second[1])
