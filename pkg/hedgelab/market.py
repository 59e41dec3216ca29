# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""SABR (beta = 1) asset and volatility dynamics and European option quotes.

Prices follow the Black-Scholes-Merton formula with the implied volatility
taken from Hagan's lognormal approximation. Greeks treat the option value as a
function of the spot and the implied volatility, the practitioner convention.

All functions accept scalars or numpy arrays (broadcast against each other)
and return scalars for scalar input.
"""

import math

import numpy as np
from scipy.stats import norm
from scipy.optimize import brentq

# Below this absolute log-moneyness the Hagan ratio phi/chi is taken to be one.
ATM_THRESHOLD = 1e-8

class MarketError(ValueError):
  """Invalid market parameters or inputs to the pricing functions."""
  pass

def _unwrap(value):
  value = np.asarray(value)
  if value.ndim == 0:
    return float(value)
  return value

def _require_finite(**values):
  for name, value in values.items():
    if not np.all(np.isfinite(value)):
      raise MarketError('Non-finite %s' % name)

class MarketParams(object):
  """Constant parameters of the simulated market (per-annum decimals)."""

  def __init__(self, sigma0=0.3, vol_of_vol=0.0, rho=-0.7, r=0.0, q=0.0, mu=0.0, day_count=252):
    self.sigma0 = float(sigma0)
    self.vol_of_vol = float(vol_of_vol)
    self.rho = float(rho)
    self.r = float(r)
    self.q = float(q)
    self.mu = float(mu)
    self.day_count = day_count

    _require_finite(sigma0=self.sigma0, vol_of_vol=self.vol_of_vol, rho=self.rho,
                    r=self.r, q=self.q, mu=self.mu)
    if not self.sigma0 > 0:
      raise MarketError('sigma0 must be positive, got %r' % sigma0)
    if self.vol_of_vol < 0:
      raise MarketError('vol_of_vol must be non-negative, got %r' % vol_of_vol)
    if not -1.0 <= self.rho <= 1.0:
      raise MarketError('rho must lie in [-1, 1], got %r' % rho)
    if int(day_count) != day_count or day_count <= 0:
      raise MarketError('day_count must be a positive integer, got %r' % day_count)
    self.day_count = int(day_count)

  @property
  def dt(self):
    """Length of one simulated day in years."""
    return 1.0 / self.day_count

  @property
  def constant_vol(self):
    return self.vol_of_vol == 0.0

  def replace(self, **changes):
    values = self.as_dict()
    values.update(changes)
    return MarketParams(**values)

  def risk_neutral(self):
    """The same market with the real-world drift replaced by r - q."""
    return self.replace(mu=self.r - self.q)

  def as_dict(self):
    return {'sigma0': self.sigma0, 'vol_of_vol': self.vol_of_vol, 'rho': self.rho,
            'r': self.r, 'q': self.q, 'mu': self.mu, 'day_count': self.day_count}

  def __eq__(self, other):
    return isinstance(other, MarketParams) and self.as_dict() == other.as_dict()

  def __ne__(self, other):
    return not self == other

  def __repr__(self):
    return 'MarketParams(%s)' % ', '.join('%s=%r' % item for item in sorted(self.as_dict().items()))

class MarketState(object):
  """Asset price, instantaneous volatility and day index."""

  def __init__(self, spot, vol, day=0):
    if not (math.isfinite(spot) and spot > 0):
      raise MarketError('spot must be positive and finite, got %r' % spot)
    if not (math.isfinite(vol) and vol > 0):
      raise MarketError('vol must be positive and finite, got %r' % vol)
    if day < 0:
      raise MarketError('day must be non-negative, got %r' % day)
    self.spot = float(spot)
    self.vol = float(vol)
    self.day = int(day)

  @staticmethod
  def initial(params, spot):
    return MarketState(spot, params.sigma0, 0)

  def __eq__(self, other):
    return (isinstance(other, MarketState) and self.spot == other.spot
            and self.vol == other.vol and self.day == other.day)

  def __ne__(self, other):
    return not self == other

  def __repr__(self):
    return 'MarketState(spot=%r, vol=%r, day=%d)' % (self.spot, self.vol, self.day)

class OptionQuote(object):
  """Mid-market value and Greeks of one unit of an option."""

  def __init__(self, price_per_unit, delta, gamma, vega):
    self.price_per_unit = price_per_unit
    self.delta = delta
    self.gamma = gamma
    self.vega = vega

  def __repr__(self):
    return 'OptionQuote(price_per_unit=%r, delta=%r, gamma=%r, vega=%r)' % (
      self.price_per_unit, self.delta, self.gamma, self.vega)

def evolve(spot, vol, params, dt, z1, z2):
  """Exact lognormal update of spot and volatility over dt.

  The start-of-step volatility applies over the whole step; z2 is correlated
  with z1 here. Works elementwise on arrays of paths."""
  rho = params.rho
  z2c = rho * z1 + math.sqrt(1.0 - rho * rho) * z2
  sqrt_dt = math.sqrt(dt)
  next_spot = spot * np.exp((params.mu - 0.5 * vol * vol) * dt + vol * sqrt_dt * z1)
  v = params.vol_of_vol
  if v == 0.0:
    next_vol = vol * np.ones_like(next_spot) if np.ndim(next_spot) else vol
  else:
    next_vol = vol * np.exp(-0.5 * v * v * dt + v * sqrt_dt * z2c)
  return next_spot, next_vol

def step_market(state, params, dt, z1, z2):
  """Advances the market by dt years under the real-world drift."""
  _require_finite(dt=dt, z1=z1, z2=z2)
  if not dt > 0:
    raise MarketError('dt must be positive, got %r' % dt)
  spot, vol = evolve(state.spot, state.vol, params, dt, float(z1), float(z2))
  return MarketState(float(spot), float(vol), state.day + 1)

def simulate_paths(params, spot0, days, rng, n_paths):
  """Simulates daily spot and volatility paths, arrays of shape (n_paths, days + 1)."""
  spots = np.empty((n_paths, days + 1))
  vols = np.empty((n_paths, days + 1))
  spots[:, 0] = spot0
  vols[:, 0] = params.sigma0
  dt = params.dt
  for day in range(days):
    z1 = rng.standard_normal(n_paths)
    z2 = rng.standard_normal(n_paths)
    spots[:, day + 1], vols[:, day + 1] = evolve(spots[:, day], vols[:, day], params, dt, z1, z2)
  return spots, vols

def implied_vol(forward, strike, T, sigma0, v, rho):
  """Hagan's implied volatility approximation for the lognormal SABR model."""
  forward, strike, T = np.broadcast_arrays(np.asarray(forward, dtype=float),
                                           np.asarray(strike, dtype=float),
                                           np.asarray(T, dtype=float))
  _require_finite(forward=forward, strike=strike, T=T, sigma0=sigma0, v=v, rho=rho)
  if np.any(forward <= 0) or np.any(strike <= 0):
    raise MarketError('forward and strike must be positive')
  if np.any(T < 0) or not sigma0 > 0:
    raise MarketError('T must be non-negative and sigma0 positive')

  B = 1.0 + (rho * v * sigma0 / 4.0 + (2.0 - 3.0 * rho * rho) * v * v / 24.0) * T
  log_moneyness = np.log(forward / strike)
  phi = (v / sigma0) * log_moneyness
  atm = (np.abs(log_moneyness) < ATM_THRESHOLD) | (phi == 0.0)

  ratio = np.ones_like(phi)
  if not np.all(atm):
    off = phi[~atm]
    with np.errstate(divide='ignore', invalid='ignore'):
      chi = np.log((np.sqrt(1.0 - 2.0 * rho * off + off * off) + off - rho) / (1.0 - rho))
      ratio[~atm] = off / chi
    if np.any(chi == 0.0) or not np.all(np.isfinite(ratio)):
      raise MarketError('Hagan expansion undefined (chi = 0) for rho=%r, v=%r' % (rho, v))

  sigma = sigma0 * B * ratio
  if np.any(sigma <= 0):
    raise MarketError('Non-positive implied volatility, maturity too long for the expansion')
  return _unwrap(sigma)

def _black_scholes(spot, strike, T, r, q, sigma_imp):
  spot, strike, T, sigma_imp = np.broadcast_arrays(np.asarray(spot, dtype=float),
                                                   np.asarray(strike, dtype=float),
                                                   np.asarray(T, dtype=float),
                                                   np.asarray(sigma_imp, dtype=float))
  _require_finite(spot=spot, strike=strike, T=T, sigma_imp=sigma_imp, r=r, q=q)
  if np.any(spot <= 0) or np.any(strike <= 0) or np.any(sigma_imp <= 0):
    raise MarketError('spot, strike and sigma_imp must be positive')
  if np.any(T < 0):
    raise MarketError('T must be non-negative')

  live = T > 0
  safe_T = np.where(live, T, 1.0)
  sqrt_T = np.sqrt(safe_T)
  disc_q = np.exp(-q * T)
  disc_r = np.exp(-r * T)
  sig_sqrt_T = sigma_imp * sqrt_T
  d1 = (np.log(spot / strike) + (r - q + 0.5 * sigma_imp * sigma_imp) * safe_T) / sig_sqrt_T
  d2 = d1 - sig_sqrt_T
  pdf = norm.pdf(d1)

  call = np.where(live, spot * disc_q * norm.cdf(d1) - strike * disc_r * norm.cdf(d2),
                  np.maximum(spot - strike, 0.0))
  expiry_delta = np.where(spot > strike, 1.0, np.where(spot == strike, 0.5, 0.0))
  delta = disc_q * np.where(live, norm.cdf(d1), expiry_delta)
  gamma = np.where(live, disc_q * pdf / (spot * sig_sqrt_T), 0.0)
  vega = np.where(live, spot * disc_q * sqrt_T * pdf, 0.0)
  return spot, strike, disc_q, disc_r, call, delta, gamma, vega

def bsm_price(spot, strike, T, r, q, sigma_imp, is_call=True):
  """Black-Scholes-Merton value of one unit; intrinsic value when T = 0."""
  spot, strike, disc_q, disc_r, call, _, _, _ = _black_scholes(spot, strike, T, r, q, sigma_imp)
  put = call - spot * disc_q + strike * disc_r
  return _unwrap(np.where(is_call, call, put))

def greeks(spot, strike, T, r, q, sigma_imp, is_call=True):
  """Delta, gamma and vega of one unit.

  At expiry gamma and vega are zero and the call delta is a step in the
  moneyness, one half exactly at the money."""
  _, _, disc_q, _, _, delta, gamma, vega = _black_scholes(spot, strike, T, r, q, sigma_imp)
  delta = np.where(is_call, delta, delta - disc_q)
  return _unwrap(delta), _unwrap(gamma), _unwrap(vega)

def quote_option(market, params, strike, expiry_day, is_call=True):
  """Quotes options on the simulated market, scalars or arrays of contracts."""
  expiry_day = np.asarray(expiry_day)
  if np.any(expiry_day < market.day):
    raise MarketError('Option expired before day %d' % market.day)

  T = (expiry_day - market.day) / float(params.day_count)
  forward = market.spot * np.exp((params.r - params.q) * T)
  sigma_imp = implied_vol(forward, strike, T, market.vol, params.vol_of_vol, params.rho)
  spot, strike, disc_q, disc_r, call, delta, gamma, vega = _black_scholes(
    market.spot, strike, T, params.r, params.q, sigma_imp)
  price = np.where(is_call, call, call - spot * disc_q + strike * disc_r)
  delta = np.where(is_call, delta, delta - disc_q)
  return OptionQuote(_unwrap(price), _unwrap(delta), _unwrap(gamma), _unwrap(vega))

def implied_vol_from_price(price, spot, strike, T, r, q, is_call=True, low=1e-6, high=5.0):
  """Inverts bsm_price for the implied volatility by Brent's method."""
  def objective(sigma):
    return bsm_price(spot, strike, T, r, q, sigma, is_call) - price
  if objective(low) * objective(high) > 0:
    raise MarketError('Price %r outside the no-arbitrage range' % price)
  return brentq(objective, low, high, xtol=1e-12)
