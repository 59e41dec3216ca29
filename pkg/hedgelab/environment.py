# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""Episodic option-book hedging environment.

Client options arrive as a Poisson stream, each day the agent picks a position
in a freshly quoted at-the-money call inside the constrained action interval,
the book is made delta neutral with the underlying and the market advances one
day. The reward of a day is the change in total wealth less the transaction
cost paid on the hedge option.
"""

import math
import logging

import numpy as np
import pandas as pd

from hedgelab.market import MarketState, quote_option, step_market

logger = logging.getLogger(__name__)

CLIENT = 'client'
HEDGE = 'hedge'

# Columns of the per-step diagnostics export.
DIAGNOSTIC_COLUMNS = ['day', 'spot', 'vol', 'value', 'delta', 'gamma_pre', 'gamma_post',
                      'vega_pre', 'vega_post', 'hedge_gamma', 'hedge_vega', 'hedge_price',
                      'H', 'H_lo', 'H_hi', 'cost', 'reward', 'dollar_gamma', 'clipped',
                      'target_clipped']

class HedgingError(ValueError):
  """Invalid environment configuration or an illegal step."""
  pass

class EnvConfig(object):

  def __init__(self, arrival_intensity=1.0, client_maturity_days=60, hedge_maturity_days=30,
               kappa=0.01, horizon_days=30, units_per_contract=100, gamma_limit=None,
               initial_spot=10.0, vega_features=None):
    self.arrival_intensity = float(arrival_intensity)
    self.client_maturity_days = int(client_maturity_days)
    self.hedge_maturity_days = int(hedge_maturity_days)
    self.kappa = float(kappa)
    self.horizon_days = int(horizon_days)
    self.units_per_contract = int(units_per_contract)
    self.gamma_limit = None if gamma_limit is None else float(gamma_limit)
    self.initial_spot = float(initial_spot)
    self.vega_features = vega_features

    if not self.arrival_intensity >= 0:
      raise HedgingError('arrival_intensity must be non-negative')
    if not self.kappa >= 0:
      raise HedgingError('kappa must be non-negative')
    if self.horizon_days < 1:
      raise HedgingError('horizon_days must be at least 1')
    if self.client_maturity_days < 1 or self.hedge_maturity_days < 1:
      raise HedgingError('option maturities must be at least one day')
    if self.units_per_contract < 1:
      raise HedgingError('units_per_contract must be positive')
    if self.gamma_limit is not None and not self.gamma_limit > 0:
      raise HedgingError('gamma_limit must be positive when set')
    if not self.initial_spot > 0:
      raise HedgingError('initial_spot must be positive')

  def with_vega(self, params):
    """Whether the state carries the two vega features."""
    if self.vega_features is None:
      return not params.constant_vol
    return bool(self.vega_features)

  def n_features(self, params):
    return 5 if self.with_vega(params) else 3

  def replace(self, **changes):
    values = self.as_dict()
    values.update(changes)
    return EnvConfig(**values)

  def as_dict(self):
    return {'arrival_intensity': self.arrival_intensity,
            'client_maturity_days': self.client_maturity_days,
            'hedge_maturity_days': self.hedge_maturity_days,
            'kappa': self.kappa, 'horizon_days': self.horizon_days,
            'units_per_contract': self.units_per_contract,
            'gamma_limit': self.gamma_limit, 'initial_spot': self.initial_spot,
            'vega_features': self.vega_features}

class OptionPosition(object):
  """A European option held in the book; one contract is units_per_contract units."""

  def __init__(self, strike, expiry_day, is_call, contracts, origin=CLIENT):
    if contracts == 0:
      raise HedgingError('Positions must hold a non-zero number of contracts')
    self.strike = float(strike)
    self.expiry_day = int(expiry_day)
    self.is_call = bool(is_call)
    self.contracts = float(contracts)
    self.origin = origin

  def __repr__(self):
    return 'OptionPosition(%s %+g %s K=%g expiry=%d)' % (
      self.origin, self.contracts, 'call' if self.is_call else 'put', self.strike, self.expiry_day)

class PortfolioState(object):
  """Option positions, underlying hedge and cash account of the book."""

  def __init__(self, market, units_per_contract=100):
    self.positions = []
    self.underlying_units = 0.0
    self.cash = 0.0
    self.market = market
    self.units_per_contract = units_per_contract

class Exposure(object):
  """Aggregated value and Greeks of a set of positions, in currency and units."""

  def __init__(self, value=0.0, delta=0.0, gamma=0.0, vega=0.0):
    self.value = value
    self.delta = delta
    self.gamma = gamma
    self.vega = vega

  def __add__(self, other):
    return Exposure(self.value + other.value, self.delta + other.delta,
                    self.gamma + other.gamma, self.vega + other.vega)

  def __iter__(self):
    return iter((self.value, self.delta, self.gamma, self.vega))

def _exposure(positions, market, params, units_per_contract):
  if not positions:
    return Exposure()
  strikes = np.array([p.strike for p in positions])
  expiries = np.array([p.expiry_day for p in positions])
  calls = np.array([p.is_call for p in positions], dtype=bool)
  units = np.array([p.contracts for p in positions]) * units_per_contract
  quote = quote_option(market, params, strikes, expiries, calls)
  return Exposure(float(np.dot(units, quote.price_per_unit)), float(np.dot(units, quote.delta)),
                  float(np.dot(units, quote.gamma)), float(np.dot(units, quote.vega)))

def aggregate_portfolio(portfolio, params):
  """Book value P and Greeks, summed over all live positions.

  Positions expiring today contribute their intrinsic value."""
  return tuple(_exposure(portfolio.positions, portfolio.market, params, portfolio.units_per_contract))

def sample_arrivals(rng, market, config):
  """Client orders of one day: at-the-money calls, long or short with equal odds."""
  count = rng.poisson(config.arrival_intensity)
  if count == 0:
    return []
  signs = np.where(rng.random(count) < 0.5, -1.0, 1.0)
  expiry = market.day + config.client_maturity_days
  return [OptionPosition(market.spot, expiry, True, sign, CLIENT) for sign in signs]

def dollar_gamma(gamma, spot):
  """Gamma in currency terms: change in delta value for a one percent move."""
  return gamma * spot * spot / 100.0

def action_interval(gamma_p, vega_p, gamma_h, vega_h, constant_vol=False):
  """Range of hedge positions (contracts) keeping the hedge a reduction.

  Any position in the range leaves the post-trade gamma ratio or the vega
  ratio inside [0, 1]. Only gamma counts when volatility is constant."""
  if not gamma_h > 0:
    raise HedgingError('Hedge option gamma must be positive, got %r' % gamma_h)
  targets = [0.0, -gamma_p / gamma_h]
  if not constant_vol:
    if not vega_h > 0:
      raise HedgingError('Hedge option vega must be positive, got %r' % vega_h)
    targets.append(-vega_p / vega_h)
  return min(targets), max(targets)

def risk_limit_gate(gamma, gamma_limit):
  """True when the dollar gamma exposure exceeds the limit and hedging is allowed."""
  if not gamma_limit > 0:
    raise HedgingError('gamma_limit must be positive')
  return abs(gamma) > gamma_limit

class ActionInterval(object):
  """The feasible hedge range of one day plus the neutralizing positions."""

  def __init__(self, lo, hi, gamma_target, vega_target=None, dollar_gamma=0.0, gated=False):
    self.lo = lo
    self.hi = hi
    self.gamma_target = gamma_target
    self.vega_target = vega_target
    self.dollar_gamma = dollar_gamma
    self.gated = gated

  @property
  def width(self):
    return self.hi - self.lo

  def position(self, a):
    """Maps an action in [0, 1] linearly onto the interval."""
    width = self.width
    if width == 0:
      return 0.0
    H = self.lo + a * width
    if abs(H) <= 1e-12 * width:
      H = 0.0
    return H

  def action(self, H):
    """The action reaching position H, clipped to the interval."""
    width = self.width
    if width == 0:
      return 0.0
    return min(max((H - self.lo) / width, 0.0), 1.0)

  def contains(self, H):
    return self.lo <= H <= self.hi

  def __repr__(self):
    return 'ActionInterval([%g, %g])' % (self.lo, self.hi)

class StateFeatures(object):
  """Normalized state vector and the raw exposures behind it."""

  def __init__(self, spot, gamma_p, vega_p, gamma_h, vega_h, config, with_vega=True):
    self.spot = spot
    self.gamma_p = gamma_p
    self.vega_p = vega_p
    self.gamma_h = gamma_h
    self.vega_h = vega_h
    scale = spot * spot / 1e4
    values = [spot / config.initial_spot, gamma_p * scale]
    if with_vega:
      values.append(vega_p / 100.0)
    values.append(gamma_h * scale)
    if with_vega:
      values.append(vega_h / 100.0)
    self.values = np.array(values)

  def __len__(self):
    return len(self.values)

class StepOutcome(object):

  def __init__(self, next_features, reward, done, diagnostics):
    self.next_features = next_features
    self.reward = reward
    self.done = done
    self.diagnostics = diagnostics

class HedgingEnvironment(object):
  """One episode of the hedging game; single-threaded, owns its random stream."""

  def __init__(self, params, config, rng):
    self.params = params
    self.config = config
    self._rng = rng
    self._with_vega = config.with_vega(params)
    self.portfolio = None
    self.done = True
    self.total_cost = 0.0
    self.initial_wealth = 0.0

  def reset(self):
    market = MarketState.initial(self.params, self.config.initial_spot)
    self.portfolio = PortfolioState(market, self.config.units_per_contract)
    self.done = False
    self.total_cost = 0.0
    self._book = Exposure()
    self._arrive()
    self._observe()
    self.initial_wealth = self.wealth()
    return self.features

  @property
  def day(self):
    return self.portfolio.market.day

  @property
  def market(self):
    return self.portfolio.market

  def wealth(self):
    """Option book value plus underlying position plus cash, excluding fees."""
    book = self._book
    return book.value + self.portfolio.underlying_units * self.market.spot + self.portfolio.cash

  def _add_positions(self, positions):
    exposure = _exposure(positions, self.market, self.params, self.config.units_per_contract)
    self.portfolio.positions.extend(positions)
    self.portfolio.cash -= exposure.value
    self._book = self._book + exposure

  def _arrive(self):
    arrivals = sample_arrivals(self._rng, self.market, self.config)
    if arrivals:
      self._add_positions(arrivals)
    return len(arrivals)

  def _observe(self):
    market = self.market
    units = self.config.units_per_contract
    hedge = quote_option(market, self.params, market.spot,
                         market.day + self.config.hedge_maturity_days, True)
    self._hedge = hedge
    gamma_h = hedge.gamma * units
    vega_h = hedge.vega * units
    book = self._book
    lo, hi = action_interval(book.gamma, book.vega, gamma_h, vega_h, not self._with_vega)
    dollar = dollar_gamma(book.gamma, market.spot)
    gated = False
    if self.config.gamma_limit is not None and not risk_limit_gate(dollar, self.config.gamma_limit):
      lo, hi = 0.0, 0.0
      gated = True
    self.interval = ActionInterval(lo, hi, -book.gamma / gamma_h,
                                   -book.vega / vega_h if self._with_vega else None,
                                   dollar, gated)
    self.features = StateFeatures(market.spot, book.gamma, book.vega, gamma_h, vega_h,
                                  self.config, self._with_vega)

  def step(self, action):
    if self.done:
      raise HedgingError('Episode is over, reset the environment')
    a = float(action)
    if not math.isfinite(a):
      raise HedgingError('Non-finite action %r' % action)
    clipped = a < 0.0 or a > 1.0
    if clipped:
      logger.warning('Action %r outside [0, 1], clipped', a)
      a = min(max(a, 0.0), 1.0)

    portfolio = self.portfolio
    market = self.market
    units = self.config.units_per_contract
    hedge = self._hedge
    interval = self.interval
    pre = self._book

    H = interval.position(a)
    cost = self.config.kappa * abs(hedge.price_per_unit * H * units)
    if H != 0.0:
      position = OptionPosition(market.spot, market.day + self.config.hedge_maturity_days,
                                True, H, HEDGE)
      self._add_positions([position])
    post = self._book
    self._check_reduction(pre, post)

    # Delta rebalance in the underlying, free of charge.
    target = -post.delta
    portfolio.cash -= (target - portfolio.underlying_units) * market.spot
    portfolio.underlying_units = target
    wealth_before = self.wealth()

    z1, z2 = self._rng.standard_normal(2)
    portfolio.market = step_market(market, self.params, self.params.dt, z1, z2)
    self._book = _exposure(portfolio.positions, portfolio.market, self.params, units)
    wealth_after = self.wealth()
    reward = -cost + (wealth_after - wealth_before)
    self.total_cost += cost

    self._settle()
    self.done = portfolio.market.day >= self.config.horizon_days
    if not self.done:
      self._arrive()
    self._observe()

    diagnostics = {'day': market.day, 'spot': market.spot, 'vol': market.vol,
                   'value': pre.value, 'delta': pre.delta,
                   'gamma_pre': pre.gamma, 'gamma_post': post.gamma,
                   'vega_pre': pre.vega, 'vega_post': post.vega,
                   'hedge_gamma': hedge.gamma * units, 'hedge_vega': hedge.vega * units,
                   'hedge_price': hedge.price_per_unit, 'H': H,
                   'H_lo': interval.lo, 'H_hi': interval.hi, 'cost': cost, 'reward': reward,
                   'dollar_gamma': interval.dollar_gamma, 'clipped': clipped}
    return StepOutcome(self.features, reward, self.done, diagnostics)

  def _check_reduction(self, pre, post, tolerance=1e-9):
    def within(before, after):
      if before == 0.0:
        return after == 0.0 or abs(after) <= tolerance
      ratio = after / before
      return -tolerance <= ratio <= 1.0 + tolerance
    if within(pre.gamma, post.gamma):
      return
    if self._with_vega and within(pre.vega, post.vega):
      return
    raise HedgingError('Hedge increased exposure: gamma %g -> %g, vega %g -> %g'
                       % (pre.gamma, post.gamma, pre.vega, post.vega))

  def _settle(self):
    """Moves positions that expired today into cash at intrinsic value."""
    portfolio = self.portfolio
    day = portfolio.market.day
    expired = [p for p in portfolio.positions if p.expiry_day <= day]
    if not expired:
      return
    spot = portfolio.market.spot
    for p in expired:
      intrinsic = max(spot - p.strike, 0.0) if p.is_call else max(p.strike - spot, 0.0)
      portfolio.cash += intrinsic * p.contracts * portfolio.units_per_contract
    portfolio.positions = [p for p in portfolio.positions if p.expiry_day > day]
    self._book = _exposure(portfolio.positions, portfolio.market, self.params,
                           portfolio.units_per_contract)

def episode(policy, rng, config, params):
  """Plays one episode; returns the total gain and the per-step diagnostics."""
  environment = HedgingEnvironment(params, config, rng)
  features = environment.reset()
  gain = 0.0
  rows = []
  while not environment.done:
    outcome = environment.step(policy.act(features, environment.interval))
    gain += outcome.reward
    outcome.diagnostics['target_clipped'] = policy.target_clipped
    rows.append(outcome.diagnostics)
    features = outcome.next_features
  return gain, rows

def simulate_scenario(params, config, rng):
  """Daily spot, vol and client arrivals of one scenario.

  Draws from rng in the same order as an episode does, so the path matches
  the one any policy sees on the same stream."""
  market = MarketState.initial(params, config.initial_spot)
  rows = []
  while True:
    arrivals = sample_arrivals(rng, market, config) if market.day < config.horizon_days else []
    rows.append({'day': market.day, 'spot': market.spot, 'vol': market.vol,
                 'arrivals': len(arrivals),
                 'net_contracts': sum(p.contracts for p in arrivals)})
    if market.day >= config.horizon_days:
      return rows
    z1, z2 = rng.standard_normal(2)
    market = step_market(market, params, params.dt, z1, z2)

def diagnostics_frame(rows):
  """Per-step diagnostics as a table with the documented columns."""
  return pd.DataFrame(rows, columns=DIAGNOSTIC_COLUMNS)
