# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import json
import hashlib

import numpy as np

__version__ = '0.1.0'

def canonical_json(data):
  """Serializes a document with sorted keys and compact separators."""
  return json.dumps(data, sort_keys=True, separators=(',', ':'))

def digest(data):
  """Returns the SHA-256 hex digest of the canonical form of a document."""
  return hashlib.sha256(canonical_json(data).encode('utf-8')).hexdigest()

def stream(seed, *keys):
  """Random generator for a (seed, key, ...) tuple.

  Streams derived from different keys are independent and do not depend on
  how many other streams were derived before them."""
  entropy = [int(seed)] + [int(k) for k in keys]
  return np.random.default_rng(np.random.SeedSequence(entropy))
