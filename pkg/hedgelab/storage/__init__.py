# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""Artifact stores addressed by URI: a local directory or dummy:// (discards writes)."""

import os
import re
import hashlib

URI_REGEX = [('dummy', re.compile('dummy://')),
             ('file', re.compile('file://(?P<path>/.*)')),
             ('local', re.compile('(?P<path>.+)'))]

class StorageError(IOError):
  pass

class Status(object):
  def __init__(self, date_modified=None, size=None, digest=None):
    self.date_modified = date_modified
    self.size = size
    self.digest = digest

  def __repr__(self):
    return 'Status(date_modified=%r, size=%r, digest=%r)' % (self.date_modified, self.size, self.digest)

def text_digest(text):
  return hashlib.sha256(text.encode('utf-8')).hexdigest()

class DummyStorage(object):
  root = None

  def put(self, text, path):
    pass

  def get(self, path):
    return None

  def stat(self, path):
    return None

  def exists(self, path):
    return False

  def location(self, path):
    return None

  def list(self, suffix=''):
    return []

def create_storage(uri):
  """Storage for a URI; relative local paths are made absolute."""
  if not uri:
    raise StorageError('Empty storage location')

  for protocol, regex in URI_REGEX:
    m = regex.match(uri)
    if not m:
      continue

    if protocol == 'dummy':
      return DummyStorage()
    from . import local
    return local.LocalStorage(os.path.abspath(m.group('path')))

  raise StorageError('Illegal storage location %r' % uri)
