# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import io
import os
import logging
import tempfile

from hedgelab.storage import Status, StorageError, text_digest

logger = logging.getLogger(__name__)

class LocalStorage(object):
  """Text artifacts in a directory tree; writes replace files atomically."""

  def __init__(self, root):
    self.root = root

  def location(self, path):
    full = os.path.abspath(os.path.join(self.root, path))
    if os.path.commonpath([self.root, full]) != self.root:
      raise StorageError('Path %r escapes the storage root' % path)
    return full

  def put(self, text, path):
    full = self.location(path)
    directory = os.path.dirname(full)
    try:
      if not os.path.isdir(directory):
        os.makedirs(directory)
      fd, temporary = tempfile.mkstemp(dir=directory, prefix='.partial-')
      with io.open(fd, 'w', encoding='utf-8', newline='') as fp:
        fp.write(text)
      os.replace(temporary, full)
    except OSError as e:
      raise StorageError('Cannot write %s: %s' % (full, e))
    logger.debug('[%s] Writing "%s" ...', self.root, path)
    return full

  def get(self, path):
    full = self.location(path)
    if not os.path.isfile(full):
      return None
    try:
      with io.open(full, 'r', encoding='utf-8', newline='') as fp:
        return fp.read()
    except OSError as e:
      raise StorageError('Cannot read %s: %s' % (full, e))

  def exists(self, path):
    return os.path.isfile(self.location(path))

  def stat(self, path):
    full = self.location(path)
    try:
      status = os.stat(full)
    except OSError:
      return None
    return Status(status.st_mtime, status.st_size, text_digest(self.get(path)))

  def list(self, suffix=''):
    """Relative paths of stored files with the given suffix, sorted."""
    found = []
    for dirpath, dirnames, filenames in os.walk(self.root):
      dirnames.sort()
      for filename in filenames:
        if filename.endswith(suffix) and not filename.startswith('.partial-'):
          found.append(os.path.relpath(os.path.join(dirpath, filename), self.root))
    return sorted(found)
