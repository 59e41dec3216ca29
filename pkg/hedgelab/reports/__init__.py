# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

"""Report rendering as a chain of processors, each turning one Content into the next."""

import logging

logger = logging.getLogger(__name__)

processors = {}

class Content(object):
  """Text of a report stage together with the tables it was rendered from."""

  def __init__(self, source, text=None, metadata=None):
    if not source:
      raise ValueError('Content needs a source name')

    self._source = source
    self._text = text
    self._metadata = metadata or {}

  def get_source(self):
    return self._source

  def get_metadata(self):
    return self._metadata

  def get_text(self):
    return self._text or ''

  def derive(self, text):
    """The next stage: new text, same source and tables."""
    return Content(self._source, text=text, metadata=self._metadata)

class Processor(object):

  def process(self, content, context):
    return content

def register_processor(name, definition):
  processors[name] = definition

from . import markup, templates

def create_processor(data):
  if 'processor' not in data:
    raise ValueError('Processor type not defined')

  name = data['processor']
  if name in processors:
    return processors[name](data)

  logger.warning("Processor '%s' not defined, passing content through", name)
  return Processor()

def run_chain(chain, content, context):
  for processor in chain:
    logger.debug('[%s] %s', content.get_source(), type(processor).__name__)
    content = processor.process(content, context)
  return content
