# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

import os

import jinja2

from hedgelab.reports import register_processor, Processor

TEMPLATE_PATH = os.path.join(os.path.dirname(__file__), 'templates')

def format_number(value, digits=4):
  """Fixed-point floats for tables; NaN cells stay empty."""
  if isinstance(value, float):
    if value != value:
      return ''
    return '%.*f' % (digits, value)
  return value

class Jinja2Processor(Processor):
  """Renders the tables attached to a content through a template.

  Templates are looked up in the given path list first, then among the
  packaged ones."""

  def __init__(self, data):
    search = list(data.get('path', [])) + [TEMPLATE_PATH]
    self._env = jinja2.Environment(loader=jinja2.FileSystemLoader(search),
                                   keep_trailing_newline=True)
    self._env.filters['number'] = format_number
    self._template = self._env.get_template(data.get('template', 'summary.md.tpl'))
    self._globals = dict(data.get('context') or {})

  def process(self, content, context):
    variables = dict(self._globals)
    variables.update(context=context, meta=content.get_metadata(), content=content.get_text())
    return content.derive(self._template.render(variables))

register_processor('jinja2', Jinja2Processor)
