# -*- Mode: python; indent-tabs-mode: nil; c-basic-offset: 2; tab-width: 2 -*-

from hedgelab.reports import register_processor, Processor

OPTIONS = ['extensions', 'extension_configs', 'output_format', 'tab_length']

class MarkdownProcessor(Processor):
  """Markdown to HTML; tables are enabled unless extensions are given."""

  def __init__(self, data):
    import markdown
    self._convert = markdown.markdown
    self._options = dict((key, value) for key, value in data.items() if key in OPTIONS)
    self._options.setdefault('extensions', ['tables'])

  def process(self, content, context):
    return content.derive(self._convert(content.get_text(), **self._options))

register_processor('markdown', MarkdownProcessor)
