import sys
import os

# If extensions (or modules to document with autodoc) are in another directory,
# add these directories to sys.path here.
sys.path.insert(0, os.path.abspath('..'))

from hopshare import __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.coverage',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'hopshare'
copyright = '2026, hopshare contributors'

version = __version__
release = __version__

exclude_patterns = ['_build']
pygments_style = 'sphinx'

import sphinx_rtd_theme
html_theme = "sphinx_rtd_theme"
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

htmlhelp_basename = 'hopsharedoc'

man_pages = [
    ('index', 'hopshare', 'hopshare Documentation',
     ['hopshare contributors'], 1)
]

autodoc_default_options = {
    'members': True,
    'undoc-members': False,
}
