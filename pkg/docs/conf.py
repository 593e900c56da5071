# Configuration file for the Sphinx documentation builder.
#
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import sys, os
sys.path.append(os.path.abspath('..'))

# -- Project information -----------------------------------------------------

project = 'bayesarfima'
copyright = '2026, bayesarfima developers'
author = 'bayesarfima developers'


# -- General configuration ---------------------------------------------------

extensions = ['sphinx.ext.autodoc'
]

templates_path = ['_templates']

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']


autodoc_mock_imports = ["deap", "scipy"]

# -- Options for HTML output -------------------------------------------------

html_theme = 'default'

html_static_path = ['']
