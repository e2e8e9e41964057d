"""Evolve neural network value functions with topology search, CMA-ES weight
search and residual temporal-difference training.
"""

######################################################################
# Main package information.
__author__     = "Dave Pearson"
__copyright__  = "Copyright 2023, Dave Pearson"
__credits__    = [ "Dave Pearson" ]
__maintainer__ = "Dave Pearson"
__email__      = "davep@davep.org"
__version__    = "0.1.0"
__licence__    = "GPLv3+"

### __init__.py ends here
