"""Main entry point for the neuroforge application."""

##############################################################################
# Local imports.
from .app import run

##############################################################################
# Main entry code.
if __name__ == "__main__":
    run()

### __main__.py ends here
