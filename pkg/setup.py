"""Setup file for the neuroforge application."""

##############################################################################
# Python imports.
from pathlib    import Path
from setuptools import setup, find_packages

##############################################################################
# Import the library itself to pull details out of it.
import neuroforge

##############################################################################
# Work out the location of the README file.
def readme():
    """Return the full path to the README file.

    :returns: The path to the README file.
    :rtype: ~pathlib.Path
    """
    return Path( __file__).parent.resolve() / "README.md"

##############################################################################
# Load the long description for the package.
def long_desc():
    """Load the long description of the package from the README.

    :returns: The long description.
    :rtype: str
    """
    with readme().open( "r", encoding="utf-8" ) as rtfm:
        return rtfm.read()

##############################################################################
# Perform the setup.
setup(

    name                          = "neuroforge",
    version                       = neuroforge.__version__,
    description                   = str( neuroforge.__doc__ ),
    long_description              = long_desc(),
    long_description_content_type = "text/markdown",
    url                           = "https://github.com/davep/neuroforge",
    author                        = neuroforge.__author__,
    author_email                  = neuroforge.__email__,
    maintainer                    = neuroforge.__maintainer__,
    maintainer_email              = neuroforge.__email__,
    packages                      = find_packages( exclude=[ "tests" ] ),
    package_data                  = { "neuroforge": [ "py.typed" ] },
    include_package_data          = True,
    install_requires              = [ "numpy>=1.24", "scipy>=1.10", "rich>=13.0", "xdg", "tomli>=1.1; python_version<'3.11'" ],
    extras_require                = { "test": [ "pytest>=7.0" ] },
    python_requires               = ">=3.10",
    keywords                      = "neuroevolution neat cma-es reinforcement-learning temporal-difference",
    entry_points                  = {
        "console_scripts": "neuroforge=neuroforge.app:run"
    },
    license                       = (
        "License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)"
    ),
    classifiers                   = [
        "License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)",
        "Environment :: Console",
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Typing :: Typed"
    ]

)

### setup.py ends here
