"""Provides the exceptions raised by neuroforge."""

##############################################################################
class NeuroforgeError( Exception ):
    """Base class for all errors raised by neuroforge."""

##############################################################################
class GenomeError( NeuroforgeError ):
    """A genome failed one of its structural invariants."""

class CycleError( GenomeError ):
    """The enabled connections of a genome, or a set of edges, form a cycle."""

class NoOpError( GenomeError ):
    """A variation operator had nothing it could act on."""

class NoMatchError( GenomeError ):
    """Two genomes share no matching genes."""

class GenomeSchemaError( GenomeError ):
    """A genome document did not match the expected schema."""

    def __init__( self, field: str, problem: str ) -> None:
        """Initialise the schema error.

        Args:
            field: The path to the offending field (eg `connections[2].weight`).
            problem: A description of the problem.
        """
        self.field = field
        super().__init__( f"{field}: {problem}" )

##############################################################################
class DimensionError( NeuroforgeError, ValueError ):
    """An input vector did not have the size the network expects."""

##############################################################################
class EnvironmentProblem( NeuroforgeError ):
    """Base class for errors raised by an environment."""

class TerminalError( EnvironmentProblem ):
    """Afterstates were requested for a terminal state."""

class EnumerationError( EnvironmentProblem ):
    """The environment cannot enumerate its states."""

##############################################################################
class NumericalError( NeuroforgeError ):
    """A numerical procedure failed (eg an eigendecomposition)."""

##############################################################################
class ConfigError( NeuroforgeError ):
    """Base class for configuration errors."""

class ParseError( ConfigError ):
    """The configuration text could not be parsed."""

    def __init__( self, message: str, line: int | None = None ) -> None:
        """Initialise the parse error.

        Args:
            message: The description of the problem.
            line: The line number the problem was found on, if known.
        """
        self.line = line
        super().__init__( message if line is None else f"line {line}: {message}" )

class UnknownKeyError( ConfigError ):
    """The configuration contained a section or key we don't know about."""

class ValidationError( ConfigError, ValueError ):
    """A configuration value was outside of its permitted range."""

### errors.py ends here
