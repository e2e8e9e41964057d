"""Provides the files a run leaves behind."""

##############################################################################
# Python imports.
from csv         import writer
from dataclasses import asdict, dataclass, field, is_dataclass
from json        import JSONEncoder
from pathlib     import Path
from typing      import TYPE_CHECKING, Any, ClassVar, Final, Iterable, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# XDG imports.
from xdg import xdg_data_home

##############################################################################
# Local imports.
from .cma    import TRACE_HEADER, TraceRow
from .config import RunConfig, config_echo
from .genome import Genome, save_genome

if TYPE_CHECKING:
    from .evolution import GenerationReport

##############################################################################
METRICS_HEADER: Final = (
    "gen", "mode", "best_raw", "mean_raw", "species", "best_nodes", "best_edges",
    "pi_add_node", "pi_add_link", "p_mutate_only", "o"
)
"""The header of the metrics file."""

##############################################################################
def default_output( config: RunConfig ) -> Path:
    """The directory a run writes to when none is given.

    Note:
        As a side effect the parent directory will be created if it
        doesn't exist.
    """
    ( runs := xdg_data_home() / "neuroforge" / "runs" ).mkdir( parents=True, exist_ok=True )
    return runs / f"{config.env.name}-seed{config.run.seed}"

def _cell( value: Any ) -> str:
    """Format a value for a CSV cell; floats round-trip exactly."""
    if isinstance( value, ( float, np.floating ) ):
        return repr( float( value ) )
    return str( value )

def _write_rows( path: Path, rows: Iterable[ Sequence[ Any ] ], mode: str = "a" ) -> None:
    with path.open( mode, newline="", encoding="utf-8" ) as target:
        writer( target ).writerows( [ _cell( value ) for value in row ] for row in rows )

##############################################################################
class RunEncoder( JSONEncoder ):
    """JSON encoder that understands configuration and NumPy values."""

    def default( self, o: object ) -> Any:
        """Handle unknown values."""
        if is_dataclass( o ) and not isinstance( o, type ):
            return asdict( o )
        if isinstance( o, np.floating ):
            return float( o )
        if isinstance( o, np.integer ):
            return int( o )
        return super().default( o )

##############################################################################
@dataclass
class RunArtifacts:
    """The output directory of a run and the files in it."""

    directory: Path
    """The directory the files are written to."""

    config: RunConfig
    """The configuration of the run."""

    traced: set[ int ] = field( default_factory=set )
    """The species whose trace files have been started."""

    CONFIG_FILE: ClassVar[ str ] = "config.toml"
    METRICS_FILE: ClassVar[ str ] = "metrics.csv"
    BEST_FILE: ClassVar[ str ] = "best.json"

    @property
    def config_file( self ) -> Path:
        """The path of the configuration echo."""
        return self.directory / self.CONFIG_FILE

    @property
    def metrics_file( self ) -> Path:
        """The path of the per-generation metrics."""
        return self.directory / self.METRICS_FILE

    @property
    def best_file( self ) -> Path:
        """The path of the best genome."""
        return self.directory / self.BEST_FILE

    def trace_file( self, species: int ) -> Path:
        """The path of the CMA-ES trace of a species."""
        return self.directory / f"cma-species-{species}.csv"

    @staticmethod
    def create( directory: Path, config: RunConfig ) -> "RunArtifacts":
        """Create the output directory and start its files.

        Args:
            directory: The directory to write to.
            config: The configuration of the run.

        Returns:
            The artifacts of the run.
        """
        directory.mkdir( parents=True, exist_ok=True )
        artifacts = RunArtifacts( directory, config )
        artifacts.config_file.write_text( config_echo( config ), encoding="utf-8" )
        _write_rows( artifacts.metrics_file, [ METRICS_HEADER ], "w" )
        return artifacts

    def record( self, report: "GenerationReport" ) -> None:
        """Append a generation's report to the metrics file."""
        _write_rows( self.metrics_file, [ (
            report.generation,
            report.mode,
            report.best_raw,
            report.mean_raw,
            report.species,
            report.best_nodes,
            report.best_edges,
            report.rates.pi_add_node,
            report.rates.pi_add_link,
            report.rates.p_mutate_only,
            report.stagnation
        ) ] )

    def record_traces( self, traces: dict[ int, list[ TraceRow ] ] ) -> None:
        """Append CMA-ES trace rows to each species' trace file, if traces are asked for.

        Args:
            traces: The new trace rows of each species.
        """
        if not self.config.cma.trace:
            return
        for species, rows in sorted( traces.items() ):
            if species in self.traced:
                _write_rows( self.trace_file( species ), rows )
            elif rows:
                _write_rows( self.trace_file( species ), [ TRACE_HEADER, *rows ], "w" )
                self.traced.add( species )

    def finish( self, champion: Genome, trajectory: Sequence[ float ] ) -> None:
        """Write the best genome.

        Args:
            champion: The best genome of the run.
            trajectory: The best raw fitness of each generation.
        """
        save_genome(
            self.best_file,
            champion,
            RunEncoder,
            environment = self.config.env,
            seed        = self.config.run.seed,
            trajectory  = [ float( fitness ) for fitness in trajectory ]
        )

### artifacts.py ends here
