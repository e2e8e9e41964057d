"""Main command line interface for the application."""

##############################################################################
# Python imports.
import logging
import sys
from argparse    import ArgumentParser, Namespace
from csv         import writer
from dataclasses import asdict, replace
from pathlib     import Path
from typing      import Any, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Rich imports.
from rich.console import Console
from rich.table   import Table

##############################################################################
# Local imports.
from .             import __version__
from .artifacts    import default_output
from .config       import EnvConfig, RunConfig, build_config, parse_config
from .environments import Environment, make_environment, optimal_values
from .errors       import ConfigError, DimensionError, NeuroforgeError
from .evolution    import evolve
from .genome       import Genome, load_genome
from .logs         import setup_logging
from .network      import Network, decode
from .td           import episode_starts, greedy_episode, state_residuals

##############################################################################
log = logging.getLogger( __name__ )

##############################################################################
def _config( args: Namespace ) -> RunConfig:
    """Load the configuration named on the command line, if any, and apply overrides."""
    config = parse_config( args.config ) if args.config is not None else RunConfig()
    if ( seed := getattr( args, "seed", None ) ) is not None:
        config = replace( config, run=build_config( { "run": asdict( config.run ) | { "seed": seed } } ).run )
    return config

def _environment_config( config: RunConfig, args: Namespace, document: dict[ str, Any ] | None = None ) -> EnvConfig:
    """Resolve the environment from the configuration, a genome file and the command line."""
    values = asdict( config.env )
    if document is not None and isinstance( saved := document.get( "environment" ), dict ):
        values |= saved
    if getattr( args, "env", None ) is not None:
        values[ "name" ] = args.env
    if getattr( args, "length", None ) is not None:
        values[ "length" ] = args.length
    return build_config( { "env": values } ).env

def _gamma( config: RunConfig, args: Namespace ) -> float:
    if ( gamma := getattr( args, "gamma", None ) ) is None:
        return config.td.gamma
    return build_config( { "td": asdict( config.td ) | { "gamma": gamma } } ).td.gamma

def _network_for( genome: Genome, environment: Environment ) -> Network:
    """Decode a genome, checking it fits the environment."""
    network = decode( genome )
    if network.input_count != environment.n_features:
        raise DimensionError(
            f"The genome takes {network.input_count} inputs but the {environment.name} "
            f"environment has {environment.n_features} features"
        )
    return network

##############################################################################
def cmd_evolve( args: Namespace ) -> int:
    """Run evolution and write the run's artifacts."""
    config = _config( args )
    config = replace(
        config,
        env = _environment_config( config, args ),
        td  = replace( config.td, gamma=_gamma( config, args ) )
    )
    output = args.out if args.out is not None else default_output( config )
    result = evolve( config, output )
    log.info(
        "Best raw fitness %.4f with %d hidden nodes; results in %s",
        result.champion.raw_fitness, result.champion.hidden_count, output
    )
    return 0

def cmd_eval( args: Namespace ) -> int:
    """Score a saved genome with greedy episodes."""
    config = _config( args )
    genome, document = load_genome( args.genome )
    environment = make_environment( _environment_config( config, args, document ) )
    network = _network_for( genome, environment )
    td = replace( config.td, gamma=_gamma( config, args ) )
    rng = np.random.default_rng( config.run.seed )
    rewards = np.array( [
        greedy_episode( network, environment, td, rng, start )
        for start in episode_starts( environment, args.episodes, rng )
    ] )
    table = Table( title=f"{args.genome} on {environment.name}" )
    table.add_column( "Episodes", justify="right" )
    table.add_column( "Mean", justify="right" )
    table.add_column( "Min", justify="right" )
    table.add_column( "Max", justify="right" )
    table.add_column( "Solved" )
    table.add_row(
        str( len( rewards ) ),
        f"{rewards.mean():.4f}" if len( rewards ) else "-",
        f"{rewards.min():.4f}" if len( rewards ) else "-",
        f"{rewards.max():.4f}" if len( rewards ) else "-",
        "yes" if environment.success( network, td.gamma, td.max_steps_per_episode ) else "no"
    )
    Console().print( table )
    return 0

def cmd_inspect( args: Namespace ) -> int:
    """Show the structure of a saved genome."""
    genome, _ = load_genome( args.genome )
    console = Console()
    nodes = Table( title=f"Nodes ({len( genome.nodes )})" )
    nodes.add_column( "ID", justify="right" )
    nodes.add_column( "Role" )
    for node in genome.nodes:
        nodes.add_row( str( node.id ), node.role.value )
    edges = Table( title=f"Connections ({len( genome.connections )}, {len( genome.enabled )} enabled)" )
    edges.add_column( "Innovation", justify="right" )
    edges.add_column( "In", justify="right" )
    edges.add_column( "Out", justify="right" )
    edges.add_column( "Weight", justify="right" )
    edges.add_column( "Enabled" )
    for gene in genome.connections:
        edges.add_row(
            str( gene.innovation ), str( gene.in_node ), str( gene.out_node ),
            f"{gene.weight:.6f}", "yes" if gene.enabled else "no"
        )
    console.print( nodes )
    console.print( edges )
    if genome.connections:
        console.print( f"Innovations {genome.innovations[ 0 ]} to {genome.max_innovation}" )
    if genome.raw_fitness is not None:
        console.print( f"Raw fitness {genome.raw_fitness}" )
    return 0

def cmd_oracle( args: Namespace ) -> int:
    """Print the optimal values of an environment as CSV, and a genome's values if given."""
    config = _config( args )
    genome, document = load_genome( args.genome ) if args.genome is not None else ( None, None )
    environment = make_environment( _environment_config( config, args, document ) )
    gamma = _gamma( config, args )
    optimal = optimal_values( environment, gamma )
    output = writer( sys.stdout )
    if genome is None:
        output.writerow( ( "state", "v_star" ) )
        for state, value in optimal.items():
            output.writerow( ( environment.state_label( state ), repr( float( value ) ) ) )
        return 0
    network = _network_for( genome, environment )
    output.writerow( ( "state", "v_star", "v_net", "residual" ) )
    for state, residual in state_residuals( network, environment, gamma ):
        output.writerow( (
            environment.state_label( state ),
            repr( float( optimal[ state ] ) ),
            repr( float( network.forward( environment.features( state ) ) ) ),
            repr( float( residual ) )
        ) )
    return 0

##############################################################################
def get_args( arguments: Sequence[ str ] | None = None ) -> Namespace:
    """Parse the command line.

    Args:
        arguments: The arguments to parse; defaults to the process arguments.

    Returns:
        The parsed arguments.
    """
    parser = ArgumentParser(
        prog="neuroforge",
        description="Evolve neural network value functions."
    )
    parser.add_argument( "-v", "--version", action="version", version=f"%(prog)s v{__version__}" )
    commands = parser.add_subparsers( dest="command", required=True )

    evolve_command = commands.add_parser( "evolve", help="Run evolution" )
    evolve_command.add_argument( "--config", type=Path, help="The configuration file" )
    evolve_command.add_argument( "--seed", type=int, help="Override the seed" )
    evolve_command.add_argument( "--out", type=Path, help="The directory to write the results to" )
    evolve_command.add_argument( "--env", help="Override the environment" )
    evolve_command.add_argument( "--length", type=int, help="Override the chain length" )
    evolve_command.add_argument( "--gamma", type=float, help="Override the discount factor" )
    evolve_command.set_defaults( handler=cmd_evolve )

    eval_command = commands.add_parser( "eval", help="Score a genome with greedy episodes" )
    eval_command.add_argument( "--genome", type=Path, required=True, help="The genome file" )
    eval_command.add_argument( "--config", type=Path, help="The configuration file" )
    eval_command.add_argument( "--seed", type=int, help="Override the seed" )
    eval_command.add_argument( "--env", help="Override the environment" )
    eval_command.add_argument( "--length", type=int, help="Override the chain length" )
    eval_command.add_argument( "--gamma", type=float, help="Override the discount factor" )
    eval_command.add_argument( "--episodes", type=int, default=100, help="The number of episodes" )
    eval_command.set_defaults( handler=cmd_eval )

    inspect_command = commands.add_parser( "inspect", help="Show the structure of a genome" )
    inspect_command.add_argument( "--genome", type=Path, required=True, help="The genome file" )
    inspect_command.set_defaults( handler=cmd_inspect )

    oracle_command = commands.add_parser( "oracle", help="Print the optimal state values" )
    oracle_command.add_argument( "--config", type=Path, help="The configuration file" )
    oracle_command.add_argument( "--env", help="Override the environment" )
    oracle_command.add_argument( "--length", type=int, help="Override the chain length" )
    oracle_command.add_argument( "--gamma", type=float, help="Override the discount factor" )
    oracle_command.add_argument( "--genome", type=Path, help="A genome to compare against the optimal values" )
    oracle_command.set_defaults( handler=cmd_oracle )

    return parser.parse_args( arguments )

##############################################################################
def main( arguments: Sequence[ str ] | None = None ) -> int:
    """Run the command line interface.

    Args:
        arguments: The arguments to run with; defaults to the process arguments.

    Returns:
        The exit code.
    """
    args = get_args( arguments )
    try:
        setup_logging()
        return args.handler( args )
    except ( ConfigError, FileNotFoundError ) as error:
        log.error( "%s", error )
        return 2
    except NeuroforgeError as error:
        log.error( "%s", error )
        return 1

def run() -> None:
    """Run the application."""
    sys.exit( main() )

### app.py ends here
