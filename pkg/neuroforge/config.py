"""Provides the run configuration and the code to load it.

The configuration file is TOML-compatible sectioned key/value text with the
sections `[macro]`, `[cma]`, `[td]`, `[env]` and `[run]`. Anything left out
takes its default value; anything unknown is an error.
"""

##############################################################################
# Python imports.
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields, asdict
from json        import dumps
from math        import isfinite
from pathlib     import Path
from typing      import Any, Final

##############################################################################
# Local imports.
from .errors import ParseError, UnknownKeyError, ValidationError

##############################################################################
def _check( condition: bool, message: str ) -> None:
    """Raise a validation error if the condition doesn't hold."""
    if not condition:
        raise ValidationError( message )

def _probabilities( config: object, *names: str ) -> None:
    """Check that the named fields are all probabilities."""
    for name in names:
        value = getattr( config, name )
        _check( 0.0 <= value <= 1.0, f"{name} must be in [0, 1], not {value}" )

##############################################################################
@dataclass( frozen=True )
class MacroConfig:
    """The parameters of macroscopic (topology) evolution."""

    c_cold_gauss_severe: float = 0.1
    """Probability that a severe weight mutation is cancelled."""

    c_cold_gauss_mild: float = 0.3
    """Probability that a non-severe weight mutation is cancelled."""

    c_gauss_severe: float = 0.3
    """One minus the probability of perturbing around the weight (severe)."""

    c_gauss_mild: float = 0.5
    """One minus the probability of perturbing around the weight (non-severe)."""

    c_turn_on_off: float = 0.2
    """Probability of toggling a connection gene."""

    delta_severity: float = 0.5
    """Probability that a weight mutation is severe."""

    pi_add_link: float = 0.6
    """Starting probability of adding a connection."""

    pi_add_node: float = 0.2
    """Starting probability of adding a node."""

    pi_attempt_mutation: int = 50
    """Attempts made to find two unconnected nodes."""

    pi_mutate_link: float = 0.9
    """Probability of mutating the connection weights."""

    sigma_w: float = 0.5
    """Standard deviation of the weight mutation distribution."""

    c_best: float = 3.0
    """Fitness amplification for the population champion."""

    c_inter_species: float = 0.2
    """Probability of mating with a member of another species."""

    c_survival: float = 0.2
    """Fraction of each species allowed to reproduce."""

    population_size: int = 120
    """The population size."""

    p_mate_only: float = 0.2
    """Probability that a crossover child is left unmutated."""

    p_multipoint: float = 0.6
    """Weight of multipoint crossover."""

    p_multipoint_average: float = 0.4
    """Weight of multipoint-average crossover."""

    p_mutate_only: float = 0.3
    """Starting probability of reproducing by mutation alone."""

    p_single_point: float = 0.3
    """Weight of single-point crossover."""

    c1: float = 1.0
    """Compatibility coefficient for excess genes."""

    c2: float = 1.0
    """Compatibility coefficient for disjoint genes."""

    c3: float = 2.0
    """Compatibility coefficient for the mean weight difference."""

    delta_c: float = 3.0
    """The compatibility threshold."""

    d_age_significance: float = 1.0
    """Fitness amplification for young species."""

    d_drop_off_age: int = 2000
    """Generations without improvement after which a species is penalised."""

    d_offspring_stolen: int = 10
    """Offspring taken from the least-improved species."""

    c_annealing: int = 10
    """Generations without improvement that reset the annealing; the same window as `stagnation_window`."""

    anneal_delta: float = 0.01
    """Per-generation step of the mutate-only probability."""

    k1: float = 20.0
    """Annealing coefficient for adding nodes."""

    k2: float = 10.0
    """Annealing coefficient for adding links."""

    psi1: float = 0.02
    psi2: float = 0.04
    psi3: float = 0.1
    psi4: float = 0.2
    psi5: float = 0.3
    psi6: float = 0.5

    young_species_age: int = 10
    """Species up to this age get the age amplification."""

    drop_off_penalty: float = 0.01
    """Multiplier applied to the fitness of stale species."""

    fitter_parent_only: bool = True
    """Only inherit disjoint and excess genes from the fitter parent?"""

    def __post_init__( self ) -> None:
        _probabilities(
            self, "c_cold_gauss_severe", "c_cold_gauss_mild", "c_gauss_severe",
            "c_gauss_mild", "c_turn_on_off", "delta_severity", "pi_add_link",
            "pi_add_node", "pi_mutate_link", "c_inter_species", "c_survival",
            "p_mate_only", "p_multipoint", "p_multipoint_average", "p_mutate_only",
            "p_single_point", "psi1", "psi2", "psi3", "psi4", "psi5", "psi6"
        )
        _check( self.psi1 <= self.psi2, "psi1 must not exceed psi2" )
        _check( self.psi3 <= self.psi4, "psi3 must not exceed psi4" )
        _check( self.psi5 <= self.psi6, "psi5 must not exceed psi6" )
        _check( self.population_size >= 2, "population_size must be at least 2" )
        _check( self.pi_attempt_mutation >= 0, "pi_attempt_mutation must not be negative" )
        _check( self.sigma_w >= 0, "sigma_w must not be negative" )
        _check( self.c_best > 0, "c_best must be positive" )
        _check( self.delta_c > 0, "delta_c must be positive" )
        _check( self.k1 > 0 and self.k2 > 0, "k1 and k2 must be positive" )
        _check( self.c_annealing >= 1, "c_annealing must be at least 1" )
        _check( self.d_offspring_stolen >= 0, "d_offspring_stolen must not be negative" )
        _check(
            self.p_single_point + self.p_multipoint + self.p_multipoint_average > 0,
            "At least one crossover method needs a positive weight"
        )

    def weight_mutation( self, severe: bool ) -> tuple[ float, float ]:
        """The `(c_cold_gauss, c_gauss)` pair for a weight mutation.

        Args:
            severe: Is the mutation severe?

        Returns:
            The cancel probability and the `c_gauss` value.
        """
        if severe:
            return self.c_cold_gauss_severe, self.c_gauss_severe
        return self.c_cold_gauss_mild, self.c_gauss_mild

    @property
    def crossover_weights( self ) -> tuple[ float, float, float ]:
        """The normalised single-point, multipoint and multipoint-average weights."""
        total = self.p_single_point + self.p_multipoint + self.p_multipoint_average
        return (
            self.p_single_point / total,
            self.p_multipoint / total,
            self.p_multipoint_average / total
        )

##############################################################################
@dataclass( frozen=True )
class CmaConfig:
    """The parameters of microscopic (CMA-ES weight) evolution."""

    rho: int = 1000
    """The default stopping coefficient."""

    sigma_max: float = 1.0
    """Upper limit of the initial step size."""

    sigma_d: float = 0.5
    """Default initial step size."""

    o_sigma: float = 0.01
    """Scaling of the stagnation effect on the initial step size."""

    trace: bool = False
    """Write a per-iteration trace of each CMA run?"""

    def __post_init__( self ) -> None:
        _check( self.rho >= 1, "rho must be at least 1" )
        _check( 0 < self.sigma_d, "sigma_d must be positive" )
        _check( 0 < self.sigma_max, "sigma_max must be positive" )
        _check( self.o_sigma >= 0, "o_sigma must not be negative" )

##############################################################################
FITNESS_MODES: Final = ( "training", "greedy" )
"""The ways fitness can be scored."""

@dataclass( frozen=True )
class TDConfig:
    """The parameters of the residual temporal-difference training."""

    alpha: float = 0.05
    """The learning rate."""

    gamma: float = 0.9
    """The discount factor."""

    phi: float = 0.5
    """The blend between the direct and residual-gradient updates."""

    epsilon: float = 0.05
    """Probability of taking a random afterstate."""

    episodes_per_eval: int = 200
    """Training episodes run per fitness evaluation."""

    max_steps_per_episode: int = 500
    """The step cap for an episode."""

    fitness_mode: str = "training"
    """Score the training reward, or greedy episodes after training."""

    write_back: bool = True
    """Write the trained weights back into the evaluated genome?"""

    def __post_init__( self ) -> None:
        _check( self.alpha > 0, "alpha must be positive" )
        _check( 0.0 <= self.gamma < 1.0, f"gamma must be in [0, 1), not {self.gamma}" )
        _probabilities( self, "phi", "epsilon" )
        _check( self.episodes_per_eval >= 0, "episodes_per_eval must not be negative" )
        _check( self.max_steps_per_episode >= 1, "max_steps_per_episode must be at least 1" )
        _check(
            self.fitness_mode in FITNESS_MODES,
            f"fitness_mode must be one of {', '.join( FITNESS_MODES )}"
        )

##############################################################################
ENVIRONMENTS: Final = ( "chain", "xor", "grid" )
"""The names of the available environments."""

@dataclass( frozen=True )
class EnvConfig:
    """The selection and parameters of the environment."""

    name: str = "chain"
    """The name of the environment."""

    length: int = 5
    """Number of states in the chain."""

    start: int = -1
    """The chain start state; -1 means the environment's default."""

    forced: bool = False
    """Should the chain only move right?"""

    left_bonus: float = 1.0
    """Bonus for entering the left chain terminal."""

    right_bonus: float = 10.0
    """Bonus for entering the right chain terminal."""

    width: int = 4
    """Width of the grid."""

    height: int = 4
    """Height of the grid."""

    goal_reward: float = 10.0
    """Bonus for entering the grid goal."""

    step_reward: float = -1.0
    """Reward for every step in the chain and the grid."""

    def __post_init__( self ) -> None:
        _check(
            self.name in ENVIRONMENTS,
            f"env name must be one of {', '.join( ENVIRONMENTS )}, not {self.name!r}"
        )
        _check(
            self.length >= ( 2 if self.forced else 3 ),
            "length must leave the chain at least one non-terminal state"
        )
        _check( -1 <= self.start < self.length, "start must be -1 or a state of the chain" )
        _check( self.width >= 1 and self.height >= 1, "width and height must be positive" )
        _check( self.width * self.height >= 2, "The grid needs at least two cells" )
        for name in ( "left_bonus", "right_bonus", "goal_reward", "step_reward" ):
            _check( isfinite( getattr( self, name ) ), f"{name} must be finite" )

##############################################################################
@dataclass( frozen=True )
class RunSettings:
    """The settings for a run."""

    seed: int = 0
    """The seed for all randomness in the run."""

    max_generations: int = 100
    """The generation budget."""

    stagnation_window: int = 10
    """Generations without improvement before weights are evolved with CMA-ES; the same window as `c_annealing`."""

    workers: int = 1
    """Number of threads used to evaluate fitness."""

    def __post_init__( self ) -> None:
        _check( self.seed >= 0, "seed must not be negative" )
        _check( self.max_generations >= 0, "max_generations must not be negative" )
        _check( self.stagnation_window >= 1, "stagnation_window must be at least 1" )
        _check( self.workers >= 1, "workers must be at least 1" )

##############################################################################
@dataclass( frozen=True )
class RunConfig:
    """The full configuration of a run."""

    macro: MacroConfig = field( default_factory=MacroConfig )
    cma: CmaConfig     = field( default_factory=CmaConfig )
    td: TDConfig       = field( default_factory=TDConfig )
    env: EnvConfig     = field( default_factory=EnvConfig )
    run: RunSettings   = field( default_factory=RunSettings )

    def __post_init__( self ) -> None:
        _check(
            self.macro.c_annealing == self.run.stagnation_window,
            "[macro] c_annealing and [run] stagnation_window are the same window and must agree"
        )

SECTIONS: Final = { config.name: config.type for config in fields( RunConfig ) }
"""Map of section name to the type that holds it."""

##############################################################################
def _coerce( section: str, key: str, kind: Any, value: Any ) -> Any:
    """Coerce a configuration value to the type of its field."""
    if kind in ( bool, "bool" ):
        if isinstance( value, bool ):
            return value
    elif kind in ( int, "int" ):
        if isinstance( value, int ) and not isinstance( value, bool ):
            return value
    elif kind in ( float, "float" ):
        if isinstance( value, ( int, float ) ) and not isinstance( value, bool ):
            return float( value )
    elif kind in ( str, "str" ):
        if isinstance( value, str ):
            return value
    raise ValidationError( f"[{section}] {key} has the wrong type ({type( value ).__name__})" )

WINDOW_KEYS: Final = ( ( "macro", "c_annealing" ), ( "run", "stagnation_window" ) )
"""The two names of the stagnation window."""

def _share_window( document: dict[ str, Any ] ) -> dict[ str, Any ]:
    """Copy the stagnation window to its other name when only one is given."""
    given = [
        values[ key ] for section, key in WINDOW_KEYS
        if isinstance( values := document.get( section ), dict ) and key in values
    ]
    if len( given ) != 1 or any( not isinstance( document.get( section, {} ), dict ) for section, _ in WINDOW_KEYS ):
        return document
    return document | {
        section: document.get( section, {} ) | { key: given[ 0 ] } for section, key in WINDOW_KEYS
    }

def build_config( document: dict[ str, Any ] ) -> RunConfig:
    """Build a run configuration from parsed sections.

    Setting either `[macro] c_annealing` or `[run] stagnation_window` sets
    both.

    Args:
        document: Map of section name to key/value mapping.

    Returns:
        The resolved configuration.

    Raises:
        UnknownKeyError: If a section or key is unknown.
        ValidationError: If a value has the wrong type or range.
    """
    sections: dict[ str, Any ] = {}
    for section, values in _share_window( document ).items():
        if section not in SECTIONS:
            raise UnknownKeyError( f"Unknown section [{section}]" )
        if not isinstance( values, dict ):
            raise UnknownKeyError( f"Unknown key {section!r}; values belong in a section" )
        known = { item.name: item.type for item in fields( SECTIONS[ section ] ) }
        for key in values:
            if key not in known:
                raise UnknownKeyError( f"Unknown key {key!r} in [{section}]" )
        sections[ section ] = SECTIONS[ section ]( **{
            key: _coerce( section, key, known[ key ], value ) for key, value in values.items()
        } )
    return RunConfig( **sections )

def parse_config_text( text: str ) -> RunConfig:
    """Parse configuration text.

    Args:
        text: The text to parse.

    Returns:
        The resolved configuration.

    Raises:
        ParseError: If the text isn't valid.
        UnknownKeyError: If a section or key is unknown.
        ValidationError: If a value has the wrong type or range.
    """
    try:
        document = tomllib.loads( text )
    except tomllib.TOMLDecodeError as error:
        line = ( found := re.search( r"line (\d+)", str( error ) ) ) and int( found.group( 1 ) )
        raise ParseError( str( error ), line or None ) from None
    return build_config( document )

def parse_config( path: Path ) -> RunConfig:
    """Load the configuration from a file.

    Args:
        path: The file to load.

    Returns:
        The resolved configuration.
    """
    return parse_config_text( path.read_text( encoding="utf-8" ) )

##############################################################################
def _toml_value( value: Any ) -> str:
    """Render a scalar as a TOML value."""
    if isinstance( value, bool ):
        return "true" if value else "false"
    if isinstance( value, float ):
        return repr( value )
    if isinstance( value, int ):
        return str( value )
    return dumps( value )

def config_echo( config: RunConfig ) -> str:
    """Render every resolved value of a configuration as configuration text.

    Args:
        config: The configuration to render.

    Returns:
        Text that `parse_config_text` turns back into the same configuration.
    """
    lines: list[ str ] = []
    for section in SECTIONS:
        lines.append( f"[{section}]" )
        lines.extend(
            f"{key} = {_toml_value( value )}"
            for key, value in asdict( getattr( config, section ) ).items()
        )
        lines.append( "" )
    return "\n".join( lines )

### config.py ends here
