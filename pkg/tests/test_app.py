"""Tests for the command line interface."""

##############################################################################
# Python imports.
import logging
from csv import reader

##############################################################################
# Pytest imports.
import pytest

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from neuroforge.app     import get_args, main
from neuroforge.config  import parse_config
from neuroforge.errors  import ConfigError
from neuroforge.genome  import InnovationRegistry, new_minimal_genome, save_genome
from neuroforge.logs    import LOG_ENV, log_level

##############################################################################
TINY = """\
[macro]
population_size = 6

[td]
episodes_per_eval = 2

[run]
max_generations = 1
"""

##############################################################################
@pytest.fixture
def genome_file( tmp_path ):
    """Save a genome that fits the default five-state chain."""
    def _save( inputs: int = 5 ):
        genome = new_minimal_genome( inputs, 1, InnovationRegistry(), np.random.default_rng( 6 ) )
        save_genome( target := tmp_path / f"genome-{inputs}.json", genome )
        return target
    return _save

def _csv( text: str ) -> list[ list[ str ] ]:
    return list( reader( text.splitlines() ) )

##############################################################################
def test_get_args() -> None:
    args = get_args( [ "oracle", "--env", "grid", "--gamma", "0.5" ] )
    assert ( args.command, args.env, args.gamma, args.genome ) == ( "oracle", "grid", 0.5, None )

def test_a_command_is_needed() -> None:
    with pytest.raises( SystemExit ):
        get_args( [] )

##############################################################################
def test_missing_config_file( tmp_path ) -> None:
    assert main( [ "evolve", "--config", str( tmp_path / "missing.toml" ) ] ) == 2

def test_bad_config_file( tmp_path ) -> None:
    ( config := tmp_path / "bad.toml" ).write_text( "[td]\nlambda = 0.3\n", encoding="utf-8" )
    assert main( [ "evolve", "--config", str( config ) ] ) == 2

def test_bad_log_level( monkeypatch ) -> None:
    monkeypatch.setenv( LOG_ENV, "chatty" )
    assert main( [ "oracle" ] ) == 2

def test_evolve( tmp_path ) -> None:
    ( config := tmp_path / "tiny.toml" ).write_text( TINY, encoding="utf-8" )
    out = tmp_path / "run"
    assert main( [ "evolve", "--config", str( config ), "--seed", "9", "--out", str( out ) ] ) == 0
    assert ( out / "metrics.csv" ).exists()
    assert ( out / "best.json" ).exists()
    assert parse_config( out / "config.toml" ).run.seed == 9

def test_evolve_overrides( tmp_path ) -> None:
    ( config := tmp_path / "tiny.toml" ).write_text( TINY, encoding="utf-8" )
    out = tmp_path / "run"
    assert main( [
        "evolve", "--config", str( config ), "--out", str( out ), "--length", "3", "--gamma", "0.8"
    ] ) == 0
    echoed = parse_config( out / "config.toml" )
    assert ( echoed.env.name, echoed.env.length, echoed.td.gamma ) == ( "chain", 3, 0.8 )

def test_evolve_rejects_a_bad_gamma( tmp_path ) -> None:
    assert main( [ "evolve", "--gamma", "1.5", "--out", str( tmp_path / "run" ) ] ) == 2

##############################################################################
def test_oracle( capsys ) -> None:
    assert main( [ "oracle", "--env", "chain", "--length", "5" ] ) == 0
    rows = _csv( capsys.readouterr().out )
    assert rows[ 0 ] == [ "state", "v_star" ]
    assert [ row[ 0 ] for row in rows[ 1: ] ] == [ "1", "2", "3" ]
    assert rows[ 3 ] == [ "3", "9.0" ]
    assert float( rows[ 2 ][ 1 ] ) == pytest.approx( 7.1 )

def test_oracle_with_a_genome( capsys, genome_file ) -> None:
    assert main( [ "oracle", "--genome", str( genome_file() ) ] ) == 0
    rows = _csv( capsys.readouterr().out )
    assert rows[ 0 ] == [ "state", "v_star", "v_net", "residual" ]
    assert len( rows ) == 4
    assert [ row[ 0 ] for row in rows[ 1: ] ] == [ "1", "2", "3" ]
    assert rows[ 3 ][ 1 ] == "9.0"

def test_oracle_rejects_a_bad_length() -> None:
    assert main( [ "oracle", "--length", "2" ] ) == 2

##############################################################################
def test_inspect( capsys, genome_file ) -> None:
    assert main( [ "inspect", "--genome", str( genome_file() ) ] ) == 0
    assert "Connections (6, 6 enabled)" in capsys.readouterr().out

def test_inspect_bad_genome( tmp_path ) -> None:
    ( broken := tmp_path / "broken.json" ).write_text( "[1, 2]", encoding="utf-8" )
    assert main( [ "inspect", "--genome", str( broken ) ] ) == 1

def test_eval( capsys, genome_file ) -> None:
    assert main( [ "eval", "--genome", str( genome_file() ), "--episodes", "3" ] ) == 0
    assert "Solved" in capsys.readouterr().out

def test_eval_arity_mismatch( genome_file ) -> None:
    assert main( [ "eval", "--genome", str( genome_file( 2 ) ) ] ) == 1

##############################################################################
@pytest.mark.parametrize( "name, level", [
    ( "error", logging.ERROR ), ( "INFO", logging.INFO ), ( " debug ", logging.DEBUG )
] )
def test_log_level( name, level ) -> None:
    assert log_level( name ) == level

def test_log_level_from_the_environment( monkeypatch ) -> None:
    monkeypatch.delenv( LOG_ENV, raising=False )
    assert log_level() == logging.INFO
    monkeypatch.setenv( LOG_ENV, "debug" )
    assert log_level() == logging.DEBUG

def test_unknown_log_level() -> None:
    with pytest.raises( ConfigError ):
        log_level( "loud" )

### test_app.py ends here
