# solver/riccati_spectrum/cli/options.py

import typer

CONFIG = typer.Option(None, "--config", help="Coefficient-set JSON file.")
SYSTEM = typer.Option(
    None,
    "--system",
    help="Built-in system: diagonal, example8, example8_frozen, time_dependent.",
)
LAMBDA = typer.Option(None, "--lambda", help="Spectral parameter lambda.")
LAMBDA_MAX = typer.Option(None, "--lambda-max", help="Upper end of the eigenvalue search.")
LAMBDA_MIN = typer.Option(None, "--lambda-min", help="Lower end; defaults to lambda_b.")
M = typer.Option(None, "--m", help="Eigenvalue index m >= 1.")
J = typer.Option(None, "--j", help="Breakpoint index j >= 1.")
TOL = typer.Option(None, "--tol", help="Eigenvalue root tolerance.")
RTOL = typer.Option(None, "--rtol", help="Integrator relative tolerance.")
ATOL = typer.Option(None, "--atol", help="Integrator absolute tolerance.")
SWITCH = typer.Option(None, "--switch-threshold", help="|value| that triggers the reciprocal.")
FLOOR = typer.Option(None, "--floor", help="Absolute integration floor (t < 0).")
PATHS = typer.Option(None, "--paths", help="Monte-Carlo paths.")
STEPS = typer.Option(None, "--steps", help="Euler-Maruyama steps over [0, T].")
SEED = typer.Option(0, "--seed", help="Brownian seed.")
Y0 = typer.Option(1.0, "--y0", help="Scale of the eigenfunction, y(0).")
OUT = typer.Option(None, "--out", help="Output file.")
FORMAT = typer.Option("csv", "--format", help="csv or json.")
CASES = typer.Option(120, "--cases", help="Number of oracle cases.")
