# solver/riccati_spectrum/cli/routes.py

import typer

from ..core.config import settings
from .commands import bounds, chain, classify, eigenfunction, example8, oracle, spectrum, validate

app = typer.Typer(
    name="riccati-spectrum",
    help=settings.PROJECT_NAME,
    add_completion=False,
    no_args_is_help=True,
)
"""Main command group."""

# Coefficients
app.command("validate")(validate.validate_command)

# Riccati chains and eigenvalues
app.command("chain")(chain.chain_command)
app.command("spectrum")(spectrum.spectrum_command)
app.command("bounds")(bounds.bounds_command)
app.command("classify")(classify.classify_command)

# Eigenfunctions
app.command("eigenfunction")(eigenfunction.eigenfunction_command)

# Reference runs
app.command("example8")(example8.example8_command)
app.command("oracle")(oracle.oracle_command)
