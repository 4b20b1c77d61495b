"""mms: manufactured-solution convergence study of the macro discretization."""

import argparse

from thermo_homogenization.commands.base import BaseCommand
from thermo_homogenization.errors import ConvergenceError
from thermo_homogenization.macrosolver import mms_study


class MMSCommand(BaseCommand):
    """L2 errors and observed orders of the P1 Poisson solve on refined grids."""

    name = "mms"
    description = "Manufactured-solution convergence study (observed L2 order)"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--levels", type=int, nargs="+", default=[8, 16, 32, 64],
            help="Grid cells per side (default: 8 16 32 64)",
        )
        parser.add_argument("--reaction", type=float, default=0.0, help="Zeroth-order coefficient")

    def run(self) -> bool:
        with self.logger.status("Manufactured-solution study..."):
            result = mms_study(self.args.levels, reaction=self.args.reaction, solver=self.solver)
        self.emit(result.to_dict(), "mms.json")
        if not result.success:
            raise ConvergenceError("Observed L2 order below the expected rate", result.to_dict())
        self.logger.track_metric("observed order", f"{result.orders[-1]:.3f}")
        return True
