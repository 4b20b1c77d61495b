"""cell solve: effective coefficients at one interface height."""

import argparse

from thermo_homogenization.cellhomog import effective_coeffs
from thermo_homogenization.commands.base import BaseCommand


class CellSolveCommand(BaseCommand):
    """Solve the cell problems of the configured shape at height ``--h``."""

    name = "cell solve"
    description = "Effective K*, C*, H*, porosity and interface measure at one height"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--h", type=float, default=0.0, help="Interface height (default: 0)")

    def run(self) -> bool:
        h = self.args.h
        with self.logger.progress_spinner(f"Solving cell problems at h={h:g}..."):
            result = effective_coeffs(
                self.shape,
                self.config.params(),
                h,
                target_h=self.config.cell_resolution,
                solver=self.solver,
            )
        self.logger.track_metric("phi", f"{result.phi:.6f}")
        self.logger.track_metric("K*11", f"{result.K[0, 0]:.6f}")
        self.emit(result.to_dict(), "cell.json")
        return True
