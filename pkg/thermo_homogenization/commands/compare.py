"""compare: L2 errors between a micro run and a macro run."""

import argparse
from pathlib import Path

from thermo_homogenization.commands.base import BaseCommand
from thermo_homogenization.microsim import compare_micro_macro
from thermo_homogenization.microsim.compare import ERRORS_NAME


class CompareCommand(BaseCommand):
    """Compare cell means of a micro run with the macro fields at shared output times."""

    name = "compare"
    description = "theta and h errors of a micro run against a macro run (errors.json)"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--macro", type=Path, required=True, help="Macro run directory")
        parser.add_argument("--micro", type=Path, required=True, help="Micro run directory")

    def run(self) -> bool:
        out = self.args.micro if getattr(self.args, "out", None) is None else self.out_dir
        report = compare_micro_macro(self.args.micro, self.args.macro, output=out)
        self.logger.track_artifact(Path(out) / ERRORS_NAME)
        if report.times:
            self.logger.track_metric("theta L2 (final)", f"{report.theta_final:.4e}")
            self.logger.track_metric("h L2 (final)", f"{report.h_final:.4e}")
        self.emit(report.to_dict())
        return True
