"""macro run: integrate the homogenized system."""

import argparse
from pathlib import Path

from thermo_homogenization.commands.base import BaseCommand
from thermo_homogenization.macrosolver import run_macro

MACRO_DIR = "macro"


class MacroRunCommand(BaseCommand):
    """Run the homogenized heat, growth and elasticity system on the unit square."""

    name = "macro run"
    description = "Homogenized run from a coefficient table (series.csv, fields_XXXX.csv)"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--table", type=Path, help="Coefficient table (default: table.path)")
        parser.add_argument(
            "--run-dir", type=Path, help=f"Run directory (default: OUT/{MACRO_DIR})"
        )

    def run(self) -> bool:
        table = self.load_table()
        config = self.config.macro_config(output_dir=self.args.run_dir or self.out_dir / MACRO_DIR)
        self.logger.section(
            f"Macro run ({config.nx}x{config.ny}, dt={config.dt:g}, T={config.t_end:g})"
        )

        with self.logger.status(f"Integrating {config.n_steps} steps..."):
            run = run_macro(config, table=table, solver=self.solver)

        final = run.series[-1]
        self.logger.track_artifact(run.output_dir)
        self.logger.success(f"Macro run finished at t={final['t']:g}")
        self.emit({"run_dir": str(run.output_dir), "steps": config.n_steps, "final": final})
        return run.success
