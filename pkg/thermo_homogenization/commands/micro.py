"""micro run: eps-resolved heat and growth fixed point."""

import argparse
from pathlib import Path

from thermo_homogenization.commands.base import BaseCommand
from thermo_homogenization.microsim import run_micro, time_horizon


def micro_dir_name(level: int) -> str:
    return f"micro_L{level}"


class MicroRunCommand(BaseCommand):
    """Run the resolved problem on the tiling of the unit square with 2^level cells per side."""

    name = "micro run"
    description = "eps-resolved run (micro_series.csv, micro_fields_XXXX.csv, contraction.json)"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--level", type=int, help="Refinement level n, eps = 2^-n (default: micro.level)"
        )
        parser.add_argument(
            "--elasticity", action="store_true", default=None,
            help="Also solve the microscopic displacement at output times",
        )
        parser.add_argument(
            "--run-dir", type=Path, help="Run directory (default: OUT/micro_L<level>)"
        )

    def run(self) -> bool:
        level = int(self.config.get('micro.level') if self.args.level is None else self.args.level)
        run_dir = self.args.run_dir or self.out_dir / micro_dir_name(level)
        config = self.config.micro_config(level=level, output_dir=run_dir)
        elasticity = self.args.elasticity
        if elasticity is None:
            elasticity = self.config.micro_elasticity
        self.logger.section(
            f"Micro run (level {config.level}, eps={config.eps:g}, T={config.t_end:g})"
        )

        message = f"Fixed point over {config.n_steps} steps ({config.coupling} coupling)..."
        with self.logger.status(message):
            run = run_micro(config, self.shape, elasticity=elasticity, solver=self.solver)

        state = run.state
        self.logger.track_artifact(run.output_dir)
        self.logger.success(f"Fixed point converged in {state.iterations} iterations")
        self.emit({
            "run_dir": str(run.output_dir),
            "level": config.level,
            "eps": config.eps,
            "iterations": state.iterations,
            "M_star": state.M_star,
            "horizon": time_horizon(self.shape, state.M_star),
            "max_compatibility": state.max_compatibility,
        })
        return run.success
