"""table build / table query: precomputed effective coefficients."""

import argparse
from pathlib import Path

from thermo_homogenization.commands.base import BaseCommand
from thermo_homogenization.tables import build_table, save_table

TABLE_NAME = "table.json"


class TableBuildCommand(BaseCommand):
    """Solve the cell problems over the height grid and save the table."""

    name = "table build"
    description = "Tabulate effective coefficients over the admissible height band"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--file", type=Path, help=f"Output file (default: OUT/{TABLE_NAME})")

    def run(self) -> bool:
        shape = self.shape
        grid = self.config.table_grid(shape)
        self.logger.section(f"Coefficient table ({len(grid)} nodes)")

        with self.logger.progress_bar("Table nodes", len(grid)) as progress:
            def _advance(h: float) -> None:
                if progress is not None:
                    progress.advance(progress.task_ids[0])

            table = build_table(
                shape,
                self.config.params(),
                grid=grid,
                mesh_resolution=self.config.cell_resolution,
                mode=self.config.table_mode,
                threads=self.config.threads,
                solver=self.solver,
                on_node=_advance,
                seed=self.config.seed,
            )

        path = save_table(table, self.args.file or self.out_dir / TABLE_NAME)
        self.logger.track_artifact(path)
        self.logger.success(f"Table over [{table.h_min:g}, {table.h_max:g}] saved to {path}")
        self.emit({
            "path": str(path),
            "nodes": len(table.grid),
            "h_min": table.h_min,
            "h_max": table.h_max,
        })
        return True


class TableQueryCommand(BaseCommand):
    """Interpolated coefficients at one height."""

    name = "table query"
    description = "Interpolate a saved table at one height"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--table", type=Path, help="Table file (default: table.path)")
        parser.add_argument("--h", type=float, required=True, help="Interface height")

    def run(self) -> bool:
        table = self.load_table()
        self.emit(table.interpolate(self.args.h).to_dict())
        return True
