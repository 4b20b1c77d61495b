"""mesh gen / mesh check: build and inspect ASCII meshes."""

import argparse
from pathlib import Path

from thermo_homogenization.commands.base import BaseCommand
from thermo_homogenization.errors import MeshingError
from thermo_homogenization.fem import (
    check_mesh,
    generate_cell_mesh,
    generate_macro_mesh,
    read_mesh,
    write_mesh,
)
from thermo_homogenization.logger import summarize


class MeshGenCommand(BaseCommand):
    """Generate the reference cell mesh or the macroscopic mesh."""

    name = "mesh gen"
    description = "Generate the periodic cell mesh or the macro mesh"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--kind", choices=["cell", "macro"], default="cell", help="Mesh to generate"
        )
        parser.add_argument("--file", type=Path, help="Output file (default: OUT/<kind>.mesh)")

    def run(self) -> bool:
        if self.args.kind == "cell":
            resolution = self.config.cell_resolution
            with self.logger.status(f"Meshing the reference cell (h={resolution:g})..."):
                mesh = generate_cell_mesh(self.shape, resolution)
        else:
            nx = int(self.config.get('macro.mesh.nx'))
            mesh = generate_macro_mesh(nx, int(self.config.get('macro.mesh.ny')))

        path = write_mesh(mesh, self.args.file or self.out_dir / f"{self.args.kind}.mesh")
        self.logger.track_artifact(path)
        self.logger.success(
            f"Wrote {self.args.kind} mesh: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles"
        )
        self.emit({"path": str(path), "n_nodes": mesh.n_nodes, "n_triangles": mesh.n_triangles})
        return True


class MeshCheckCommand(BaseCommand):
    """Quality report of a mesh file."""

    name = "mesh check"
    description = "Check orientation, angles, interface fit and periodic partners of a mesh"

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--mesh", type=Path, required=True, help="Mesh file written by 'mesh gen'"
        )
        parser.add_argument(
            "--macro", action="store_true",
            help="Mesh has no inclusion (skip the interface fit)",
        )

    def run(self) -> bool:
        mesh = read_mesh(self.args.mesh)
        report = check_mesh(mesh, None if self.args.macro else self.shape)
        for warning in report.warnings:
            self.logger.warning(warning)
        self.emit(report.to_dict(), "mesh_check.json")
        if not report.ok:
            raise MeshingError(
                f"Mesh {self.args.mesh} failed the quality check",
                {
                    "negative_triangles": report.negative_triangles,
                    "unpaired_face_nodes": report.unpaired_face_nodes,
                },
            )
        quality = summarize({"min_angle": report.min_angle, "area": report.area})
        self.logger.success(f"Mesh OK ({quality})")
        return True
