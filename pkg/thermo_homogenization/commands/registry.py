"""Command registry for subcommand discovery and dispatch."""

import argparse
from typing import Dict, List, Optional, Type

from thermo_homogenization.commands.base import BaseCommand
from thermo_homogenization.config import Config


class CommandRegistry:
    """Registry for managing available subcommands.

    Provides:
    - Command registration under their command-line path ('table build')
    - Grouping by first word for nested argparse subparsers
    - Command instantiation
    """

    def __init__(self) -> None:
        """Initialize empty registry."""
        self._commands: Dict[str, Type[BaseCommand]] = {}

    def register_with_name(self, name: str):
        """
        Register a command class with a specific name.

        Usage:
            @registry.register_with_name('table build')
            class TableBuildCommand(BaseCommand):
                ...

        Args:
            name: Command-line path to register the command under

        Returns:
            Decorator function
        """
        def decorator(command_class: Type[BaseCommand]) -> Type[BaseCommand]:
            self._commands[name] = command_class
            return command_class
        return decorator

    def get(self, name: str) -> Optional[Type[BaseCommand]]:
        return self._commands.get(name)

    def list_commands(self) -> List[str]:
        """Sorted command paths."""
        return sorted(self._commands.keys())

    def groups(self) -> Dict[str, List[str]]:
        """Command paths keyed by their first word; single-word commands map to ``[name]``."""
        grouped: Dict[str, List[str]] = {}
        for name in self.list_commands():
            grouped.setdefault(name.split()[0], []).append(name)
        return grouped

    def add_subparsers(self, parser: argparse.ArgumentParser) -> None:
        """Attach one subparser per group and one per action; sets ``args.command``."""
        subparsers = parser.add_subparsers(dest="group", metavar="COMMAND")
        for group, names in self.groups().items():
            if names == [group]:
                command_class = self._commands[group]
                sub = subparsers.add_parser(group, help=command_class.description)
                sub.set_defaults(command=group)
                command_class.add_arguments(sub)
                continue
            group_parser = subparsers.add_parser(group, help=f"{group} commands")
            actions = group_parser.add_subparsers(dest="action", metavar="ACTION")
            actions.required = True
            for name in names:
                command_class = self._commands[name]
                sub = actions.add_parser(name.split(maxsplit=1)[1], help=command_class.description)
                sub.set_defaults(command=name)
                command_class.add_arguments(sub)

    def create_command(
        self, name: str, config: Config, args: argparse.Namespace
    ) -> Optional[BaseCommand]:
        """
        Create a command instance by name.

        Args:
            name: Command path
            config: Configuration instance
            args: Parsed arguments

        Returns:
            Command instance or None if not found
        """
        command_class = self.get(name)
        if command_class is None:
            return None
        return command_class(config=config, args=args)


# Global registry instance
_registry: Optional[CommandRegistry] = None


def get_registry() -> CommandRegistry:
    """Get or create the global command registry."""
    global _registry
    if _registry is None:
        _registry = CommandRegistry()
        _register_default_commands(_registry)
    return _registry


def _register_default_commands(registry: CommandRegistry) -> None:
    """Register all default commands."""
    from thermo_homogenization.commands.cell import CellSolveCommand
    from thermo_homogenization.commands.compare import CompareCommand
    from thermo_homogenization.commands.geom import GeomProbeCommand
    from thermo_homogenization.commands.macro import MacroRunCommand
    from thermo_homogenization.commands.mesh import MeshCheckCommand, MeshGenCommand
    from thermo_homogenization.commands.micro import MicroRunCommand
    from thermo_homogenization.commands.mms import MMSCommand
    from thermo_homogenization.commands.table import TableBuildCommand, TableQueryCommand

    registry.register_with_name('geom probe')(GeomProbeCommand)
    registry.register_with_name('mesh gen')(MeshGenCommand)
    registry.register_with_name('mesh check')(MeshCheckCommand)
    registry.register_with_name('cell solve')(CellSolveCommand)
    registry.register_with_name('table build')(TableBuildCommand)
    registry.register_with_name('table query')(TableQueryCommand)
    registry.register_with_name('macro run')(MacroRunCommand)
    registry.register_with_name('micro run')(MicroRunCommand)
    registry.register_with_name('compare')(CompareCommand)
    registry.register_with_name('mms')(MMSCommand)
