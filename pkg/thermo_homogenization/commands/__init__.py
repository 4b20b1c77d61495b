"""CLI subcommands."""

from thermo_homogenization.commands.base import BaseCommand
from thermo_homogenization.commands.registry import CommandRegistry, get_registry

__all__ = [
    "BaseCommand",
    "CommandRegistry",
    "get_registry",
]
