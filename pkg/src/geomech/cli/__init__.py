"""Command-line front end."""
from .main import main, run
from .sysfile import SystemFile, SystemFileError, load_system, load_text

__all__ = ["SystemFile", "SystemFileError", "load_system", "load_text", "main", "run"]
