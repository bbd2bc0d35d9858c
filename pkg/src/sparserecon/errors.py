"""Exception types shared across the package.

Two failure modes are distinguished because the command-line tool maps
them to different exit codes: bad user input (exit 2) versus a
combinatorial computation whose size guard was exceeded (exit 3).
"""


class InputError(ValueError):
    """Invalid input: bad dimensions, values out of range, malformed files."""


class SizeGuardError(RuntimeError):
    """An exact combinatorial computation would exceed its enumeration guard."""
