"""Design calculations for entangled two-photon absorption (ETPA) in plasma."""
from importlib.resources import files

from .errors import EtpaError
from .quantities import Quantity, convert

__version__ = "0.1.0"


def sample_path(name):
    """Path of a bundled sample data file, e.g. ``sample_path("ar_ii_levels.csv")``."""
    return files(__package__).joinpath("data", name)


__all__ = ["EtpaError", "Quantity", "convert", "sample_path", "__version__"]
