from importlib.metadata import version

from .companies import *
from .domains import *
from .errors import *
from .graph import *
from .ids import *
from .log_model import *
from .longitudinal import *
from .options import *
from .plots import *
from .sar import *
from .sync import *
from .synth import *

# get version from pyproject.toml
__version__ = version(__package__)
