from .namespace import *
from .utils import *
