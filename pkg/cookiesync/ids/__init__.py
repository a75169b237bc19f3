from .candidates import *
from .detect import *
from .rules import *
from .similarity import *
