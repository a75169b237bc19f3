from .classify import *
from .export import *
from .metrics import *
from .relation_graph import *
from .selection import *
