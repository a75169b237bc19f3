from .decode import *
from .detect import *
from .urls import *
