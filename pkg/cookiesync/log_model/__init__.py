from .har import *
from .jsonl import *
from .records import *
