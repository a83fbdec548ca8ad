from ._gencrit import *  # noqa: F401,F403
from ._gencrit import __doc__  # noqa: F401
