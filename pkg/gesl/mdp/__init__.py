from gesl.mdp.core import *
from gesl.mdp.core import __all__
