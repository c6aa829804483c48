from gesl.returns.tabular import *
from gesl.returns.operator import *
from gesl.returns.variance import *
