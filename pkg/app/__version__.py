__title__ = "snbench"
__description__ = (
    "Stochastic trust-region and adaptive cubic regularization methods with "
    "inexact function, gradient and Hessian oracles."
)
__url__ = "https://github.com/savannahghi/snbench"
__version__ = "0.1.0"
__author__ = "Savannah Informatics Global Health Institute"
__license__ = "MIT"
__copyright__ = "Copyright 2022 Savannah Informatics Global Health Institute"
