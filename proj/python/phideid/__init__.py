"""Radiology report de-identification: detection, surrogation, evaluation."""

from ._phideid import *  # noqa: F401,F403
from ._phideid import __doc__  # noqa: F401
