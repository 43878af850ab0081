"""
The core module defining the basic abstractions
"""

from middlebox_placer.core.errors import PlacementError
from middlebox_placer.core.classes import Network
from middlebox_placer.core.classes import DistanceMatrix
from middlebox_placer.core.classes import Pair
from middlebox_placer.core.classes import PlacementInstance
from middlebox_placer.core.classes import FeasibilitySets
from middlebox_placer.core.classes import build_feasibility
from middlebox_placer.core.classes import is_feasible
from middlebox_placer.core.classes import feasible_total_capacity_check
from middlebox_placer.core.classes import init
from middlebox_placer.core.metric import compute_apsp
from middlebox_placer.core.metric import geo_distance
from middlebox_placer.core.utility import print_progress
