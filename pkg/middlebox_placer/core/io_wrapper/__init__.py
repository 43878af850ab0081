from middlebox_placer.core.io_wrapper.parser import parse_graphml
from middlebox_placer.core.io_wrapper.parser import parse_sndlib
from middlebox_placer.core.io_wrapper.parser import read_instance
from middlebox_placer.core.io_wrapper.parser import read_topology
from middlebox_placer.core.io_wrapper.generator import ScenarioConfig
from middlebox_placer.core.io_wrapper.generator import generate_unweighted_scenario
from middlebox_placer.core.io_wrapper.generator import generate_weighted_scenario
from middlebox_placer.core.io_wrapper.generator import stretch_grid
from middlebox_placer.core.io_wrapper.generator import write_instance
