"""
Readers for the supported inputs: Topology Zoo GraphML, SNDlib native text and the instance JSON v1 document
written by :mod:`middlebox_placer.core.io_wrapper.generator`. Nodes are renumbered densely in order of appearance.
"""
import fractions
import json
import logging
import os
import re
import xml.etree.ElementTree as ElementTree

import networkx as nx

from middlebox_placer.core import errors
from middlebox_placer.core.classes import Network, PlacementInstance, STRETCH
from middlebox_placer.core.metric import compute_apsp
from middlebox_placer.placement.weighted import Request, WeightedInstance

logger = logging.getLogger(__name__)

INSTANCE_FORMAT = "middlebox-placer-instance"
INSTANCE_VERSION = 1


def _text(data):
    if not isinstance(data, bytes):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise errors.ParseError("Input is not valid UTF-8", position=e.start)


def _local_name(tag):
    return tag.rsplit("}", 1)[-1]


def _scan_graphml(text):
    # structural checks networkx does not do: it silently creates the endpoints of dangling edges
    try:
        root = ElementTree.fromstring(text)
    except ElementTree.ParseError as e:
        line, column = e.position
        raise errors.ParseError("Malformed GraphML at line {}, column {}".format(line, column),
                                line=line, column=column)
    declared = set()
    edges = []
    for element in root.iter():
        name = _local_name(element.tag)
        if name == "node":
            if "id" not in element.attrib:
                raise errors.ParseError("A node element has no id", element="node")
            declared.add(element.attrib["id"])
        elif name == "edge":
            edges.append((element.attrib.get("source"), element.attrib.get("target"), element.attrib.get("id")))
    for source, target, edge_id in edges:
        for endpoint in (source, target):
            if endpoint is None or endpoint not in declared:
                raise errors.MissingEndpoint(
                    "Edge {} refers to undeclared node {}".format(edge_id or (source, target), endpoint),
                    element="edge", edge=edge_id, source=source, target=target)


def _float_or_none(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def _coordinate(attributes):
    lowered = {key.lower(): value for key, value in attributes.items()}
    latitude = _float_or_none(lowered.get("latitude"))
    longitude = _float_or_none(lowered.get("longitude"))
    if latitude is None or longitude is None:
        return None
    return latitude, longitude


def parse_graphml(data):  # type: (bytes) -> Network
    """
    Reads a GraphML document as an undirected network. Latitude and Longitude node attributes (any letter case)
    become coordinates, a node label becomes the label, every edge gets weight 1 unless it carries a numeric
    weight attribute. Unknown attributes are ignored, self loops are dropped.

    :param data: the document as bytes or str
    :return: Network
    :raises ParseError: on malformed XML or GraphML
    :raises MissingEndpoint: on an edge referring to an undeclared node
    """
    text = _text(data)
    _scan_graphml(text)
    try:
        graph = nx.parse_graphml(text)
    except (nx.NetworkXError, ValueError, KeyError) as e:
        raise errors.ParseError("Invalid GraphML: {}".format(e))

    index = {node: position for position, node in enumerate(graph.nodes)}
    coordinates = []
    labels = []
    for node, attributes in graph.nodes(data=True):
        coordinates.append(_coordinate(attributes))
        lowered = {key.lower(): value for key, value in attributes.items()}
        labels.append(str(lowered.get("label", node)))

    network = Network(len(index), coordinates=coordinates, labels=labels)
    for source, target, attributes in graph.edges(data=True):
        if source == target:
            logger.warning("Dropping self loop on node %s", source)
            continue
        lowered = {key.lower(): value for key, value in attributes.items()}
        weight = _float_or_none(lowered.get("weight"))
        network.add_edge(index[source], index[target], 1.0 if weight is None else weight)
    logger.info("Parsed GraphML network with %d nodes and %d edges", network.node_count, network.edge_count)
    return network


_SECTION_START = re.compile(r"^(?P<section>[A-Z_]+)\s*\($")
_NODE_LINE = re.compile(r"^(?P<name>\S+)\s*\(\s*(?P<x>\S+)\s+(?P<y>\S+)\s*\)")
_LINK_LINE = re.compile(r"^(?P<name>\S+)\s*\(\s*(?P<source>\S+)\s+(?P<target>\S+)\s*\)")
_DEMAND_LINE = re.compile(
    r"^(?P<name>\S+)\s*\(\s*(?P<source>\S+)\s+(?P<target>\S+)\s*\)\s+(?P<unit>\S+)\s+(?P<value>\S+)")


def _sndlib_sections(text):
    sections = {}
    current = None
    depth = 0
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("?"):
            continue
        if current is None:
            match = _SECTION_START.match(line)
            if match is None:
                raise errors.ParseError("Unexpected content outside of a section at line {}".format(number),
                                        line=number)
            current, depth = match.group("section"), 1
            sections[current] = []
        elif line == ")":
            depth -= 1
            if depth == 0:
                current = None
        else:
            # nested blocks (admissible paths) open with a trailing parenthesis
            if line.endswith("("):
                depth += 1
            elif depth == 1:
                sections[current].append((number, line))
    if current is not None:
        raise errors.ParseError("Section {} is not closed".format(current), section=current)
    return sections


def _coordinate_or_none(x, y):
    # SNDlib stores (longitude, latitude), some instances use planar coordinates instead
    longitude, latitude = _float_or_none(x), _float_or_none(y)
    if longitude is None or latitude is None or not (-90.0 <= latitude <= 90.0 and -180.0 <= longitude <= 180.0):
        return None
    return latitude, longitude


def _endpoints(match, index, number):
    source, target = match.group("source"), match.group("target")
    for endpoint in (source, target):
        if endpoint not in index:
            raise errors.MissingEndpoint("Line {} refers to unknown node {}".format(number, endpoint),
                                         line=number, node=endpoint)
    return index[source], index[target]


def parse_sndlib(data):  # type: (bytes) -> tuple
    """
    Reads an instance in SNDlib native format. Links become unit weight edges, coordinates are kept when they are
    geographic, demands with value zero are dropped.

    :param data: the document as bytes or str
    :return: tuple (Network, demands) where demands is a list of (s, t, value)
    :raises ParseError: on a malformed document
    :raises NegativeDemand: on a demand with negative value
    """
    sections = _sndlib_sections(_text(data))
    for required in ("NODES", "LINKS"):
        if required not in sections:
            raise errors.ParseError("Section {} is missing".format(required), section=required)

    names, coordinates = [], []
    for number, line in sections["NODES"]:
        match = _NODE_LINE.match(line)
        if match is None:
            name = line.split()[0]
            names.append(name)
            coordinates.append(None)
            continue
        names.append(match.group("name"))
        coordinates.append(_coordinate_or_none(match.group("x"), match.group("y")))
    index = {name: position for position, name in enumerate(names)}
    if len(index) != len(names):
        raise errors.ParseError("Duplicate node names in the NODES section", section="NODES")

    network = Network(len(names), coordinates=coordinates, labels=names)
    for number, line in sections["LINKS"]:
        match = _LINK_LINE.match(line)
        if match is None:
            raise errors.ParseError("Malformed link at line {}".format(number), line=number, section="LINKS")
        s, t = _endpoints(match, index, number)
        if s != t:
            network.add_edge(s, t, 1.0)

    demands = []
    for number, line in sections.get("DEMANDS", []):
        match = _DEMAND_LINE.match(line)
        value = _float_or_none(match.group("value")) if match is not None else None
        if value is None:
            raise errors.ParseError("Malformed demand at line {}".format(number), line=number, section="DEMANDS")
        s, t = _endpoints(match, index, number)
        if value < 0:
            raise errors.NegativeDemand("Demand {} at line {} is negative".format(match.group("name"), number),
                                        line=number, demand=match.group("name"), value=value)
        if value == 0 or s == t:
            logger.warning("Dropping empty demand %s at line %d", match.group("name"), number)
            continue
        demands.append((s, t, value))
    logger.info("Parsed SNDlib network with %d nodes, %d links and %d demands", network.node_count,
                network.edge_count, len(demands))
    return network, demands


def decode_number(value):
    """
    Numbers of the instance JSON are plain JSON numbers or exact fractions written as "p/q" strings.
    """
    if isinstance(value, str):
        try:
            return fractions.Fraction(value)
        except ValueError:
            raise errors.ParseError("Invalid number {}".format(value))
    return value


def network_from_dict(document):  # type: (dict) -> Network
    try:
        nodes = document["nodes"]
        coordinates = []
        for node in nodes:
            latitude, longitude = node.get("latitude"), node.get("longitude")
            coordinates.append(None if latitude is None or longitude is None else (latitude, longitude))
        network = Network(len(nodes), coordinates=coordinates, labels=[node["label"] for node in nodes])
        for u, v, weight in document["edges"]:
            network.add_edge(u, v, weight)
    except (KeyError, TypeError, ValueError) as e:
        raise errors.ParseError("Invalid network description: {!r}".format(e))
    return network


def read_instance(data):
    """
    Reads an instance JSON v1 document. Distances are recomputed with the stored metric.

    :param data: the document as bytes or str
    :return: PlacementInstance when the document lists "pairs", WeightedInstance when it lists "requests"
    :raises ParseError: on a malformed document or an unsupported version
    """
    try:
        document = json.loads(_text(data))
    except ValueError as e:
        raise errors.ParseError("Instance is not valid JSON: {}".format(e))
    if not isinstance(document, dict) or document.get("format") != INSTANCE_FORMAT:
        raise errors.ParseError("Not a middlebox placement instance document")
    if document.get("version") != INSTANCE_VERSION:
        raise errors.ParseError("Unsupported instance version {}".format(document.get("version")),
                                version=document.get("version"))

    network = network_from_dict(document)
    if "capacity" not in document:
        raise errors.ParseError("Instance has no capacity")
    metric = document.get("metric", "edge-weight")
    distances = compute_apsp(network, metric)
    common = dict(
        network=network,
        distances=distances,
        capacity=decode_number(document["capacity"]),
        stretch=document.get("stretch", 1.0),
        candidates=document.get("candidates"),
        constraint=document.get("constraint", STRETCH),
        max_length=document.get("max_length"),
        metric=metric,
    )
    try:
        if "requests" in document:
            requests = [Request.group(request["nodes"], decode_number(request["demand"]))
                        for request in document["requests"]]
            return WeightedInstance(requests=requests, group_predicate=document.get("group_predicate", "all-pairs"),
                                    **common)
        return PlacementInstance(pairs=[tuple(pair) for pair in document["pairs"]], **common)
    except (KeyError, TypeError) as e:
        raise errors.ParseError("Invalid instance description: {!r}".format(e))


def read_topology(path):  # type: (str) -> Network
    """
    Reads a network from a file, the format is chosen by the extension: .graphml, .json (instance JSON) or
    anything else for SNDlib native text.
    """
    with open(path, "rb") as f:
        data = f.read()
    extension = os.path.splitext(path)[1].lower()
    if extension in (".graphml", ".xml"):
        return parse_graphml(data)
    if extension == ".json":
        return read_instance(data).network
    return parse_sndlib(data)[0]
