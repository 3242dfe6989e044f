"""Network, request and partition data types, validation, incidence and JSON I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Mapping

import jsonschema


class InstanceError(ValueError):
    """Raised when an instance is malformed or violates the document schema."""


@dataclass(frozen=True)
class Link:
    id: str
    capacity: float


@dataclass(frozen=True)
class Path:
    id: str
    links: tuple[str, ...]


@dataclass(frozen=True)
class Request:
    id: str
    weight: float
    paths: tuple[str, ...]
    source_node: str | None = None


@dataclass(frozen=True)
class Edge:
    """Topology metadata: the undirected node pair carrying a link."""

    link: str
    u: str
    v: str


@dataclass(frozen=True)
class Instance:
    links: tuple[Link, ...]
    paths: tuple[Path, ...]
    requests: tuple[Request, ...]
    alpha: float
    nodes: tuple[str, ...] = ()
    edges: tuple[Edge, ...] = ()

    def link_map(self) -> dict[str, Link]:
        return {l.id: l for l in self.links}

    def path_map(self) -> dict[str, Path]:
        return {p.id: p for p in self.paths}

    def request_map(self) -> dict[str, Request]:
        return {r.id: r for r in self.requests}

    @property
    def has_topology(self) -> bool:
        return bool(self.edges)

    def with_weights(self, weights: Mapping[str, float]) -> "Instance":
        reqs = tuple(
            Request(r.id, float(weights.get(r.id, r.weight)), r.paths, r.source_node)
            for r in self.requests
        )
        return Instance(self.links, self.paths, reqs, self.alpha, self.nodes, self.edges)

    def with_alpha(self, alpha: float) -> "Instance":
        return Instance(self.links, self.paths, self.requests, float(alpha), self.nodes, self.edges)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(instance: Instance) -> ValidationReport:
    """Collect every well-formedness violation; an empty report means valid."""
    report = ValidationReport()
    bad = report.violations.append

    if not (isinstance(instance.alpha, (int, float)) and math.isfinite(instance.alpha)
            and instance.alpha > 0):
        bad(f"nonpositive alpha: {instance.alpha!r}")

    link_ids: set[str] = set()
    for link in instance.links:
        if link.id in link_ids:
            bad(f"duplicate link id {link.id!r}")
        link_ids.add(link.id)
        if not (math.isfinite(link.capacity) and link.capacity > 0):
            bad(f"nonpositive capacity on link {link.id!r}: {link.capacity!r}")

    path_ids: set[str] = set()
    for path in instance.paths:
        if path.id in path_ids:
            bad(f"duplicate path id {path.id!r}")
        path_ids.add(path.id)
        if not path.links:
            bad(f"empty path {path.id!r}")
        if len(set(path.links)) != len(path.links):
            bad(f"repeated link in path {path.id!r}")
        for j in path.links:
            if j not in link_ids:
                bad(f"dangling link id {j!r} in path {path.id!r}")

    owner: dict[str, str] = {}
    request_ids: set[str] = set()
    for req in instance.requests:
        if req.id in request_ids:
            bad(f"duplicate request id {req.id!r}")
        request_ids.add(req.id)
        if not (math.isfinite(req.weight) and req.weight > 0):
            bad(f"nonpositive weight on request {req.id!r}: {req.weight!r}")
        if not req.paths:
            bad(f"request {req.id!r} has no paths")
        if len(set(req.paths)) != len(req.paths):
            bad(f"repeated path in request {req.id!r}")
        for p in req.paths:
            if p not in path_ids:
                bad(f"dangling path id {p!r} in request {req.id!r}")
            elif p in owner and owner[p] != req.id:
                bad(f"path {p!r} shared by requests {owner[p]!r} and {req.id!r}")
            owner[p] = req.id

    for p in path_ids - owner.keys():
        bad(f"orphan path {p!r} belongs to no request")

    for e in instance.edges:
        if e.link not in link_ids:
            bad(f"dangling link id {e.link!r} in edges")
    return report


def ensure_valid(instance: Instance) -> None:
    report = validate(instance)
    if not report.ok:
        raise InstanceError("invalid instance: " + "; ".join(report.violations))


@dataclass(frozen=True)
class Incidence:
    link_to_paths: dict[str, frozenset[str]]
    request_to_paths: dict[str, frozenset[str]]
    path_to_links: dict[str, frozenset[str]]
    path_to_request: dict[str, str]


def build_incidence(instance: Instance) -> Incidence:
    ensure_valid(instance)
    l2p: dict[str, set[str]] = {l.id: set() for l in instance.links}
    p2l: dict[str, frozenset[str]] = {}
    for path in instance.paths:
        p2l[path.id] = frozenset(path.links)
        for j in path.links:
            l2p[j].add(path.id)
    r2p = {r.id: frozenset(r.paths) for r in instance.requests}
    p2r = {p: r.id for r in instance.requests for p in r.paths}
    return Incidence(
        link_to_paths={j: frozenset(s) for j, s in l2p.items()},
        request_to_paths=r2p,
        path_to_links=p2l,
        path_to_request=p2r,
    )


def contending_requests(instance: Instance, incidence: Incidence | None = None) -> dict[str, frozenset[str]]:
    """Map each request to the requests sharing at least one link with it (itself included)."""
    inc = incidence or build_incidence(instance)
    links_of = {
        r.id: frozenset().union(*(inc.path_to_links[p] for p in r.paths))
        for r in instance.requests
    }
    users: dict[str, set[str]] = {}
    for rid, js in links_of.items():
        for j in js:
            users.setdefault(j, set()).add(rid)
    return {
        rid: frozenset().union({rid}, *(users[j] for j in js))
        for rid, js in links_of.items()
    }


# ---------------------------------------------------------------------------
# Partition


@dataclass(frozen=True)
class Partition:
    num_domains: int
    link_domain: dict[str, int]
    request_domain: dict[str, int]
    domain_links: tuple[frozenset[str], ...]
    domain_paths: tuple[frozenset[str], ...]
    domain_requests: tuple[frozenset[str], ...]

    def known_paths(self, m: int, instance: Instance) -> frozenset[str]:
        """Paths whose copies domain m holds: those crossing it plus those of its own requests."""
        own = {p for r in instance.requests if r.id in self.domain_requests[m] for p in r.paths}
        return self.domain_paths[m] | own


def source_domain(request: Request, instance: Instance, link_domain: Mapping[str, int]) -> int:
    """Domain hosting a request: among the domains owning a first hop of one of its paths,
    the one traversed by most of its paths (lowest index on ties)."""
    paths = instance.path_map()
    firsts = {link_domain[paths[p].links[0]] for p in request.paths}
    def coverage(m: int) -> int:
        return sum(any(link_domain[j] == m for j in paths[p].links) for p in request.paths)
    return min(firsts, key=lambda m: (-coverage(m), m))


def make_partition(instance: Instance, link_domain: Mapping[str, int], num_domains: int) -> Partition:
    """Derive per-domain path and request sets from a link-to-domain assignment."""
    if num_domains < 1:
        raise InstanceError("num_domains must be >= 1")
    missing = [l.id for l in instance.links if l.id not in link_domain]
    if missing:
        raise InstanceError(f"links without a domain: {missing[:5]}")
    for j, m in link_domain.items():
        if not (0 <= m < num_domains):
            raise InstanceError(f"link {j!r} assigned to out-of-range domain {m}")
    link_domain = {l.id: int(link_domain[l.id]) for l in instance.links}
    dl: list[set[str]] = [set() for _ in range(num_domains)]
    for j, m in link_domain.items():
        dl[m].add(j)
    dp: list[set[str]] = [set() for _ in range(num_domains)]
    for path in instance.paths:
        for j in path.links:
            dp[link_domain[j]].add(path.id)
    dr: list[set[str]] = [set() for _ in range(num_domains)]
    request_domain = {}
    for req in instance.requests:
        m = source_domain(req, instance, link_domain)
        request_domain[req.id] = m
        dr[m].add(req.id)
    return Partition(
        num_domains=num_domains,
        link_domain=link_domain,
        request_domain=request_domain,
        domain_links=tuple(frozenset(s) for s in dl),
        domain_paths=tuple(frozenset(s) for s in dp),
        domain_requests=tuple(frozenset(s) for s in dr),
    )


def single_domain(instance: Instance) -> Partition:
    return make_partition(instance, {l.id: 0 for l in instance.links}, 1)


# ---------------------------------------------------------------------------
# JSON documents

_ID = {"type": "string"}
_NUM = {"type": "number"}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["alpha", "links", "paths", "requests"],
    "properties": {
        "alpha": _NUM,
        "links": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "capacity"],
                "properties": {"id": _ID, "capacity": _NUM},
            },
        },
        "paths": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "links"],
                "properties": {"id": _ID, "links": {"type": "array", "items": _ID}},
            },
        },
        "requests": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "weight", "paths"],
                "properties": {
                    "id": _ID,
                    "weight": _NUM,
                    "paths": {"type": "array", "items": _ID},
                    "source_node": {"type": ["string", "null"]},
                },
            },
        },
        "nodes": {"type": "array", "items": _ID},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["link", "u", "v"],
                "properties": {"link": _ID, "u": _ID, "v": _ID},
            },
        },
    },
}

PARTITION_SCHEMA = {
    "type": "object",
    "required": ["num_domains", "link_domain"],
    "properties": {
        "num_domains": {"type": "integer", "minimum": 1},
        "link_domain": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
    },
}


def _schema_check(doc, schema) -> None:
    errors = sorted(jsonschema.Draft7Validator(schema).iter_errors(doc), key=lambda e: list(e.path))
    if not errors:
        return
    err = errors[0]
    where = "/".join(str(p) for p in err.absolute_path)
    if err.validator == "required":
        missing = err.message.split("'")[1]
        where = f"{where}/{missing}" if where else missing
        raise InstanceError(f"schema error at {where}: missing required field")
    raise InstanceError(f"schema error at {where or '<root>'}: {err.message}")


def instance_to_dict(instance: Instance) -> dict:
    doc = {
        "alpha": instance.alpha,
        "links": [{"id": l.id, "capacity": l.capacity} for l in instance.links],
        "paths": [{"id": p.id, "links": list(p.links)} for p in instance.paths],
        "requests": [
            {"id": r.id, "weight": r.weight, "paths": list(r.paths), "source_node": r.source_node}
            for r in instance.requests
        ],
    }
    if instance.nodes:
        doc["nodes"] = list(instance.nodes)
    if instance.edges:
        doc["edges"] = [{"link": e.link, "u": e.u, "v": e.v} for e in instance.edges]
    return doc


def instance_from_dict(doc) -> Instance:
    _schema_check(doc, INSTANCE_SCHEMA)
    alpha = doc["alpha"]
    return Instance(
        links=tuple(Link(d["id"], float(d["capacity"])) for d in doc["links"]),
        paths=tuple(Path(d["id"], tuple(d["links"])) for d in doc["paths"]),
        requests=tuple(
            Request(d["id"], float(d["weight"]), tuple(d["paths"]), d.get("source_node"))
            for d in doc["requests"]
        ),
        alpha=alpha if isinstance(alpha, float) else float(alpha),
        nodes=tuple(doc.get("nodes", ())),
        edges=tuple(Edge(e["link"], e["u"], e["v"]) for e in doc.get("edges", ())),
    )


def write_instance(instance: Instance, file) -> None:
    text = json.dumps(instance_to_dict(instance), indent=1)
    _write_text(file, text)


def read_instance(file) -> Instance:
    try:
        doc = json.loads(_read_text(file))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed instance document: {exc}") from exc
    return instance_from_dict(doc)


def partition_to_dict(partition: Partition) -> dict:
    return {"num_domains": partition.num_domains, "link_domain": dict(partition.link_domain)}


def write_partition(partition: Partition, file) -> None:
    _write_text(file, json.dumps(partition_to_dict(partition), indent=1))


def read_partition(file, instance: Instance) -> Partition:
    try:
        doc = json.loads(_read_text(file))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed partition document: {exc}") from exc
    _schema_check(doc, PARTITION_SCHEMA)
    return make_partition(instance, doc["link_domain"], doc["num_domains"])


def _read_text(file) -> str:
    if hasattr(file, "read"):
        return file.read()
    return FsPath(file).read_text()


def _write_text(file, text: str) -> None:
    if hasattr(file, "write"):
        file.write(text)
    else:
        FsPath(file).write_text(text)


def instance_summary(instance: Instance) -> str:
    n_paths = len(instance.paths)
    return (f"{len(instance.links)} links, {len(instance.requests)} requests, "
            f"{n_paths} paths, alpha={instance.alpha}")

