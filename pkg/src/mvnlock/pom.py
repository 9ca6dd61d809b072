"""Manifest model: parsing pom.xml, property interpolation, effective model.

The parser covers the subset the toolkit resolves: coordinates, parent,
properties, dependencies (scope/optional/exclusions/type/classifier),
dependencyManagement, modules, and plugin coordinates. Profiles, build
extensions, and BOM import are rejected loudly rather than resolved wrong.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, fields, replace

from .errors import (
    ParentResolutionError,
    PomModelError,
    PomParseError,
    PropertyCycleError,
    PropertyResolutionError,
    UnsupportedPomFeatureError,
    VersionSpecSyntaxError,
)
from .versions import compare_versions

SCOPES = ("compile", "provided", "runtime", "test")

_RANGE_CHARS = set("[](),")
_PROPERTY_RE = re.compile(r"\$\{([^}]+)\}")
_INTERPOLATION_DEPTH = 10
_PARENT_CHAIN_LIMIT = 10


@dataclass(frozen=True)
class Gav:
    """Fully resolved artifact coordinate: the atom of the whole system."""

    group_id: str
    artifact_id: str
    version: str

    def __post_init__(self):
        for name in ("group_id", "artifact_id", "version"):
            if not getattr(self, name):
                raise PomModelError(f"coordinate field {name} must be non-empty")
        if _RANGE_CHARS & set(self.version):
            raise PomModelError(f"version {self.version!r} contains range syntax")

    @property
    def ga(self) -> tuple[str, str]:
        return (self.group_id, self.artifact_id)

    def __str__(self) -> str:
        return f"{self.group_id}:{self.artifact_id}:{self.version}"


@dataclass(frozen=True)
class Interval:
    lower: str | None
    lower_inclusive: bool
    upper: str | None
    upper_inclusive: bool

    def contains(self, version: str) -> bool:
        if self.lower is not None:
            c = compare_versions(version, self.lower)
            if c < 0 or (c == 0 and not self.lower_inclusive):
                return False
        if self.upper is not None:
            c = compare_versions(version, self.upper)
            if c > 0 or (c == 0 and not self.upper_inclusive):
                return False
        return True


@dataclass(frozen=True)
class VersionSpec:
    """Either a soft pin (plain text) or a bracketed range."""

    kind: str  # "soft-pin" | "range"
    text: str
    pin: str | None = None
    intervals: tuple[Interval, ...] = ()

    def contains(self, version: str) -> bool:
        return any(iv.contains(version) for iv in self.intervals)


def parse_version_spec(text: str) -> VersionSpec:
    """Parse version constraint text: plain pin or interval range syntax."""
    stripped = text.strip()
    if not stripped:
        raise VersionSpecSyntaxError("empty version spec")
    if not _RANGE_CHARS & set(stripped):
        return VersionSpec(kind="soft-pin", text=stripped, pin=stripped)

    intervals: list[Interval] = []
    i = 0
    while i < len(stripped):
        ch = stripped[i]
        if ch == ",":
            i += 1
            continue
        if ch not in "[(":
            raise VersionSpecSyntaxError(f"unexpected {ch!r} in version range {stripped!r}")
        closers = [stripped.find(c, i + 1) for c in "])"]
        closers = [c for c in closers if c != -1]
        if not closers:
            raise VersionSpecSyntaxError(f"unbalanced brackets in {stripped!r}")
        j = min(closers)
        body = stripped[i + 1 : j]
        lower_inclusive = ch == "["
        upper_inclusive = stripped[j] == "]"
        if "," in body:
            lo, hi = (part.strip() for part in body.split(",", 1))
            if "," in hi:
                raise VersionSpecSyntaxError(f"too many bounds in interval of {stripped!r}")
            lower = lo or None
            upper = hi or None
        else:
            point = body.strip()
            if not point:
                raise VersionSpecSyntaxError(f"empty interval in {stripped!r}")
            if not (lower_inclusive and upper_inclusive):
                raise VersionSpecSyntaxError(f"exact interval must be inclusive in {stripped!r}")
            lower = upper = point
        if lower is not None and upper is not None and compare_versions(lower, upper) > 0:
            raise VersionSpecSyntaxError(f"inverted interval in {stripped!r}")
        intervals.append(Interval(lower, lower_inclusive, upper, upper_inclusive))
        i = j + 1
    if not intervals:
        raise VersionSpecSyntaxError(f"no intervals in {stripped!r}")
    return VersionSpec(kind="range", text=stripped, intervals=tuple(intervals))


@dataclass(frozen=True)
class DependencyDecl:
    group_id: str
    artifact_id: str
    version_spec: VersionSpec | None = None
    scope: str = "compile"
    scope_explicit: bool = False
    optional_flag: bool = False
    exclusions: tuple[tuple[str, str], ...] = ()
    packaging: str = "jar"
    classifier: str | None = None

    def __post_init__(self):
        if self.scope not in SCOPES:
            raise PomModelError(
                f"unknown scope {self.scope!r} on {self.group_id}:{self.artifact_id}"
            )

    @property
    def ga(self) -> tuple[str, str]:
        return (self.group_id, self.artifact_id)


@dataclass(frozen=True)
class PluginDecl:
    group_id: str
    artifact_id: str
    version: str | None = None

    @property
    def ga(self) -> tuple[str, str]:
        return (self.group_id, self.artifact_id)


@dataclass
class PomModel:
    """Parsed manifest. group/version may be None until parent inheritance fills them."""

    artifact_id: str
    group_id: str | None = None
    version: str | None = None
    packaging: str = "jar"
    parent: Gav | None = None
    properties: dict[str, str] = field(default_factory=dict)
    dependencies: list[DependencyDecl] = field(default_factory=list)
    dependency_management: list[DependencyDecl] = field(default_factory=list)
    modules: list[str] = field(default_factory=list)
    plugins: list[PluginDecl] = field(default_factory=list)
    source_xml: str | None = field(default=None, compare=False, repr=False)

    @property
    def coordinates(self) -> Gav:
        if self.group_id is None or self.version is None:
            raise PomModelError(
                f"coordinates of {self.artifact_id} are not concrete "
                "(group/version still inherited)"
            )
        return Gav(self.group_id, self.artifact_id, self.version)

    def __eq__(self, other):
        # content equality, tolerant of the EffectivePom subclass
        if not isinstance(other, PomModel):
            return NotImplemented
        return all(
            getattr(self, f.name) == getattr(other, f.name)
            for f in fields(PomModel)
            if f.compare
        )


class EffectivePom(PomModel):
    """PomModel after parent merging and property interpolation; coordinates concrete."""


def _local_tag(element: ET.Element) -> str:
    tag = element.tag
    return tag.rsplit("}", 1)[-1] if "}" in tag else tag


def _child_map(element: ET.Element) -> dict[str, ET.Element]:
    return {_local_tag(child): child for child in element}


def _text(element: ET.Element | None) -> str | None:
    if element is None or element.text is None:
        return None
    value = element.text.strip()
    return value or None


def _parse_dependency(element: ET.Element, context: str) -> DependencyDecl:
    children = _child_map(element)
    group = _text(children.get("groupId"))
    artifact = _text(children.get("artifactId"))
    if not group:
        raise PomModelError(f"{context} is missing <groupId>")
    if not artifact:
        raise PomModelError(f"{context} {group}:? is missing <artifactId>")
    version_text = _text(children.get("version"))
    scope_text = _text(children.get("scope"))
    if scope_text == "import":
        raise UnsupportedPomFeatureError(
            f"unsupported element: <scope>import</scope> (BOM import) on {group}:{artifact}"
        )
    if scope_text is not None and scope_text not in SCOPES:
        raise PomModelError(f"unknown scope {scope_text!r} on {group}:{artifact}")
    exclusions: list[tuple[str, str]] = []
    excl_parent = children.get("exclusions")
    if excl_parent is not None:
        for excl in excl_parent:
            emap = _child_map(excl)
            eg = _text(emap.get("groupId"))
            ea = _text(emap.get("artifactId"))
            if not eg or not ea:
                raise PomModelError(
                    f"exclusion on {group}:{artifact} needs <groupId> and <artifactId>"
                )
            exclusions.append((eg, ea))
    return DependencyDecl(
        group_id=group,
        artifact_id=artifact,
        version_spec=parse_version_spec(version_text) if version_text else None,
        scope=scope_text or "compile",
        scope_explicit=scope_text is not None,
        optional_flag=_text(children.get("optional")) == "true",
        exclusions=tuple(exclusions),
        packaging=_text(children.get("type")) or "jar",
        classifier=_text(children.get("classifier")),
    )


def _parse_dependency_list(element: ET.Element | None, context: str) -> list[DependencyDecl]:
    if element is None:
        return []
    return [
        _parse_dependency(child, context)
        for child in element
        if _local_tag(child) == "dependency"
    ]


def parse_pom(xml_text: str) -> PomModel:
    """Parse manifest XML into a PomModel. Unknown elements are ignored."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line, column = exc.position if exc.position else (None, None)
        raise PomParseError(f"malformed XML: {exc.msg.split(':')[0]}", line, column) from exc
    if _local_tag(root) != "project":
        raise PomModelError(f"expected <project> root, found <{_local_tag(root)}>")

    children = _child_map(root)
    if "profiles" in children:
        raise UnsupportedPomFeatureError("unsupported element: <profiles>")

    parent = None
    parent_el = children.get("parent")
    if parent_el is not None:
        pmap = _child_map(parent_el)
        pg, pa, pv = (_text(pmap.get(k)) for k in ("groupId", "artifactId", "version"))
        if not (pg and pa and pv):
            raise PomModelError("<parent> needs groupId, artifactId, and version")
        parent = Gav(pg, pa, pv)

    artifact = _text(children.get("artifactId"))
    if not artifact:
        raise PomModelError("<project> is missing <artifactId>")

    properties: dict[str, str] = {}
    props_el = children.get("properties")
    if props_el is not None:
        for prop in props_el:
            properties[_local_tag(prop)] = (prop.text or "").strip()

    dm_el = children.get("dependencyManagement")
    dm_deps = None
    if dm_el is not None:
        dm_deps = _child_map(dm_el).get("dependencies")

    modules: list[str] = []
    modules_el = children.get("modules")
    if modules_el is not None:
        for module in modules_el:
            path = _text(module)
            if not path:
                raise PomModelError("empty <module> entry")
            if path.startswith("/") or re.match(r"^[A-Za-z]:[\\/]", path):
                raise PomModelError(f"module path must be relative: {path!r}")
            modules.append(path)

    plugins: list[PluginDecl] = []
    build_el = children.get("build")
    if build_el is not None:
        bmap = _child_map(build_el)
        if "extensions" in bmap:
            raise UnsupportedPomFeatureError("unsupported element: <build><extensions>")
        plugins_el = bmap.get("plugins")
        if plugins_el is not None:
            for plugin in plugins_el:
                if _local_tag(plugin) != "plugin":
                    continue
                pmap = _child_map(plugin)
                pa = _text(pmap.get("artifactId"))
                if not pa:
                    raise PomModelError("<plugin> is missing <artifactId>")
                plugins.append(
                    PluginDecl(
                        group_id=_text(pmap.get("groupId")) or "org.apache.maven.plugins",
                        artifact_id=pa,
                        version=_text(pmap.get("version")),
                    )
                )

    return PomModel(
        artifact_id=artifact,
        group_id=_text(children.get("groupId")),
        version=_text(children.get("version")),
        packaging=_text(children.get("packaging")) or "jar",
        parent=parent,
        properties=properties,
        dependencies=_parse_dependency_list(children.get("dependencies"), "dependency"),
        dependency_management=_parse_dependency_list(dm_deps, "managed dependency"),
        modules=modules,
        plugins=plugins,
        source_xml=xml_text,
    )


# --- property interpolation ---


def _substitute(value: str, properties: dict[str, str]) -> str:
    for _ in range(_INTERPOLATION_DEPTH):
        tokens = _PROPERTY_RE.findall(value)
        if not tokens:
            return value
        for token in tokens:
            if token not in properties:
                raise PropertyResolutionError(f"unresolvable property reference ${{{token}}}")
        value = _PROPERTY_RE.sub(lambda m: properties[m.group(1)], value)
    if _PROPERTY_RE.search(value):
        raise PropertyCycleError(f"property substitution did not converge for {value!r}")
    return value


def _builtin_properties(model: PomModel) -> dict[str, str]:
    builtins = {}
    if model.group_id:
        builtins["project.groupId"] = model.group_id
    builtins["project.artifactId"] = model.artifact_id
    if model.version:
        builtins["project.version"] = model.version
    return builtins


def interpolate_properties(model: PomModel, extra: dict[str, str] | None = None) -> PomModel:
    """Replace ${...} references everywhere in the model, up to a fixed depth.

    ``extra`` supplies inherited properties; the model's own entries shadow them.
    """
    table = dict(extra or {})
    table.update(model.properties)
    table.update(_builtin_properties(model))

    def sub(value: str | None) -> str | None:
        return _substitute(value, table) if value is not None else None

    # property values themselves may reference other properties
    resolved_props = {name: _substitute(value, table) for name, value in model.properties.items()}
    table.update(resolved_props)

    def sub_decl(decl: DependencyDecl) -> DependencyDecl:
        spec = decl.version_spec
        if spec is not None:
            new_text = _substitute(spec.text, table)
            if new_text != spec.text:
                spec = parse_version_spec(new_text)
        return replace(
            decl,
            group_id=_substitute(decl.group_id, table),
            artifact_id=_substitute(decl.artifact_id, table),
            version_spec=spec,
            classifier=sub(decl.classifier),
            exclusions=tuple(
                (_substitute(g, table), _substitute(a, table)) for g, a in decl.exclusions
            ),
        )

    parent = model.parent
    if parent is not None:
        parent = Gav(
            _substitute(parent.group_id, table),
            _substitute(parent.artifact_id, table),
            _substitute(parent.version, table),
        )

    result = PomModel(
        artifact_id=_substitute(model.artifact_id, table),
        group_id=sub(model.group_id),
        version=sub(model.version),
        packaging=_substitute(model.packaging, table),
        parent=parent,
        properties=resolved_props,
        dependencies=[sub_decl(d) for d in model.dependencies],
        dependency_management=[sub_decl(d) for d in model.dependency_management],
        modules=list(model.modules),
        plugins=[
            PluginDecl(_substitute(p.group_id, table), _substitute(p.artifact_id, table),
                       sub(p.version))
            for p in model.plugins
        ],
        source_xml=model.source_xml,
    )
    return result


# --- effective model ---


def _merge_decls(child: list[DependencyDecl], parent: list[DependencyDecl]) -> list[DependencyDecl]:
    # child entries shadow parent entries with the same group:artifact key
    child_keys = {d.ga for d in child}
    return list(child) + [d for d in parent if d.ga not in child_keys]


def effective_pom(model: PomModel, parent_loader=None) -> EffectivePom:
    """Compute the effective model: parent merge, interpolation, management fill."""
    chain = [model]
    seen: set[Gav] = set()
    current = model
    while current.parent is not None:
        if current.parent in seen:
            raise ParentResolutionError(
                f"parent chain cycle at {current.parent}", current.parent
            )
        if len(chain) >= _PARENT_CHAIN_LIMIT:
            raise ParentResolutionError(
                f"parent chain longer than {_PARENT_CHAIN_LIMIT}", current.parent
            )
        seen.add(current.parent)
        if parent_loader is None:
            raise ParentResolutionError(
                f"no loader available for parent {current.parent}", current.parent
            )
        try:
            loaded = parent_loader(current.parent)
        except ParentResolutionError:
            raise
        except Exception as exc:
            raise ParentResolutionError(
                f"cannot load parent {current.parent}: {exc}", current.parent
            ) from exc
        if loaded is None:
            raise ParentResolutionError(f"parent {current.parent} not found", current.parent)
        chain.append(loaded)
        current = loaded

    # fold ancestors into the child, nearest ancestor last so the child wins
    merged_props: dict[str, str] = {}
    for ancestor in reversed(chain):
        merged_props.update(ancestor.properties)
    merged_deps = chain[0].dependencies
    merged_dm = chain[0].dependency_management
    for ancestor in chain[1:]:
        merged_deps = _merge_decls(merged_deps, ancestor.dependencies)
        merged_dm = _merge_decls(merged_dm, ancestor.dependency_management)

    group = next((m.group_id for m in chain if m.group_id), None)
    version = next((m.version for m in chain if m.version), None)
    if group is None or version is None:
        raise PomModelError(
            f"coordinates of {model.artifact_id} remain incomplete after inheritance"
        )

    base = PomModel(
        artifact_id=model.artifact_id,
        group_id=group,
        version=version,
        packaging=model.packaging,
        parent=model.parent,
        properties=merged_props,
        dependencies=merged_deps,
        dependency_management=merged_dm,
        modules=list(model.modules),
        plugins=list(model.plugins),
        source_xml=model.source_xml,
    )
    interpolated = interpolate_properties(base, extra=merged_props)

    # dependency management fills versions that direct dependencies omit
    managed = {d.ga: d for d in interpolated.dependency_management}
    filled = []
    for decl in interpolated.dependencies:
        if decl.version_spec is None and decl.ga in managed:
            decl = replace(decl, version_spec=managed[decl.ga].version_spec)
        filled.append(decl)

    return EffectivePom(
        artifact_id=interpolated.artifact_id,
        group_id=interpolated.group_id,
        version=interpolated.version,
        packaging=interpolated.packaging,
        parent=interpolated.parent,
        properties=interpolated.properties,
        dependencies=filled,
        dependency_management=interpolated.dependency_management,
        modules=interpolated.modules,
        plugins=interpolated.plugins,
        source_xml=model.source_xml,
    )


# --- serialization back to XML ---


def _append(parent: ET.Element, tag: str, text: str | None = None) -> ET.Element:
    el = ET.SubElement(parent, tag)
    if text is not None:
        el.text = text
    return el


def _dependency_element(parent: ET.Element, decl: DependencyDecl) -> ET.Element:
    el = _append(parent, "dependency")
    _append(el, "groupId", decl.group_id)
    _append(el, "artifactId", decl.artifact_id)
    if decl.version_spec is not None:
        _append(el, "version", decl.version_spec.text)
    if decl.packaging != "jar":
        _append(el, "type", decl.packaging)
    if decl.classifier:
        _append(el, "classifier", decl.classifier)
    if decl.scope_explicit:
        _append(el, "scope", decl.scope)
    if decl.optional_flag:
        _append(el, "optional", "true")
    if decl.exclusions:
        excl_el = _append(el, "exclusions")
        for eg, ea in decl.exclusions:
            e = _append(excl_el, "exclusion")
            _append(e, "groupId", eg)
            _append(e, "artifactId", ea)
    return el


def indent_tree(element: ET.Element, level: int = 0) -> None:
    """Two-space pretty indentation, in place."""
    pad = "\n" + "  " * level
    if len(element):
        if not (element.text or "").strip():
            element.text = pad + "  "
        for child in element:
            indent_tree(child, level + 1)
            if not (child.tail or "").strip():
                child.tail = pad + "  "
        if not (element[-1].tail or "").strip():
            element[-1].tail = pad
    if level == 0:
        element.tail = "\n"


def pom_to_xml(model: PomModel) -> str:
    """Serialize a model to manifest XML (loses elements the parser ignores)."""
    root = ET.Element("project")
    _append(root, "modelVersion", "4.0.0")
    if model.parent is not None:
        parent_el = _append(root, "parent")
        _append(parent_el, "groupId", model.parent.group_id)
        _append(parent_el, "artifactId", model.parent.artifact_id)
        _append(parent_el, "version", model.parent.version)
    if model.group_id:
        _append(root, "groupId", model.group_id)
    _append(root, "artifactId", model.artifact_id)
    if model.version:
        _append(root, "version", model.version)
    if model.packaging != "jar":
        _append(root, "packaging", model.packaging)
    if model.properties:
        props_el = _append(root, "properties")
        for name, value in model.properties.items():
            _append(props_el, name, value)
    if model.modules:
        modules_el = _append(root, "modules")
        for path in model.modules:
            _append(modules_el, "module", path)
    if model.dependency_management:
        dm_el = _append(root, "dependencyManagement")
        deps_el = _append(dm_el, "dependencies")
        for decl in model.dependency_management:
            _dependency_element(deps_el, decl)
    if model.dependencies:
        deps_el = _append(root, "dependencies")
        for decl in model.dependencies:
            _dependency_element(deps_el, decl)
    if model.plugins:
        build_el = _append(root, "build")
        plugins_el = _append(build_el, "plugins")
        for plugin in model.plugins:
            plugin_el = _append(plugins_el, "plugin")
            _append(plugin_el, "groupId", plugin.group_id)
            _append(plugin_el, "artifactId", plugin.artifact_id)
            if plugin.version:
                _append(plugin_el, "version", plugin.version)
    indent_tree(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode")
