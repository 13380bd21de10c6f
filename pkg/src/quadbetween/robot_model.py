"""URDF-subset robot description parsing and the canonical 12-joint quadruped model.

Only the subset needed downstream is parsed: links, revolute joints (origin,
axis, limits) and fixed joints (used as foot-frame attachments). Everything
else is ignored with a warning. Joint ordering is canonical:

    FL_hip, FL_thigh, FL_calf, FR_..., RL_..., RR_...

and is established by a sidecar configuration that maps joint names to slots
(URDF itself carries no ordering). The sidecar also names the four foot links
and the default pose, neither of which URDF standardizes.
"""

from __future__ import annotations

import json
import math
import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import torch

from .errors import QuadbetweenError
from .rotations import quat_from_rpy

LEGS = ("FL", "FR", "RL", "RR")
LEG_JOINTS = ("hip", "thigh", "calf")
NUM_JOINTS = len(LEGS) * len(LEG_JOINTS)

_KNOWN_URDF_TAGS = {"robot", "link", "joint", "origin", "axis", "limit", "parent", "child"}


class MalformedDocument(QuadbetweenError):
    """URDF text is not well-formed XML or misses required elements."""


class UnsupportedJointType(QuadbetweenError):
    """An actuated joint is not revolute."""


class MissingLimit(QuadbetweenError):
    """A revolute joint lacks a limit element, or its limits are invalid."""


class CyclicTree(QuadbetweenError):
    """The link/joint graph is not a single-rooted tree."""


@dataclass(frozen=True, eq=False)
class JointSpec:
    """One revolute joint: attachment transform, axis, and hardware limits."""

    name: str
    parent_link: str
    child_link: str
    origin_translation: np.ndarray  # (3,) m
    origin_rotation: np.ndarray  # (4,) xyzw, unit
    axis: np.ndarray  # (3,) unit
    lower_limit: float  # rad
    upper_limit: float  # rad
    velocity_limit: float  # rad/s
    effort_limit: float  # N*m

    def validate(self) -> None:
        if not self.lower_limit <= self.upper_limit:
            raise MissingLimit(
                f"joint {self.name!r}: lower limit {self.lower_limit} > upper {self.upper_limit}"
            )
        if abs(np.linalg.norm(self.axis) - 1.0) > 1e-9:
            raise MalformedDocument(f"joint {self.name!r}: axis is not unit length")
        if abs(np.linalg.norm(self.origin_rotation) - 1.0) > 1e-9:
            raise MalformedDocument(f"joint {self.name!r}: origin rotation is not unit")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JointSpec):
            return NotImplemented
        return (
            self.name == other.name
            and self.parent_link == other.parent_link
            and self.child_link == other.child_link
            and np.array_equal(self.origin_translation, other.origin_translation)
            and np.array_equal(self.origin_rotation, other.origin_rotation)
            and np.array_equal(self.axis, other.axis)
            and self.lower_limit == other.lower_limit
            and self.upper_limit == other.upper_limit
            and self.velocity_limit == other.velocity_limit
            and self.effort_limit == other.effort_limit
        )


@dataclass(frozen=True, eq=False)
class FootSpec:
    """Foot contact frame: a point offset rigidly attached to a calf link."""

    link: str
    parent_link: str
    offset: np.ndarray  # (3,) m, in the parent (calf) frame

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FootSpec):
            return NotImplemented
        return (
            self.link == other.link
            and self.parent_link == other.parent_link
            and np.array_equal(self.offset, other.offset)
        )


@dataclass(frozen=True, eq=False)
class RobotModel:
    """Kinematic model: 12 revolute joints in canonical leg order plus foot frames."""

    name: str
    root_link: str
    joints: tuple[JointSpec, ...]
    feet: tuple[FootSpec, ...]
    default_pose: np.ndarray  # (12,) rad

    @property
    def joint_names(self) -> tuple[str, ...]:
        return tuple(j.name for j in self.joints)

    @property
    def foot_links(self) -> tuple[str, ...]:
        return tuple(f.link for f in self.feet)

    @property
    def foot_offsets(self) -> np.ndarray:
        return np.stack([f.offset for f in self.feet])

    @property
    def lower_limits(self) -> np.ndarray:
        return np.array([j.lower_limit for j in self.joints])

    @property
    def upper_limits(self) -> np.ndarray:
        return np.array([j.upper_limit for j in self.joints])

    @property
    def velocity_limits(self) -> np.ndarray:
        return np.array([j.velocity_limit for j in self.joints])

    @property
    def effort_limits(self) -> np.ndarray:
        return np.array([j.effort_limit for j in self.joints])

    def validate(self) -> None:
        if len(self.joints) != NUM_JOINTS:
            raise MalformedDocument(f"expected {NUM_JOINTS} actuated joints, got {len(self.joints)}")
        for j in self.joints:
            j.validate()
        if len(self.feet) != len(LEGS):
            raise MalformedDocument(f"expected {len(LEGS)} foot links, got {len(self.feet)}")
        _check_tree(self)
        pose = np.asarray(self.default_pose, dtype=float)
        if pose.shape != (NUM_JOINTS,):
            raise MalformedDocument("default_pose must have 12 entries")
        if np.any(pose < self.lower_limits - 1e-12) or np.any(pose > self.upper_limits + 1e-12):
            raise MissingLimit("default_pose violates joint limits")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RobotModel):
            return NotImplemented
        return (
            self.name == other.name
            and self.root_link == other.root_link
            and self.joints == other.joints
            and self.feet == other.feet
            and np.array_equal(self.default_pose, other.default_pose)
        )


@dataclass(frozen=True)
class RobotConfig:
    """Sidecar configuration: canonical joint slots, foot links, default pose."""

    joint_order: tuple[str, ...]
    foot_links: tuple[str, ...]
    default_pose: tuple[float, ...]
    name: str = "quadruped"

    @staticmethod
    def from_json(path: str | Path) -> "RobotConfig":
        data = json.loads(Path(path).read_text())
        return RobotConfig(
            joint_order=tuple(data["joint_order"]),
            foot_links=tuple(data["foot_links"]),
            default_pose=tuple(float(v) for v in data["default_pose"]),
            name=data.get("name", "quadruped"),
        )


def _parse_vector(text: str | None, default: str) -> np.ndarray:
    parts = (text or default).split()
    return np.array([float(p) for p in parts], dtype=np.float64)


def _check_tree(model: RobotModel) -> None:
    """Single root, acyclic, feet are leaves."""
    edges: list[tuple[str, str]] = [(j.parent_link, j.child_link) for j in model.joints]
    edges += [(f.parent_link, f.link) for f in model.feet]
    children = [c for _, c in edges]
    if len(set(children)) != len(children):
        raise CyclicTree("a link is the child of more than one joint")
    links = set(children) | {p for p, _ in edges}
    roots = links - set(children)
    if len(roots) != 1:
        raise CyclicTree(f"kinematic tree must have exactly one root link, found {sorted(roots)}")
    (root,) = roots
    if root != model.root_link:
        raise CyclicTree(f"declared root {model.root_link!r} is not the graph root {root!r}")
    # walk up from every link; a cycle would never reach the root
    parent_of = {c: p for p, c in edges}
    for link in links:
        seen = set()
        cur = link
        while cur != root:
            if cur in seen:
                raise CyclicTree(f"cycle through link {cur!r}")
            seen.add(cur)
            cur = parent_of[cur]
    parents = {p for p, _ in edges}
    for f in model.feet:
        if f.link in parents:
            raise CyclicTree(f"foot link {f.link!r} is not a leaf")


def parse_urdf(document: str, config: RobotConfig | None = None) -> RobotModel:
    """Parse a URDF-subset robot description into a :class:`RobotModel`.

    ``config`` supplies the canonical joint ordering, foot link names and the
    default pose; when omitted, joints are matched to slots by the
    ``<leg>_<part>`` naming convention and the default pose is the limit
    midpoint.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise MalformedDocument(f"not well-formed XML: {exc}") from exc
    if root.tag != "robot":
        raise MalformedDocument(f"expected <robot> document, got <{root.tag}>")

    ignored: set[str] = set()
    links: list[str] = []
    revolute: dict[str, JointSpec] = {}
    fixed: list[tuple[str, str, str, np.ndarray]] = []  # (name, parent, child, translation)

    for child in root:
        if child.tag == "link":
            name = child.get("name")
            if not name:
                raise MalformedDocument("link without a name")
            links.append(name)
            ignored.update(g.tag for g in child if g.tag not in _KNOWN_URDF_TAGS)
        elif child.tag == "joint":
            spec = _parse_joint(child)
            if isinstance(spec, JointSpec):
                revolute[spec.name] = spec
            else:
                fixed.append(spec)
            ignored.update(
                g.tag for g in child if g.tag not in _KNOWN_URDF_TAGS
            )
        else:
            ignored.add(child.tag)

    for tag in sorted(ignored):
        warnings.warn(f"ignoring unsupported URDF tag <{tag}>", stacklevel=2)

    if config is None:
        config = _infer_config(revolute, fixed)

    missing = [n for n in config.joint_order if n not in revolute]
    if missing:
        raise MalformedDocument(f"configured joints missing from document: {missing}")
    joints = tuple(revolute[n] for n in config.joint_order)

    fixed_by_child = {c: (p, t) for _, p, c, t in fixed}
    feet = []
    for foot in config.foot_links:
        if foot not in fixed_by_child:
            raise MalformedDocument(f"foot link {foot!r} has no fixed attachment joint")
        parent, translation = fixed_by_child[foot]
        feet.append(FootSpec(link=foot, parent_link=parent, offset=translation))

    model = RobotModel(
        name=root.get("name", config.name),
        root_link=_find_root(joints, feet),
        joints=joints,
        feet=tuple(feet),
        default_pose=np.asarray(config.default_pose, dtype=np.float64),
    )
    model.validate()
    return model


def _parse_joint(el: ET.Element):
    name = el.get("name")
    jtype = el.get("type")
    if not name:
        raise MalformedDocument("joint without a name")
    parent = el.find("parent")
    child = el.find("child")
    if parent is None or child is None:
        raise MalformedDocument(f"joint {name!r}: missing parent/child")
    origin = el.find("origin")
    xyz = _parse_vector(origin.get("xyz") if origin is not None else None, "0 0 0")
    rpy = _parse_vector(origin.get("rpy") if origin is not None else None, "0 0 0")
    if jtype == "fixed":
        if np.any(rpy != 0.0):
            raise UnsupportedJointType(f"fixed joint {name!r}: rotated foot frames unsupported")
        return (name, parent.get("link"), child.get("link"), xyz)
    if jtype != "revolute":
        raise UnsupportedJointType(f"joint {name!r} has type {jtype!r}; only revolute/fixed supported")
    axis_el = el.find("axis")
    axis = _parse_vector(axis_el.get("xyz") if axis_el is not None else None, "1 0 0")
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        raise MalformedDocument(f"joint {name!r}: zero axis")
    axis = axis / norm
    limit = el.find("limit")
    if limit is None or limit.get("lower") is None or limit.get("upper") is None:
        raise MissingLimit(f"revolute joint {name!r} lacks lower/upper limits")
    spec = JointSpec(
        name=name,
        parent_link=parent.get("link"),
        child_link=child.get("link"),
        origin_translation=xyz,
        origin_rotation=quat_from_rpy(*rpy).numpy(),
        axis=axis,
        lower_limit=float(limit.get("lower")),
        upper_limit=float(limit.get("upper")),
        velocity_limit=float(limit.get("velocity", math.inf)),
        effort_limit=float(limit.get("effort", math.inf)),
    )
    spec.validate()
    return spec


def _infer_config(revolute: Mapping[str, JointSpec], fixed) -> RobotConfig:
    order = []
    for leg in LEGS:
        for part in LEG_JOINTS:
            matches = [n for n in revolute if leg in n and part in n]
            if len(matches) != 1:
                raise MalformedDocument(
                    f"cannot infer joint order: {len(matches)} candidates for {leg} {part}"
                )
            order.append(matches[0])
    feet = []
    for leg in LEGS:
        matches = [c for _, _, c, _ in fixed if leg in c]
        if len(matches) != 1:
            raise MalformedDocument(f"cannot infer foot link for leg {leg}")
        feet.append(matches[0])
    default = [
        0.5 * (revolute[n].lower_limit + revolute[n].upper_limit) for n in order
    ]
    return RobotConfig(joint_order=tuple(order), foot_links=tuple(feet), default_pose=tuple(default))


def _find_root(joints: Iterable[JointSpec], feet: Iterable[FootSpec]) -> str:
    children = {j.child_link for j in joints} | {f.link for f in feet}
    parents = {j.parent_link for j in joints} | {f.parent_link for f in feet}
    roots = parents - children
    if len(roots) != 1:
        raise CyclicTree(f"kinematic tree must have exactly one root link, found {sorted(roots)}")
    return roots.pop()


def serialize_urdf(model: RobotModel) -> str:
    """Write the parsed subset back out as URDF text (parse round-trip safe)."""

    def fmt(values: Sequence[float]) -> str:
        return " ".join(repr(float(v)) for v in values)

    lines = [f'<robot name="{model.name}">']
    link_names = [model.root_link]
    link_names += [j.child_link for j in model.joints]
    link_names += [f.link for f in model.feet]
    for name in link_names:
        lines.append(f'  <link name="{name}"/>')
    for j in model.joints:
        rpy = _rpy_of_quat(j.origin_rotation)
        lines.append(f'  <joint name="{j.name}" type="revolute">')
        lines.append(f'    <parent link="{j.parent_link}"/>')
        lines.append(f'    <child link="{j.child_link}"/>')
        lines.append(f'    <origin xyz="{fmt(j.origin_translation)}" rpy="{fmt(rpy)}"/>')
        lines.append(f'    <axis xyz="{fmt(j.axis)}"/>')
        lines.append(
            f'    <limit lower="{j.lower_limit!r}" upper="{j.upper_limit!r}"'
            f' velocity="{j.velocity_limit!r}" effort="{j.effort_limit!r}"/>'
        )
        lines.append("  </joint>")
    for f in model.feet:
        lines.append(f'  <joint name="{f.link}_fixed" type="fixed">')
        lines.append(f'    <parent link="{f.parent_link}"/>')
        lines.append(f'    <child link="{f.link}"/>')
        lines.append(f'    <origin xyz="{fmt(f.offset)}" rpy="0 0 0"/>')
        lines.append("  </joint>")
    lines.append("</robot>")
    return "\n".join(lines) + "\n"


def _rpy_of_quat(q: np.ndarray) -> np.ndarray:
    x, y, z, w = q
    roll = math.atan2(2 * (w * x + y * z), 1 - 2 * (x * x + y * y))
    pitch = math.asin(max(-1.0, min(1.0, 2 * (w * y - z * x))))
    yaw = math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z))
    return np.array([roll, pitch, yaw])


def clamp_to_limits(pose: np.ndarray, model: RobotModel) -> np.ndarray:
    """Clamp a 12-vector of joint angles into the model's limit box."""
    pose = np.asarray(pose, dtype=np.float64)
    return np.clip(pose, model.lower_limits, model.upper_limits)


def load_robot(urdf_path: str | Path, config_path: str | Path | None = None) -> RobotModel:
    config = RobotConfig.from_json(config_path) if config_path is not None else None
    return parse_urdf(Path(urdf_path).read_text(), config=config)


def default_robot() -> RobotModel:
    """The packaged A1-like quadruped with its sidecar configuration."""
    pkg = resources.files("quadbetween.assets")
    document = (pkg / "a1like.urdf").read_text()
    config = json.loads((pkg / "a1like_config.json").read_text())
    return parse_urdf(
        document,
        config=RobotConfig(
            joint_order=tuple(config["joint_order"]),
            foot_links=tuple(config["foot_links"]),
            default_pose=tuple(config["default_pose"]),
            name=config.get("name", "a1like"),
        ),
    )


def default_robot_paths() -> tuple[Path, Path]:
    """Filesystem paths of the packaged URDF and sidecar config."""
    pkg = resources.files("quadbetween.assets")
    return Path(str(pkg / "a1like.urdf")), Path(str(pkg / "a1like_config.json"))
