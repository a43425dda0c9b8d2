"""Riemann matrix files: tau, optional period matrix Pi_a and sample points of the canonical curve."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .theta import RiemannMatrix

BUNDLED = ("trott_tau.json", "genus4_tau.json", "genus5_tau.json")


class FixtureError(ValueError):
    pass


def _complex_matrix(re, im, shape, what) -> np.ndarray:
    try:
        M = np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FixtureError(f"{what}: {exc}") from exc
    if M.shape != shape:
        raise FixtureError(f"{what} has shape {M.shape}, expected {shape}")
    return M


@dataclass
class TauFile:
    genus: int
    tau: np.ndarray
    pi_a: np.ndarray | None = None
    sample_points: list[np.ndarray] = field(default_factory=list)
    label: str = ""

    @classmethod
    def from_dict(cls, doc: dict) -> "TauFile":
        if not isinstance(doc, dict):
            raise FixtureError("top level must be a JSON object")
        try:
            g = int(doc["genus"])
            tau = _complex_matrix(doc["re"], doc["im"], (g, g), "tau")
        except KeyError as exc:
            raise FixtureError(f"missing field {exc}") from exc
        pi_a = None
        if doc.get("pi_a") is not None:
            pa = doc["pi_a"]
            pi_a = _complex_matrix(pa.get("re"), pa.get("im"), (g, g), "pi_a")
        points = []
        for k, pt in enumerate(doc.get("sample_points") or []):
            v = np.asarray(pt["re"], dtype=float) + 1j * np.asarray(pt["im"], dtype=float)
            if v.shape != (g,):
                raise FixtureError(f"sample point {k} has shape {v.shape}, expected ({g},)")
            points.append(v)
        return cls(g, tau, pi_a, points, str(doc.get("label", "")))

    def to_dict(self) -> dict:
        doc = {"label": self.label, "genus": self.genus, "re": self.tau.real.tolist(), "im": self.tau.imag.tolist()}
        if self.pi_a is not None:
            doc["pi_a"] = {"re": self.pi_a.real.tolist(), "im": self.pi_a.imag.tolist()}
        if self.sample_points:
            doc["sample_points"] = [{"re": p.real.tolist(), "im": p.imag.tolist()} for p in self.sample_points]
        return doc

    def riemann_matrix(self) -> RiemannMatrix:
        return RiemannMatrix(self.tau)

    @property
    def to_user(self) -> np.ndarray | None:
        """Matrix A with q(A u) expressing a normalized-coordinate form in the user's differentials."""
        return None if self.pi_a is None else np.linalg.inv(self.pi_a)


def read_json(path) -> dict:
    """Load a JSON file, falling back to the bundled fixtures by file name."""
    p = Path(path)
    if not p.exists() and p.name in BUNDLED and str(path) == p.name:
        return json.loads(resources.files("torelli.data").joinpath(p.name).read_text(encoding="utf-8"))
    with open(p, encoding="utf-8") as fh:
        return json.load(fh)


def load_tau_file(path) -> TauFile:
    return TauFile.from_dict(read_json(path))


def bundled(name: str) -> TauFile:
    """One of trott, genus4, genus5."""
    fname = name if name.endswith(".json") else f"{name}_tau.json"
    if fname not in BUNDLED:
        raise FixtureError(f"no bundled fixture {name!r}")
    return load_tau_file(fname)
