"""JSON ingestion of transition spectra and CP-perturbed level systems.

Spectrum file::

    {"name": "...", "class": "generic" | "cp" | "chiral",
     "units": {"dipole": "e_a0" | "C_m", "magnetic": "mu_B" | "J_per_T",
               "frequency": "eV" | "rad_per_s"},
     "transitions": [{"omega": w, "d_re": [x, y, z], "d_im": [...],
                      "m_re": [...], "m_im": [...]}, ...]}

``d_im``, ``m_re`` and ``m_im`` default to zero vectors.

Level-system file (``"kind": "cp_system"``)::

    {"kind": "cp_system", "name": "...",
     "units": {... as above ..., "energy": "eV" | "J"},
     "energies": [0, w1, ...],
     "d0_re": N x N x 3, "d0_im": N x N x 3, "m0_re": ..., "m0_im": ...,
     "vcp_re": N x N, "vcp_im": N x N}

``energies`` use the frequency unit, ``vcp`` the energy unit; missing
imaginary parts default to zero.
"""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .molecule import CPSystem, MoleculeError, MoleculeSpectrum, Transition
from .units import convert_dipole, convert_energy, convert_frequency, convert_magnetic

_VEC = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_UNITS = {
    "dipole": {"enum": ["e_a0", "C_m"]},
    "magnetic": {"enum": ["mu_B", "J_per_T"]},
    "frequency": {"enum": ["eV", "rad_per_s"]},
}

SPECTRUM_SCHEMA = {
    "type": "object",
    "required": ["units", "class", "transitions"],
    "additionalProperties": False,
    "properties": {
        "kind": {"const": "spectrum"},
        "name": {"type": "string"},
        "class": {"enum": ["generic", "cp", "chiral"]},
        "units": {
            "type": "object",
            "required": ["dipole", "magnetic", "frequency"],
            "additionalProperties": False,
            "properties": _UNITS,
        },
        "transitions": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["omega", "d_re"],
                "additionalProperties": False,
                "properties": {
                    "omega": {"type": "number", "exclusiveMinimum": 0},
                    "d_re": _VEC, "d_im": _VEC, "m_re": _VEC, "m_im": _VEC,
                },
            },
        },
    },
}

_MAT = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_TENSOR = {"type": "array", "items": {"type": "array", "items": _VEC}}

SYSTEM_SCHEMA = {
    "type": "object",
    "required": ["kind", "units", "energies", "d0_re", "m0_re"],
    "additionalProperties": False,
    "properties": {
        "kind": {"const": "cp_system"},
        "name": {"type": "string"},
        "units": {
            "type": "object",
            "required": ["dipole", "magnetic", "frequency", "energy"],
            "additionalProperties": False,
            "properties": dict(_UNITS, energy={"enum": ["eV", "J"]}),
        },
        "energies": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "d0_re": _TENSOR, "d0_im": _TENSOR, "m0_re": _TENSOR, "m0_im": _TENSOR,
        "vcp_re": _MAT, "vcp_im": _MAT,
    },
}


class SchemaError(ValueError):
    """Input document violates the schema; ``path`` locates the failing field."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path or '<root>'}: {message}")
        self.path = path


def _validate(doc, schema):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise SchemaError(err.message, "/".join(str(p) for p in err.absolute_path))


def _complex(doc, key, scale, shape):
    re = np.asarray(doc[key + "_re"], dtype=float) if key + "_re" in doc else np.zeros(shape)
    im = np.asarray(doc[key + "_im"], dtype=float) if key + "_im" in doc else np.zeros(shape)
    if re.shape != shape or im.shape != shape:
        raise SchemaError(f"expected shape {shape}, got {re.shape} / {im.shape}", key)
    return scale * (re + 1j * im)


def spectrum_from_dict(doc: dict) -> MoleculeSpectrum:
    _validate(doc, SPECTRUM_SCHEMA)
    u = doc["units"]
    sd = convert_dipole(1.0, u["dipole"])
    sm = convert_magnetic(1.0, u["magnetic"])
    transitions = []
    for i, t in enumerate(doc["transitions"]):
        d = sd * (np.asarray(t["d_re"], float) + 1j * np.asarray(t.get("d_im", [0, 0, 0]), float))
        m = sm * (np.asarray(t.get("m_re", [0, 0, 0]), float) + 1j * np.asarray(t.get("m_im", [0, 0, 0]), float))
        try:
            transitions.append(Transition(convert_frequency(t["omega"], u["frequency"]), d, m))
        except MoleculeError as exc:
            raise SchemaError(str(exc), f"transitions/{i}") from None
    return MoleculeSpectrum(transitions, doc["class"], doc.get("name", ""))


def system_from_dict(doc: dict) -> CPSystem:
    _validate(doc, SYSTEM_SCHEMA)
    u = doc["units"]
    w = np.array([convert_frequency(x, u["frequency"]) for x in doc["energies"]])
    n = len(w)
    d0 = _complex(doc, "d0", convert_dipole(1.0, u["dipole"]), (n, n, 3))
    m0 = _complex(doc, "m0", convert_magnetic(1.0, u["magnetic"]), (n, n, 3))
    vcp = _complex(doc, "vcp", convert_energy(1.0, u["energy"]), (n, n))
    return CPSystem(w, d0, m0, vcp, doc.get("name", ""))


def molecule_from_dict(doc: dict):
    """Spectrum or level system, dispatched on ``kind`` (default: spectrum)."""
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object", "")
    if doc.get("kind") == "cp_system":
        return system_from_dict(doc)
    return spectrum_from_dict(doc)


def load_molecule(path: str | Path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg} (line {exc.lineno})", "") from None
    return molecule_from_dict(doc)


def spectrum_to_dict(spec: MoleculeSpectrum) -> dict:
    """SI-unit document that round-trips through :func:`spectrum_from_dict`."""
    return {
        "name": spec.name,
        "class": spec.symmetry_class,
        "units": {"dipole": "C_m", "magnetic": "J_per_T", "frequency": "rad_per_s"},
        "transitions": [
            {
                "omega": t.omega,
                "d_re": t.d.real.tolist(), "d_im": t.d.imag.tolist(),
                "m_re": t.m.real.tolist(), "m_im": t.m.imag.tolist(),
            }
            for t in spec.transitions
        ],
    }
