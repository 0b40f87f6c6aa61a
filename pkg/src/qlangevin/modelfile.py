"""Module reading and writing JSON model files."""

import json
from pathlib import Path

import numpy as np

from qlangevin.errors import ValidationError
from qlangevin.logs import get_logger
from qlangevin.model import BathSpec, ModelSpec, SystemSpec, gibbs_weights, ladder_couplings

logger = get_logger(__name__)


def _parse_matrix(rows, dim: int, name: str) -> np.ndarray:
    try:
        m = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"{name} must be a matrix of [re, im] pairs: {e}") from e
    if m.shape != (dim, dim):
        raise ValidationError(f"{name} has shape {m.shape}, expected ({dim}, {dim})")
    return m


def _format_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def model_from_dict(data: dict) -> ModelSpec:
    """
    Builds a ModelSpec from the parsed model-file structure.

    :param data: Mapping with "system", "bath" and optional "coupling" sections.
    :return: A validated ModelSpec.
    :raises ValidationError: On missing keys or malformed values.
    """
    try:
        system = data["system"]
        bath = data["bath"]
        dim = int(system["dim"])
        gamma = [float(g) for g in bath["gamma"]]
        state = bath["state"]
        state_type = state.get("type")
        coupling_type = data.get("coupling", {}).get("type", "explicit")
        h_s_rows = system.get("H_S", [[[0.0, 0.0]] * dim] * dim)
        has_v = "V" in system
        v_rows = list(system.get("V", []))
        if state_type == "gibbs":
            beta = float(state["beta"])
        elif state_type == "weights":
            weights = [float(w) for w in state["weights"]]
    except (KeyError, TypeError, AttributeError, ValueError) as e:
        raise ValidationError(f"Malformed model file: missing or invalid {e}") from e

    h_s = _parse_matrix(h_s_rows, dim, "H_S")

    if coupling_type == "ladder":
        couplings = ladder_couplings(dim)
    elif coupling_type == "explicit":
        if not has_v:
            raise ValidationError("explicit coupling requires system.V")
        couplings = [_parse_matrix(v, dim, f"V_{i}") for i, v in enumerate(v_rows, start=1)]
    else:
        raise ValidationError(f"Unknown coupling type {coupling_type!r}")

    if state_type == "gibbs":
        bath_spec = BathSpec(gamma=gamma, weights=gibbs_weights(gamma, beta), beta=beta)
    elif state_type == "weights":
        bath_spec = BathSpec(gamma=gamma, weights=weights)
    else:
        raise ValidationError(f"Unknown bath state type {state_type!r}")

    return ModelSpec(SystemSpec(h_s, tuple(couplings)), bath_spec)


def model_to_dict(model: ModelSpec) -> dict:
    if model.bath.beta is not None:
        state = {"type": "gibbs", "beta": model.bath.beta}
    else:
        state = {"type": "weights", "weights": model.bath.weights.tolist()}
    return {
        "system": {
            "dim": model.d,
            "H_S": _format_matrix(model.system.H_S),
            "V": [_format_matrix(v) for v in model.system.V],
        },
        "bath": {"gamma": model.bath.gamma.tolist(), "state": state},
        "coupling": {"type": "explicit"},
    }


def load_model(path: str | Path) -> ModelSpec:
    """
    Loads a model file.

    :param path: Path to a JSON model file.
    :return: The validated ModelSpec.
    :raises ValidationError: If the file is unreadable or malformed.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ValidationError(f"Cannot read model file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"Model file {path} is not valid JSON: {e}") from e

    model = model_from_dict(data)
    logger.info(f"Loaded model from {path}: d={model.d}, N={model.N}")
    return model


def dump_model(model: ModelSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2), encoding="utf-8")
    logger.info(f"Model written to {path}")
