"""Strict JSON ingestion and emission of game files.

Schema (matrices are arrays of rows; player indices are 1-based in files
and 0-based in memory)::

    {
      "n": 2,
      "A": [[0.0, 1.0], [0.0, 0.0]],
      "players": [
        {"B": [[1.0], [0.0]], "Q": [[1.0, 0.0], [0.0, 1.0]],
         "R": {"1": [[1.0]], "2": [[0.0]]}},
        ...
      ],
      "potential": {"Qp": [[...]], "Rp": [[...]]},   # optional
      "label": "name"                                 # optional
    }

Parsing is strict: unknown keys are rejected, every matrix must be a
rectangular array of finite numbers, and errors carry the offending field
path (or the line/column for JSON syntax errors). Silent typos in penalty
matrices corrupt experiments, so nothing is coerced quietly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import GameFileError
from .games import GameSpec, PlayerSpec, PotentialSpec, make_potential

_TOP_KEYS = {"n", "A", "players", "potential", "label"}
_PLAYER_KEYS = {"B", "Q", "R"}
_POTENTIAL_KEYS = {"Qp", "Rp"}


def _require_keys(doc: dict, allowed: set[str], required: set[str], path: str):
    if not isinstance(doc, dict):
        raise GameFileError(f"{path}: expected an object, got {type(doc).__name__}")
    unknown = set(doc) - allowed
    if unknown:
        raise GameFileError(f"{path}: unknown key(s) {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise GameFileError(f"{path}: missing key(s) {sorted(missing)}")


def _parse_matrix(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise GameFileError(f"{path}: expected a non-empty array of rows")
    widths = {len(r) for r in value}
    if len(widths) != 1 or 0 in widths:
        raise GameFileError(f"{path}: rows have inconsistent or zero lengths")
    for r in value:
        for entry in r:
            if isinstance(entry, bool) or not isinstance(entry, (int, float)):
                raise GameFileError(f"{path}: matrix entries must be numbers")
    m = np.array(value, dtype=float)
    if not np.all(np.isfinite(m)):
        raise GameFileError(f"{path}: matrix entries must be finite")
    return m


def parse_game(doc, source: str = "<memory>") -> tuple[GameSpec, PotentialSpec | None]:
    """Turn a decoded JSON document into specs; raises GameFileError."""
    _require_keys(doc, _TOP_KEYS, {"n", "A", "players"}, source)
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise GameFileError(f"{source}.n: expected a positive integer")
    a = _parse_matrix(doc["A"], f"{source}.A")
    if not isinstance(doc["players"], list) or not doc["players"]:
        raise GameFileError(f"{source}.players: expected a non-empty array")
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise GameFileError(f"{source}.label: expected a string")

    n_players = len(doc["players"])
    players = []
    for idx, pdoc in enumerate(doc["players"]):
        base = f"{source}.players[{idx}]"
        _require_keys(pdoc, _PLAYER_KEYS, _PLAYER_KEYS, base)
        b = _parse_matrix(pdoc["B"], f"{base}.B")
        q = _parse_matrix(pdoc["Q"], f"{base}.Q")
        rdoc = pdoc["R"]
        if not isinstance(rdoc, dict):
            raise GameFileError(f"{base}.R: expected an object mapping player index to matrix")
        r = {}
        for key, rmat in rdoc.items():
            try:
                j = int(key)
            except (TypeError, ValueError):
                raise GameFileError(f"{base}.R: key {key!r} is not a player index") from None
            if not (1 <= j <= n_players):
                raise GameFileError(f"{base}.R: player index {j} out of range 1..{n_players}")
            r[j - 1] = _parse_matrix(rmat, f"{base}.R[{key}]")
        players.append(PlayerSpec(B=b, Q=q, R=r))

    game = GameSpec(n=n, A=a, players=tuple(players), label=label)

    potential = None
    if "potential" in doc:
        base = f"{source}.potential"
        _require_keys(doc["potential"], _POTENTIAL_KEYS, _POTENTIAL_KEYS, base)
        qp = _parse_matrix(doc["potential"]["Qp"], f"{base}.Qp")
        rp = _parse_matrix(doc["potential"]["Rp"], f"{base}.Rp")
        try:
            potential = make_potential(game, qp, rp)
        except ValueError as exc:
            raise GameFileError(f"{base}: {exc}") from None
    return game, potential


def load_game(path) -> tuple[GameSpec, PotentialSpec | None]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GameFileError(f"{path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFileError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_game(doc, source=str(path))


def game_to_doc(game: GameSpec, potential: PotentialSpec | None = None) -> dict:
    doc = {
        "n": game.n,
        "A": game.A.tolist(),
        "players": [
            {
                "B": pl.B.tolist(),
                "Q": pl.Q.tolist(),
                "R": {str(j + 1): r.tolist() for j, r in sorted(pl.R.items())},
            }
            for pl in game.players
        ],
    }
    if game.label is not None:
        doc["label"] = game.label
    if potential is not None:
        doc["potential"] = {"Qp": potential.Qp.tolist(), "Rp": potential.Rp.tolist()}
    return doc


def save_game(path, game: GameSpec, potential: PotentialSpec | None = None):
    doc = game_to_doc(game, potential)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
