"""Model configuration files.

One self-describing TOML format covers every model the package handles.
Words are written newest-letter-first and the file says so explicitly
(`orientation = "left-growth"`), so there is no silent reversal between
configs and the library. `emit` produces a canonical form: parsing and
re-emitting any accepted file is byte-stable.

Schema (all words over `alphabet`, probabilities in alphabet order)::

    schema = "vlmc-walks/1"
    orientation = "left-growth"
    alphabet = "du"
    init = "du"
    seed = 1234                      # optional

    [tree]
    kind = "comb"                    # "comb" | "explicit"
    leaves = ["10", "000", ...]      # explicit trees only

    [q.comb.ud]                      # rule for runs of 'u' entered after 'd'
    tail = "geometric"               # "geometric" | "polynomial" | "table"
    p = 0.5                          # geometric; polynomial uses c = ...
    entries = [0.5, 0.25]            # table only
    fallback = { tail = "geometric", p = 0.5 }   # table only
    switch_weights = { d = 1.0 }
    nullable = false                 # optional

    [q.explicit]
    "10" = [0.5, 0.5]

    [policy]                         # optional
    max_terms = 1000000
    abs_tol = 1e-12
    divergence_threshold = 1e9
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import tomli

from .cascades import SeriesPolicy
from .errors import ConfigError, InternalWord, VlmcError
from .process import CombModel, ExplicitModel, ProbabilizedTree
from .tails import Geometric, Polynomial, Table, TailRule
from .trees import Alphabet, CombTree, build_explicit_tree

SCHEMA = "vlmc-walks/1"
ORIENTATION = "left-growth"


@dataclass
class ModelConfig:
    alphabet: str
    init: str
    tree_kind: str                        # "comb" | "explicit"
    leaves: list[str] = field(default_factory=list)
    comb_rules: dict[str, dict] = field(default_factory=dict)   # "ud" -> rule spec
    q_explicit: dict[str, list[float]] = field(default_factory=dict)
    policy: SeriesPolicy = field(default_factory=SeriesPolicy)
    seed: int | None = None

    def canonical_text(self) -> str:
        return emit_model_config(self)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]

    def build_model(self) -> ProbabilizedTree:
        alphabet = Alphabet(self.alphabet)
        if self.tree_kind == "comb":
            rules = {}
            for pair, spec in self.comb_rules.items():
                rules[(pair[0], pair[1])] = _build_rule(pair, spec)
            try:
                model = CombModel(CombTree(alphabet), rules)
            except VlmcError as exc:
                raise ConfigError("q.comb", str(exc)) from exc
        else:
            try:
                tree = build_explicit_tree(alphabet, self.leaves)
            except VlmcError as exc:
                raise ConfigError("tree.explicit", str(exc)) from exc
            try:
                model = ExplicitModel(tree, {c: tuple(p) for c, p in self.q_explicit.items()})
            except VlmcError as exc:
                raise ConfigError("q.explicit", str(exc)) from exc
        try:
            model.tree.pref(self.init)
        except InternalWord as exc:
            raise ConfigError("init", f"init word {self.init!r} is internal") from exc
        return model


def _build_rule(pair: str, spec: dict) -> TailRule:
    loc = f"q.comb.{pair}"
    kind = spec.get("tail")
    weights = spec.get("switch_weights")
    nullable = bool(spec.get("nullable", False))
    if not isinstance(weights, dict) or not weights:
        raise ConfigError(loc, "switch_weights must be a non-empty table")
    weights = {str(k): float(v) for k, v in weights.items()}
    try:
        if kind == "geometric":
            return Geometric(switch_weights=weights, nullable=nullable, p=float(spec["p"]))
        if kind == "polynomial":
            return Polynomial(switch_weights=weights, nullable=nullable, c=float(spec["c"]))
        if kind == "table":
            fb_spec = spec.get("fallback")
            if not isinstance(fb_spec, dict):
                raise ConfigError(loc, "table rule needs a fallback table")
            fb_kind = fb_spec.get("tail")
            if fb_kind == "geometric":
                fb = Geometric(switch_weights=weights, nullable=nullable, p=float(fb_spec["p"]))
            elif fb_kind == "polynomial":
                fb = Polynomial(switch_weights=weights, nullable=nullable, c=float(fb_spec["c"]))
            else:
                raise ConfigError(loc, f"unknown fallback tail {fb_kind!r}")
            return Table(switch_weights=weights, nullable=nullable,
                         entries=tuple(float(x) for x in spec.get("entries", ())),
                         fallback=fb)
        raise ConfigError(loc, f"unknown tail kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(loc, f"missing parameter {exc.args[0]!r}") from exc
    except ConfigError:
        raise
    except VlmcError as exc:
        raise ConfigError(loc, str(exc)) from exc


def parse_model_config(text: str) -> ModelConfig:
    """Parse and validate; raises ConfigError with a line or field location."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError("syntax", str(exc)) from exc

    def need(key, typ, where="top level"):
        if key not in data:
            raise ConfigError(where, f"missing required key {key!r}")
        val = data[key]
        if not isinstance(val, typ):
            raise ConfigError(key, f"expected {typ.__name__}, got {type(val).__name__}")
        return val

    schema = need("schema", str)
    if schema != SCHEMA:
        raise ConfigError("schema", f"unsupported schema {schema!r}, expected {SCHEMA!r}")
    orientation = need("orientation", str)
    if orientation != ORIENTATION:
        raise ConfigError(
            "orientation",
            f"{orientation!r} not supported; words must be declared {ORIENTATION!r}",
        )
    alphabet = need("alphabet", str)
    try:
        alpha = Alphabet(alphabet)
    except VlmcError as exc:
        raise ConfigError("alphabet", str(exc)) from exc
    init = need("init", str)
    for ch in init:
        if ch not in alphabet:
            raise ConfigError("init", f"letter {ch!r} not in alphabet")
    seed = data.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError("seed", "seed must be an integer")

    tree = need("tree", dict)
    kind = tree.get("kind")
    if kind not in ("comb", "explicit"):
        raise ConfigError("tree.kind", f"unknown tree kind {kind!r}")

    q = data.get("q", {})
    if not isinstance(q, dict):
        raise ConfigError("q", "q must be a table")

    cfg = ModelConfig(alphabet=alphabet, init=init, tree_kind=kind, seed=seed)

    if kind == "comb":
        if "leaves" in tree:
            raise ConfigError("tree.leaves", "combs have no explicit leaf list")
        rules = q.get("comb")
        if not isinstance(rules, dict):
            raise ConfigError("q.comb", "comb models need a [q.comb.<pair>] table per pair")
        expected = {a + b for a in alphabet for b in alphabet if a != b}
        got = set(rules)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ConfigError(
                "q.comb",
                f"need exactly one rule per ordered pair; missing {missing}, extra {extra}",
            )
        cfg.comb_rules = {pair: dict(spec) for pair, spec in rules.items()}
    else:
        leaves = tree.get("leaves")
        if not isinstance(leaves, list) or not leaves:
            raise ConfigError("tree.leaves", "explicit trees need a non-empty leaf list")
        cfg.leaves = [str(w) for w in leaves]
        qx = q.get("explicit")
        if not isinstance(qx, dict):
            raise ConfigError("q.explicit", "explicit models need a [q.explicit] table")
        for c, probs in qx.items():
            if not isinstance(probs, list):
                raise ConfigError(f"q.explicit.{c}", "expected a probability list")
            row = [float(x) for x in probs]
            if len(row) != len(alphabet):
                raise ConfigError(
                    f"q.explicit.{c}",
                    f"expected {len(alphabet)} probabilities, got {len(row)}",
                )
            if any(x < 0 for x in row):
                raise ConfigError(f"q.explicit.{c}", "negative probability")
            if abs(sum(row) - 1.0) > 1e-12:
                raise ConfigError(
                    f"q.explicit.{c}", f"probabilities sum to {sum(row)!r}, expected 1"
                )
            cfg.q_explicit[c] = row

    pol = data.get("policy", {})
    if not isinstance(pol, dict):
        raise ConfigError("policy", "policy must be a table")
    try:
        cfg.policy = SeriesPolicy(
            max_terms=int(pol.get("max_terms", SeriesPolicy.max_terms)),
            abs_tol=float(pol.get("abs_tol", SeriesPolicy.abs_tol)),
            divergence_threshold=float(
                pol.get("divergence_threshold", SeriesPolicy.divergence_threshold)
            ),
        )
    except VlmcError as exc:
        raise ConfigError("policy", str(exc)) from exc

    # materialize once so malformed rules/q are caught at parse time
    cfg.build_model()
    return cfg


# ---------------------------------------------------------------------------
# canonical emission
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise VlmcError(f"cannot format {value!r}")


def _fmt_inline(d: dict) -> str:
    inner = ", ".join(f"{k} = {_fmt(v)}" for k, v in d.items())
    return "{ " + inner + " }"


def _rule_lines(pair: str, spec: dict, alphabet: Alphabet) -> list[str]:
    lines = [f"[q.comb.{pair}]"]
    kind = spec["tail"]
    lines.append(f'tail = "{kind}"')
    if kind == "geometric":
        lines.append(f"p = {_fmt(float(spec['p']))}")
    elif kind == "polynomial":
        lines.append(f"c = {_fmt(float(spec['c']))}")
    else:
        lines.append(f"entries = {_fmt([float(x) for x in spec.get('entries', ())])}")
        fb = spec["fallback"]
        fb_items = {"tail": fb["tail"]}
        if fb["tail"] == "geometric":
            fb_items["p"] = float(fb["p"])
        else:
            fb_items["c"] = float(fb["c"])
        lines.append(f"fallback = {_fmt_inline(fb_items)}")
    weights = spec["switch_weights"]
    ordered = {
        letter: float(weights[letter]) for letter in alphabet.letters if letter in weights
    }
    lines.append(f"switch_weights = {_fmt_inline(ordered)}")
    if spec.get("nullable"):
        lines.append("nullable = true")
    return lines


def emit_model_config(cfg: ModelConfig) -> str:
    """Canonical text: fixed section order, sorted words, shortest floats."""
    alpha = Alphabet(cfg.alphabet)
    out = [
        f'schema = "{SCHEMA}"',
        f'orientation = "{ORIENTATION}"',
        f'alphabet = "{cfg.alphabet}"',
        f'init = "{cfg.init}"',
    ]
    if cfg.seed is not None:
        out.append(f"seed = {cfg.seed}")
    out.append("")
    out.append("[tree]")
    out.append(f'kind = "{cfg.tree_kind}"')
    if cfg.tree_kind == "explicit":
        leaves = sorted(cfg.leaves, key=alpha.sort_key)
        out.append(f"leaves = {_fmt(leaves)}")
        out.append("")
        out.append("[q.explicit]")
        for c in sorted(cfg.q_explicit, key=alpha.sort_key):
            out.append(f'"{c}" = {_fmt(cfg.q_explicit[c])}')
    else:
        for pair in sorted(cfg.comb_rules, key=alpha.sort_key):
            out.append("")
            out.extend(_rule_lines(pair, cfg.comb_rules[pair], alpha))
    out.append("")
    out.append("[policy]")
    out.append(f"max_terms = {cfg.policy.max_terms}")
    out.append(f"abs_tol = {_fmt(cfg.policy.abs_tol)}")
    out.append(f"divergence_threshold = {_fmt(cfg.policy.divergence_threshold)}")
    out.append("")
    return "\n".join(out)


def load_model_config(path) -> ModelConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model_config(fh.read())
