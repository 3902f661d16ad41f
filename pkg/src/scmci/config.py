"""Scenario configuration: flat ``key = value`` text, validated before any run."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .crypto import HashAlg
from .errors import ConfigError
from .fixtures import N_PURCHASES

U64 = (1 << 64) - 1


@dataclass(frozen=True)
class Tamper:
    frame: int
    bit: int

    @classmethod
    def parse(cls, text: str) -> "Tamper":
        try:
            frame, bit = (int(x) for x in text.split(":"))
        except ValueError:
            raise ConfigError("tamper", f"expected <frame-index>:<bit-index>, got {text!r}") from None
        if frame < 0 or bit < 0:
            raise ConfigError("tamper", "indices must be non-negative")
        return cls(frame, bit)

    def __str__(self) -> str:
        return f"{self.frame}:{self.bit}"


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 42
    protocol: str = "scmci"
    rsa_bits: int = 512
    sym_bits: int = 128
    hash: str = "md5"
    fixtures: tuple[int, ...] = (0,)
    attack: bool = False
    key_bits: int = 128
    padding: str = "none"
    attack_seeds: int = 1
    report_seeds: tuple[int, ...] = (0, 1, 2)
    tamper: Tamper | None = None
    out: str = "out"

    def validate(self) -> "ScenarioConfig":
        if not 0 <= self.seed <= U64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if self.protocol not in ("scmci", "baseline"):
            raise ConfigError("protocol", f"must be scmci or baseline, got {self.protocol!r}")
        if not 256 <= self.rsa_bits <= 2048:
            raise ConfigError("rsa_bits", f"must be in 256..2048, got {self.rsa_bits}")
        if self.sym_bits not in (128, 192, 256):
            raise ConfigError("sym_bits", f"must be 128, 192 or 256, got {self.sym_bits}")
        if self.sym_bits >= self.rsa_bits:
            raise ConfigError("sym_bits", "session keys must be smaller than the RSA modulus")
        try:
            HashAlg(self.hash)
        except ValueError:
            raise ConfigError("hash", f"must be md5 or sha256, got {self.hash!r}") from None
        if not self.fixtures or any(not 0 <= f < N_PURCHASES for f in self.fixtures):
            raise ConfigError("fixtures", f"ids must be in 0..{N_PURCHASES - 1}")
        if not 1 <= self.key_bits <= 128:
            raise ConfigError("key_bits", "must be in 1..128")
        if self.rsa_bits < 2 * self.key_bits + 1:
            raise ConfigError("key_bits", "the modulus must be more than twice the key width")
        if self.padding not in ("none", "oaep"):
            raise ConfigError("padding", "must be none or oaep")
        if self.attack_seeds < 1:
            raise ConfigError("attack_seeds", "must be positive")
        if not self.report_seeds:
            raise ConfigError("report_seeds", "at least one seed")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fixtures"] = list(self.fixtures)
        d["report_seeds"] = list(self.report_seeds)
        d["tamper"] = None if self.tamper is None else str(self.tamper)
        return d

    def scenario_dict(self) -> dict:
        """Everything that determines the experiment; the output path does not."""
        d = self.to_dict()
        del d["out"]
        return d

    def to_text(self) -> str:
        lines = []
        for k, v in self.to_dict().items():
            if v is None:
                continue
            if isinstance(v, list):
                v = ",".join(str(x) for x in v)
            lines.append(f"{k} = {str(v).lower() if isinstance(v, bool) else v}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name for f in fields(ScenarioConfig)}


def _int(name: str, text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise ConfigError(name, f"not an integer: {text!r}") from None


def _bool(name: str, text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(name, f"not a boolean: {text!r}")


def coerce(name: str, value: str):
    name = name.replace("-", "_")
    if name not in _FIELDS:
        raise ConfigError(name, "unknown setting")
    if name in ("seed", "rsa_bits", "sym_bits", "key_bits", "attack_seeds"):
        return _int(name, value)
    if name in ("fixtures", "report_seeds"):
        return tuple(_int(name, x) for x in value.split(",") if x.strip())
    if name == "attack":
        return _bool(name, value)
    if name == "tamper":
        return Tamper.parse(value)
    return value.strip().lower() if name in ("protocol", "hash", "padding") else value.strip()


def parse_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        name = key.replace("-", "_")
        out[name] = coerce(name, value)
    return out


def load_config(path: str | Path | None, **overrides) -> ScenarioConfig:
    settings = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        settings.update(parse_config(text))
    settings.update({k: v for k, v in overrides.items() if v is not None})
    return replace(ScenarioConfig(), **settings).validate()
