"""Model hyperparameters and sequence geometry."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import DataError

DEFAULT_DILATIONS = (1, 2, 4, 8, 16, 32, 64)


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and training constants.

    The input sequence is [start token] + context + masked target, so its
    length is 1 + context_steps + target_steps (193 at production geometry).
    The receptive field of the dilation stack must cover that whole span so
    the last output can see the start token.
    """

    vocab_size: int
    embed_dim: int = 20
    hidden_units: int = 192
    layers: int = 7
    kernel_size: int = 3
    dilations: tuple[int, ...] = DEFAULT_DILATIONS
    silent_loss_weight: float = 0.1
    dropout_rate: float = 0.1
    seed: int = 0
    context_steps: int = 144
    target_steps: int = 48

    def __post_init__(self) -> None:
        if self.vocab_size < 2:
            raise DataError(f"vocab_size must be at least 2, got {self.vocab_size}")
        if self.layers != len(self.dilations):
            raise DataError(
                f"{self.layers} layers but {len(self.dilations)} dilations"
            )
        if self.kernel_size < 1:
            raise DataError(f"kernel_size must be positive, got {self.kernel_size}")
        if any(d < 1 for d in self.dilations):
            raise DataError(f"dilations must be positive, got {self.dilations}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise DataError(f"dropout_rate {self.dropout_rate} outside [0,1)")
        if self.context_steps < 0 or self.target_steps < 1:
            raise DataError("bad sequence geometry")
        if self.receptive_field < self.input_length:
            raise DataError(
                f"receptive field {self.receptive_field} shorter than "
                f"input length {self.input_length}"
            )
        object.__setattr__(self, "dilations", tuple(self.dilations))

    @property
    def receptive_field(self) -> int:
        return 1 + (self.kernel_size - 1) * sum(self.dilations)

    @property
    def input_length(self) -> int:
        return 1 + self.context_steps + self.target_steps

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dilations"] = list(self.dilations)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        data = dict(data)
        data["dilations"] = tuple(data["dilations"])
        return cls(**data)


def tiny_config(vocab_size: int = 12, seed: int = 0) -> ModelConfig:
    """Small geometry for gradient checking: short input, two layers."""
    return ModelConfig(
        vocab_size=vocab_size,
        embed_dim=4,
        hidden_units=8,
        layers=2,
        kernel_size=3,
        dilations=(1, 2),
        dropout_rate=0.0,
        seed=seed,
        context_steps=4,
        target_steps=2,
    )
