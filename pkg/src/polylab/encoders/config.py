"""Encoder hyperparameter bundle.

Desk-scale defaults keep every mechanism testable on one CPU core;
`paper_scale()` returns the published configuration.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class EncoderConfig:
    # sequence encoder (D)
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    ffn_dim: int = 128
    rel_cap: int = 32            # max relative distance K
    max_seq_len: int = 128
    vocab_size: int = 265
    # graph encoder (G)
    d_g: int = 32
    gnn_layers: int = 5
    # geometry encoder (S)
    d_s: int = 32
    interaction_layers: int = 6
    r_cut: float = 10.0
    max_neighbors: int = 64
    n_rbf: int = 32
    # fingerprint encoder (T)
    fp_embed_dim: int = 32
    fp_layers: int = 2
    fp_heads: int = 4
    fp_ffn: int = 64
    fp_seq_len: int = 256
    # shared space
    d_shared: int = 32
    # atomic-number table: indices 0..118 are Z, 119 is the mask slot
    z_table: int = 120

    def __post_init__(self):
        if self.d_model % self.n_heads:
            raise ValueError("d_model must be divisible by n_heads")
        if self.fp_embed_dim % self.fp_heads:
            raise ValueError("fp_embed_dim must be divisible by fp_heads")
        if self.r_cut <= 0:
            raise ValueError("r_cut must be positive")
        for name in ("d_model", "n_layers", "n_heads", "ffn_dim", "d_g",
                     "gnn_layers", "d_s", "interaction_layers", "n_rbf",
                     "fp_embed_dim", "fp_layers", "fp_heads", "fp_seq_len",
                     "d_shared"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def z_mask_index(self):
        return self.z_table - 1

    @classmethod
    def paper_scale(cls):
        return cls(d_model=600, n_layers=12, n_heads=12, ffn_dim=512,
                   d_g=300, gnn_layers=5, d_s=600, interaction_layers=6,
                   r_cut=10.0, max_neighbors=64, fp_embed_dim=256,
                   fp_layers=4, fp_heads=8, fp_ffn=1024, fp_seq_len=2048,
                   d_shared=600)

    def scaled(self, **overrides):
        return replace(self, **overrides)

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, data):
        return cls(**data)
