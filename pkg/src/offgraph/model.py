"""The composed detection model: graph attention + text encoder + fusion head.

One model instance owns every trainable parameter and knows which of them
belong to the graph-attention learning-rate group. The constructor builds
only the pieces the selected ablation keeps:

  * ``full``               everything below,
  * ``no_gat``             drop the graph side; fuse token rows only,
  * ``no_encoder``         drop the text side; author rows only (predictions
                           become a function of the author alone),
  * ``no_gat_residual``    graph attention without the residual row,
  * ``single_head_gat``    one graph attention head at full hidden width,
  * ``no_attention_layer`` skip fused attention; mean-pooled token rows and
                           user rows are concatenated straight into the
                           feed-forward layer.
"""

from __future__ import annotations

import numpy as np

from .corpus import TokenSequence
from .encoder import EncoderParams, encode
from .fusion import FusionParams, add_position_encoding, assemble, classify, fuse_attention
from .gat import GatParams, gat_forward
from .graph import SocialGraph
from .tensor import Tensor, concat, gather_rows, reshape

__all__ = ["ABLATIONS", "DetectionModel"]

ABLATIONS = ("full", "no_gat", "no_encoder", "no_gat_residual", "single_head_gat", "no_attention_layer")


class DetectionModel:
    def __init__(self, config, vocab_size: int, feature_dim: int, rng: np.random.Generator):
        if config.ablation not in ABLATIONS:
            raise ValueError(f"unknown ablation {config.ablation!r}; expected one of {ABLATIONS}")
        self.config = config
        self.ablation = config.ablation
        self.pooling = getattr(config, "pooling", "mean")

        self.gat: GatParams | None = None
        if self.ablation != "no_gat":
            heads = 1 if self.ablation == "single_head_gat" else config.gat_heads
            head_dim = config.gat_hidden // heads
            if head_dim * heads != config.gat_hidden:
                raise ValueError("gat_hidden must divide evenly across heads")
            self.gat = GatParams.init(
                feature_dim, heads, head_dim, rng,
                with_residual=self.ablation != "no_gat_residual",
            )

        self.encoder: EncoderParams | None = None
        if self.ablation != "no_encoder":
            self.encoder = EncoderParams.init(
                vocab_size, config.max_len, config.d_model,
                config.encoder_layers, config.encoder_heads, config.d_ff, rng,
                attn_dropout=config.attention_dropout, hidden_dropout=config.hidden_dropout,
            )

        with_attention = self.ablation != "no_attention_layer"
        branches = 1 + (self.gat is not None and self.encoder is not None)
        self.fusion = FusionParams.init(
            config.d_model, config.d_ff, rng,
            num_heads=config.fusion_heads,
            gat_head_dim=None if self.gat is None else self.gat.head_dim,
            with_residual_row=self.gat is not None and self.gat.residual_proj is not None,
            with_attention=with_attention,
            ffn_in=config.d_model if with_attention else branches * config.d_model,
        )

    # -- parameters ------------------------------------------------------

    def named_parameters(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        if self.gat is not None:
            out.update(self.gat.named("gat"))
        if self.encoder is not None:
            out.update(self.encoder.named("encoder"))
        out.update(self.fusion.named("fusion"))
        return out

    def parameter_groups(self) -> tuple[list[Tensor], list[Tensor]]:
        """(graph-attention group, everything else); disjoint and exhaustive."""
        gat_group, rest = [], []
        for name, tensor in self.named_parameters().items():
            (gat_group if name.startswith("gat.") else rest).append(tensor)
        return gat_group, rest

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.named_parameters().items()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        params = self.named_parameters()
        if set(arrays) != set(params):
            missing = set(params) ^ set(arrays)
            raise ValueError(f"checkpoint parameters do not match the model: {sorted(missing)}")
        for name, tensor in params.items():
            value = np.asarray(arrays[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise ValueError(f"{name}: shape {value.shape} != {tensor.shape}")
            tensor.data[...] = value

    # -- forward ---------------------------------------------------------

    def user_embeddings(
        self,
        graph: SocialGraph,
        *,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor | None:
        """One graph-attention pass over the full masked graph."""
        if self.gat is None:
            return None
        return gat_forward(
            Tensor(graph.features), graph, self.gat,
            training=training, rng=rng,
            attn_dropout=self.config.attention_dropout,
            symmetric=getattr(self.config, "symmetric_neighbors", False),
        )

    def _author_rows(self, embeddings: Tensor, author_index: int) -> Tensor:
        rows = self.gat.num_heads + (self.gat.residual_proj is not None)
        picked = gather_rows(embeddings, np.array([author_index]))
        return reshape(picked, (rows, self.gat.head_dim))

    def tweet_probability(
        self,
        seq: TokenSequence,
        author_index: int | None,
        embeddings: Tensor | None,
        *,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """P(offensive) for one tweet, shape [1].

        Passing ``author_index=None`` while the graph side is active skips the
        author rows entirely, which reproduces the text-only ablation from the
        full model's parameters (the structural-equivalence escape hatch).
        """
        tokens = None
        if self.encoder is not None:
            tokens = encode(seq, self.encoder, training=training, rng=rng)
        author = None
        if self.gat is not None and author_index is not None:
            if embeddings is None:
                raise ValueError("author index given without user embeddings")
            author = self._author_rows(embeddings, author_index)

        if self.ablation == "no_attention_layer":
            pooled = []
            if tokens is not None:
                pooled.append(tokens.mean(axis=0, keepdims=True))
            if author is not None:
                fused, _ = assemble(None, author, self.fusion)
                pooled.append(fused.mean(axis=0, keepdims=True))
            x = concat(pooled, axis=1)
        else:
            x, num_tokens = assemble(tokens, author, self.fusion)
            x = add_position_encoding(x, num_tokens)
            x = fuse_attention(
                x, self.fusion, training=training, rng=rng,
                attn_dropout=self.config.attention_dropout,
            )
        return classify(
            x, self.fusion, training=training, rng=rng,
            hidden_dropout=self.config.hidden_dropout, pooling=self.pooling,
        )

    def forward_batch(
        self,
        seqs: list[TokenSequence],
        author_indices: list[int | None],
        embeddings: Tensor | None,
        *,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """Probabilities for a batch, shape [B]."""
        probs = [
            self.tweet_probability(seq, author, embeddings, training=training, rng=rng)
            for seq, author in zip(seqs, author_indices)
        ]
        return concat(probs, axis=0)

    def predict(self, seqs: list[TokenSequence], graph: SocialGraph) -> np.ndarray:
        """Evaluation-mode probabilities as a plain array."""
        embeddings = self.user_embeddings(graph)
        authors = [graph.index[s.author_id] if self.gat is not None else None for s in seqs]
        return self.forward_batch(seqs, authors, embeddings).data.copy()
