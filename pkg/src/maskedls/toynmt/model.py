"""Compact encoder-decoder with one embedding shared across both sides.

The embedding matrix covers the joint vocabulary, feeds encoder and decoder
alike, and is tied to the output projection.  Everything runs in float64 on
CPU.  Dropout masks come from a counter-based generator keyed by
(seed, step, site) rather than a global RNG stream, so extra forward passes
(evaluation, decoding) can never perturb the training trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    layers: int = 2
    model_dim: int = 64
    heads: int = 2
    ffn_dim: int = 128
    dropout: float = 0.1
    max_positions: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.layers, self.model_dim, self.heads, self.ffn_dim, self.max_positions) < 1:
            raise InvalidConfig("layers, dims, heads, and max_positions must all be >= 1")
        if self.model_dim % self.heads:
            raise InvalidConfig(f"model_dim {self.model_dim} not divisible by heads {self.heads}")
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidConfig(f"dropout must be in [0, 1), got {self.dropout}")


class DropoutState:
    """Mutable (seed, step) context shared by every dropout site in a model."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.step = 0
        self._next_site = 0

    def new_site(self) -> int:
        site = self._next_site
        self._next_site += 1
        return site


class KeyedDropout(nn.Module):
    """Dropout whose mask depends only on (seed, step, site) and the input shape."""

    def __init__(self, p: float, state: DropoutState):
        super().__init__()
        self.p = p
        self.state = state
        self.site = state.new_site()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if not self.training or self.p == 0.0:
            return x
        key = np.array(
            [self.state.seed % 2**64, ((self.state.step % 2**40) << 20) | self.site],
            dtype=np.uint64,
        )
        rng = np.random.Generator(np.random.Philox(key=key))
        keep = (rng.random(size=tuple(x.shape)) >= self.p).astype(np.float64)
        return x * torch.from_numpy(keep / (1.0 - self.p))


class MultiHeadAttention(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.head_dim = dim // heads
        self.wq = nn.Linear(dim, dim)
        self.wk = nn.Linear(dim, dim)
        self.wv = nn.Linear(dim, dim)
        self.wo = nn.Linear(dim, dim)

    def forward(
        self, query: torch.Tensor, keyval: torch.Tensor, mask: torch.Tensor | None
    ) -> torch.Tensor:
        b, lq, _ = query.shape
        lk = keyval.shape[1]

        def split(x: torch.Tensor, length: int) -> torch.Tensor:
            return x.view(b, length, self.heads, self.head_dim).transpose(1, 2)

        q = split(self.wq(query), lq)
        k = split(self.wk(keyval), lk)
        v = split(self.wv(keyval), lk)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        if mask is not None:
            scores = scores.masked_fill(mask, float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, lq, -1)
        return self.wo(out)


class FeedForward(nn.Module):
    def __init__(self, dim: int, hidden: int):
        super().__init__()
        self.inner = nn.Linear(dim, hidden)
        self.outer = nn.Linear(hidden, dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # GELU keeps the loss surface smooth, which the finite-difference
        # gradient checks rely on.
        return self.outer(torch.nn.functional.gelu(self.inner(x)))


class EncoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig, state: DropoutState):
        super().__init__()
        self.norm1 = nn.LayerNorm(cfg.model_dim)
        self.attn = MultiHeadAttention(cfg.model_dim, cfg.heads)
        self.drop1 = KeyedDropout(cfg.dropout, state)
        self.norm2 = nn.LayerNorm(cfg.model_dim)
        self.ffn = FeedForward(cfg.model_dim, cfg.ffn_dim)
        self.drop2 = KeyedDropout(cfg.dropout, state)

    def forward(self, x: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        h = self.norm1(x)
        x = x + self.drop1(self.attn(h, h, pad_mask))
        x = x + self.drop2(self.ffn(self.norm2(x)))
        return x


class DecoderLayer(nn.Module):
    def __init__(self, cfg: ModelConfig, state: DropoutState):
        super().__init__()
        self.norm1 = nn.LayerNorm(cfg.model_dim)
        self.self_attn = MultiHeadAttention(cfg.model_dim, cfg.heads)
        self.drop1 = KeyedDropout(cfg.dropout, state)
        self.norm2 = nn.LayerNorm(cfg.model_dim)
        self.cross_attn = MultiHeadAttention(cfg.model_dim, cfg.heads)
        self.drop2 = KeyedDropout(cfg.dropout, state)
        self.norm3 = nn.LayerNorm(cfg.model_dim)
        self.ffn = FeedForward(cfg.model_dim, cfg.ffn_dim)
        self.drop3 = KeyedDropout(cfg.dropout, state)

    def forward(
        self,
        x: torch.Tensor,
        memory: torch.Tensor,
        causal_mask: torch.Tensor,
        mem_pad_mask: torch.Tensor,
    ) -> torch.Tensor:
        h = self.norm1(x)
        x = x + self.drop1(self.self_attn(h, h, causal_mask))
        x = x + self.drop2(self.cross_attn(self.norm2(x), memory, mem_pad_mask))
        x = x + self.drop3(self.ffn(self.norm3(x)))
        return x


class TinyTransformer(nn.Module):
    """Pre-norm encoder-decoder over a joint vocabulary with tied output weights."""

    def __init__(
        self,
        cfg: ModelConfig,
        vocab_size: int,
        pad_id: int = 0,
        bos_id: int = 1,
        eos_id: int = 2,
    ):
        super().__init__()
        self.cfg = cfg
        self.vocab_size = vocab_size
        self.pad_id = pad_id
        self.bos_id = bos_id
        self.eos_id = eos_id
        self.dropout_state = DropoutState(seed=0)
        state = self.dropout_state

        self.embed = nn.Embedding(vocab_size, cfg.model_dim)
        self.pos_enc = nn.Embedding(cfg.max_positions, cfg.model_dim)
        self.pos_dec = nn.Embedding(cfg.max_positions, cfg.model_dim)
        self.drop_enc = KeyedDropout(cfg.dropout, state)
        self.drop_dec = KeyedDropout(cfg.dropout, state)
        self.enc_layers = nn.ModuleList(EncoderLayer(cfg, state) for _ in range(cfg.layers))
        self.dec_layers = nn.ModuleList(DecoderLayer(cfg, state) for _ in range(cfg.layers))
        self.enc_norm = nn.LayerNorm(cfg.model_dim)
        self.dec_norm = nn.LayerNorm(cfg.model_dim)
        self.double()

    def reset_parameters(self, seed: int) -> None:
        gen = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            nn.init.normal_(self.embed.weight, 0.0, self.cfg.model_dim**-0.5, generator=gen)
            nn.init.normal_(self.pos_enc.weight, 0.0, 0.02, generator=gen)
            nn.init.normal_(self.pos_dec.weight, 0.0, 0.02, generator=gen)
            for module in self.modules():
                if isinstance(module, nn.Linear):
                    nn.init.xavier_uniform_(module.weight, generator=gen)
                    nn.init.zeros_(module.bias)
                elif isinstance(module, nn.LayerNorm):
                    nn.init.ones_(module.weight)
                    nn.init.zeros_(module.bias)

    def _positions(self, length: int) -> torch.Tensor:
        if length > self.cfg.max_positions:
            raise InvalidConfig(
                f"sequence length {length} exceeds max_positions {self.cfg.max_positions}"
            )
        return torch.arange(length)

    def encode(self, src_ids: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns (memory, key-padding mask shaped for attention scores)."""
        b, ls = src_ids.shape
        pad_mask = (src_ids == self.pad_id).view(b, 1, 1, ls)
        x = self.embed(src_ids) * math.sqrt(self.cfg.model_dim)
        x = self.drop_enc(x + self.pos_enc(self._positions(ls)))
        for layer in self.enc_layers:
            x = layer(x, pad_mask)
        return self.enc_norm(x), pad_mask

    def decode(
        self, memory: torch.Tensor, mem_pad_mask: torch.Tensor, tgt_in_ids: torch.Tensor
    ) -> torch.Tensor:
        b, lt = tgt_in_ids.shape
        causal = torch.triu(torch.ones(lt, lt, dtype=torch.bool), diagonal=1).view(1, 1, lt, lt)
        x = self.embed(tgt_in_ids) * math.sqrt(self.cfg.model_dim)
        x = self.drop_dec(x + self.pos_dec(self._positions(lt)))
        for layer in self.dec_layers:
            x = layer(x, memory, causal, mem_pad_mask)
        x = self.dec_norm(x)
        return x @ self.embed.weight.t()

    def forward(self, src_ids: torch.Tensor, tgt_in_ids: torch.Tensor) -> torch.Tensor:
        memory, mem_pad_mask = self.encode(src_ids)
        return self.decode(memory, mem_pad_mask, tgt_in_ids)


def init_model(
    cfg: ModelConfig,
    joint_size: int,
    pad_id: int = 0,
    bos_id: int = 1,
    eos_id: int = 2,
) -> TinyTransformer:
    """Build a model with parameters drawn deterministically from cfg.seed."""
    if joint_size < 1:
        raise InvalidConfig(f"joint vocabulary size must be >= 1, got {joint_size}")
    model = TinyTransformer(cfg, joint_size, pad_id=pad_id, bos_id=bos_id, eos_id=eos_id)
    model.reset_parameters(cfg.seed)
    return model


def greedy_decode(model: TinyTransformer, src_ids, max_len: int) -> list[int]:
    """Argmax decoding until the end-of-sentence token or max_len.

    Ties break toward the lowest token id.  Returns generated ids without the
    begin/end markers.
    """
    model.eval()
    with torch.no_grad():
        src = torch.tensor([list(src_ids)], dtype=torch.long)
        memory, mem_pad_mask = model.encode(src)
        out: list[int] = []
        ids = [model.bos_id]
        for _ in range(max_len):
            tgt_in = torch.tensor([ids], dtype=torch.long)
            logits = model.decode(memory, mem_pad_mask, tgt_in)
            next_id = int(np.argmax(logits[0, -1].numpy()))
            if next_id == model.eos_id:
                break
            out.append(next_id)
            ids.append(next_id)
    return out
