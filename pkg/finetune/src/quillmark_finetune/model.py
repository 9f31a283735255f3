"""Small word-level encoder-decoder used as the trainable text-to-text model.

No pretrained weights are assumed: the vocabulary comes from the pair file
and the network is a GRU encoder feeding a GRU decoder. Three sizes mirror
the usual small/base scaling ladder; "tiny" is the default so the whole
acceptance run works on a CPU in seconds.
"""

from __future__ import annotations

from collections import Counter

import torch
from torch import nn

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>"]

SIZES = {
    "tiny": {"emb_dim": 64, "hidden_dim": 128, "batch_size": 16},
    "small": {"emb_dim": 128, "hidden_dim": 256, "batch_size": 8},
    "base": {"emb_dim": 256, "hidden_dim": 512, "batch_size": 4},
}


class WordVocab:
    def __init__(self, tokens: list[str]):
        self.tokens = SPECIALS + tokens
        self.index = {t: i for i, t in enumerate(self.tokens)}

    @classmethod
    def build(cls, texts: list[str], max_size: int = 20000) -> "WordVocab":
        counts: Counter[str] = Counter()
        for text in texts:
            counts.update(text.split())
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return cls([t for t, _ in ranked[: max_size - len(SPECIALS)]])

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, text: str, max_tokens: int) -> list[int]:
        return [self.index.get(t, UNK) for t in text.split()[:max_tokens]]

    def decode(self, ids: list[int]) -> str:
        words = []
        for i in ids:
            if i == EOS:
                break
            if i in (PAD, BOS):
                continue
            words.append(self.tokens[i])
        return " ".join(words)


class Seq2Seq(nn.Module):
    def __init__(self, vocab_size: int, emb_dim: int, hidden_dim: int):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, emb_dim, padding_idx=PAD)
        self.encoder = nn.GRU(emb_dim, hidden_dim, batch_first=True)
        self.decoder = nn.GRU(emb_dim, hidden_dim, batch_first=True)
        self.out = nn.Linear(hidden_dim, vocab_size)

    def encode(self, src: torch.Tensor) -> torch.Tensor:
        _, hidden = self.encoder(self.embedding(src))
        return hidden

    def forward(self, src: torch.Tensor, dec_in: torch.Tensor) -> torch.Tensor:
        hidden = self.encode(src)
        outputs, _ = self.decoder(self.embedding(dec_in), hidden)
        return self.out(outputs)

    @torch.no_grad()
    def generate(self, src: torch.Tensor, max_tokens: int) -> list[int]:
        hidden = self.encode(src)
        token = torch.tensor([[BOS]], dtype=torch.long)
        generated: list[int] = []
        for _ in range(max_tokens):
            output, hidden = self.decoder(self.embedding(token), hidden)
            token = self.out(output[:, -1]).argmax(dim=-1, keepdim=True)
            tid = int(token.item())
            if tid == EOS:
                break
            generated.append(tid)
        return generated
