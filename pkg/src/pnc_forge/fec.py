"""Rate-1/2, K=7 convolutional code (171, 133 octal) with zero-tail termination."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation


@dataclass(frozen=True)
class ConvCode:
    generators: tuple[int, ...] = (0o171, 0o133)
    constraint_length: int = 7

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def coded_length(self, payload_len: int) -> int:
        return len(self.generators) * (payload_len + self.memory)

    def payload_length(self, coded_len: int) -> int:
        k, rem = divmod(coded_len, len(self.generators))
        if rem or k <= self.memory:
            raise ContractViolation(f"coded length {coded_len} does not fit this code")
        return k - self.memory


K7 = ConvCode()


def _tables(code: ConvCode):
    # register = (input << memory) | state, state holds past inputs (most recent in the top bit)
    m = code.memory
    reg = np.arange(1 << code.constraint_length)
    outputs = np.stack([np.array([bin(x & g).count("1") & 1 for x in reg]) for g in code.generators], axis=1)
    next_state = reg >> 1
    return outputs.astype(np.uint8), next_state, m


def conv_encode(bits, code: ConvCode = K7) -> np.ndarray:
    """Encode one payload (1-D) or a batch of payloads (2-D, one per row)."""
    u = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    if u.shape[1] < 1:
        raise ContractViolation("empty payload")
    outputs, next_state, m = _tables(code)
    padded = np.concatenate([u, np.zeros((u.shape[0], m), dtype=np.uint8)], axis=1)
    state = np.zeros(u.shape[0], dtype=np.int64)
    out = np.empty((u.shape[0], padded.shape[1], len(code.generators)), dtype=np.uint8)
    for t in range(padded.shape[1]):
        reg = (padded[:, t].astype(np.int64) << m) | state
        out[:, t] = outputs[reg]
        state = next_state[reg]
    out = out.reshape(u.shape[0], -1)
    return out[0] if np.ndim(bits) == 1 else out


def viterbi_decode(bit_llrs, code: ConvCode = K7) -> np.ndarray:
    """Soft-input Viterbi; LLR > 0 favours bit 0. Returns payload with the tail removed.

    Accepts one codeword (1-D) or a batch (2-D). The path metric is the
    correlation sum of ``(1 - 2c) * llr`` over the code bits, which is the
    ML criterion for independent bit LLRs.
    """
    llr = np.atleast_2d(np.asarray(bit_llrs, dtype=float))
    n_out = len(code.generators)
    batch, length = llr.shape
    payload = code.payload_length(length)
    steps = length // n_out
    m = code.memory
    S = code.n_states
    outputs, _, _ = _tables(code)
    signs = 1.0 - 2.0 * outputs  # (2^K, n_out)

    # predecessors of state ns: regs (u << m) | s with s = ((ns << 1) & (S-1)) | x
    ns = np.arange(S)
    u_of = ns >> (m - 1)
    prev = np.stack([((ns << 1) & (S - 1)) | x for x in (0, 1)], axis=1)  # (S, 2)
    reg = (u_of[:, None] << m) | prev  # (S, 2)

    metric = np.full((batch, S), -np.inf)
    metric[:, 0] = 0.0
    decisions = np.empty((steps, batch, S), dtype=np.uint8)
    llr = llr.reshape(batch, steps, n_out)
    for t in range(steps):
        branch = llr[:, t, :] @ signs.T  # (batch, 2^K)
        cand = metric[:, prev] + branch[:, reg]  # (batch, S, 2)
        choice = cand[:, :, 1] > cand[:, :, 0]
        decisions[t] = choice
        metric = np.where(choice, cand[:, :, 1], cand[:, :, 0])
    state = np.zeros(batch, dtype=np.int64)  # zero tail
    decoded = np.empty((batch, steps), dtype=np.uint8)
    rows = np.arange(batch)
    for t in range(steps - 1, -1, -1):
        decoded[:, t] = state >> (m - 1)
        x = decisions[t, rows, state]
        state = ((state << 1) & (S - 1)) | x
    out = decoded[:, :payload]
    return out[0] if np.ndim(bit_llrs) == 1 else out


def hard_to_llr(bits, magnitude: float = 1.0) -> np.ndarray:
    return magnitude * (1.0 - 2.0 * np.asarray(bits, dtype=float))
