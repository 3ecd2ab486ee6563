"""Chain CSV input/output.

One file holds all chains. The header is ``chain,iter,c1,...,cp``; rows
are sorted by (chain, iter); chain ids are 0-based consecutive integers
and iterations are 0-based consecutive within each chain. Values are
written with shortest round-trip formatting, so write -> read is
lossless.
"""

from __future__ import annotations

import io

import numpy as np

from .errors import ParseError, UnequalChainLengths
from .numerics import ChainSet, as_chain_set


def write_chains(chains, dest) -> None:
    """Write a ChainSet to ``dest`` (path or text file object)."""
    cs = as_chain_set(chains)
    if hasattr(dest, "write"):
        _write_stream(cs, dest)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            _write_stream(cs, fh)


def _write_stream(cs: ChainSet, fh) -> None:
    header = "chain,iter," + ",".join(f"c{i + 1}" for i in range(cs.p))
    fh.write(header + "\n")
    for k in range(cs.m):
        chain = cs.values[k]
        for t in range(cs.n):
            fields = ",".join(repr(float(v)) for v in chain[t])
            fh.write(f"{k},{t},{fields}\n")


def chains_to_csv(chains) -> str:
    """The chain CSV as a string (handy for stdout and tests)."""
    buf = io.StringIO()
    write_chains(chains, buf)
    return buf.getvalue()


def read_chains(src, truncate_to_min: bool = False) -> ChainSet:
    """Read a chain CSV from ``src`` (path or text file object).

    Chains of unequal length raise UnequalChainLengths unless
    ``truncate_to_min`` cuts every chain to the shortest length.
    """
    if hasattr(src, "read"):
        return _read_stream(src, truncate_to_min)
    with open(src, "r", encoding="utf-8") as fh:
        return _read_stream(fh, truncate_to_min)


def _read_stream(fh, truncate_to_min: bool) -> ChainSet:
    header = fh.readline()
    if not header:
        raise ParseError("empty file", line=1)
    cols = header.strip().split(",")
    if cols[:2] != ["chain", "iter"] or len(cols) < 3:
        raise ParseError(
            f"header must be 'chain,iter,c1,...', got {header.strip()!r}", line=1
        )
    p = len(cols) - 2
    expected = ["chain", "iter"] + [f"c{i + 1}" for i in range(p)]
    if cols != expected:
        raise ParseError(
            f"component columns must be c1..c{p}, got {cols[2:]}", line=1
        )

    chains: list[list[list[float]]] = []
    for lineno, raw in enumerate(fh, start=2):
        if not raw.strip():
            continue
        fields = raw.strip().split(",")
        if len(fields) != 2 + p:
            raise ParseError(
                f"expected {2 + p} fields, got {len(fields)}", line=lineno
            )
        try:
            k = int(fields[0])
            t = int(fields[1])
            row = [float(v) for v in fields[2:]]
        except ValueError as err:
            raise ParseError(str(err), line=lineno) from None
        if not all(np.isfinite(row)):
            raise ParseError("non-finite value", line=lineno)
        if k == len(chains):
            chains.append([])
        elif k != len(chains) - 1:
            raise ParseError(
                f"chain ids must be 0-based, consecutive, and sorted; got {k}",
                line=lineno,
            )
        if t != len(chains[k]):
            raise ParseError(
                f"iterations must be 0-based consecutive within a chain; got {t}",
                line=lineno,
            )
        chains[k].append(row)

    if not chains:
        raise ParseError("file holds no chain rows", line=2)
    lengths = {len(rows) for rows in chains}
    if len(lengths) > 1:
        if not truncate_to_min:
            raise UnequalChainLengths(
                f"chain lengths differ ({sorted(lengths)}); "
                "pass truncate_to_min to cut to the shortest"
            )
        n_min = min(lengths)
        chains = [rows[:n_min] for rows in chains]
    return ChainSet([np.asarray(rows, dtype=float) for rows in chains])
