#!/usr/bin/env python3
"""Writes synthetic100.wtb and prints the dataset counts it should produce.

The rules, symmetries and dataset arithmetic here are an independent
implementation (coordinate lists, Python sets); the C++ pipeline is checked
against the numbers this script prints.

    python3 make_synthetic_wtb.py synthetic100.wtb
"""

import random
import struct
import sys
from collections import Counter

EMPTY, BLACK, WHITE = 0, 1, 2
DIRS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def initial():
    cells = [EMPTY] * 64
    cells[3 * 8 + 3] = WHITE  # d4
    cells[3 * 8 + 4] = BLACK  # e4
    cells[4 * 8 + 3] = BLACK  # d5
    cells[4 * 8 + 4] = WHITE  # e5
    return cells


def other(side):
    return BLACK if side == WHITE else WHITE


def flips(cells, side, idx):
    if cells[idx] != EMPTY:
        return []
    r0, c0 = divmod(idx, 8)
    out = []
    for dr, dc in DIRS:
        run = []
        r, c = r0 + dr, c0 + dc
        while 0 <= r < 8 and 0 <= c < 8 and cells[r * 8 + c] == other(side):
            run.append(r * 8 + c)
            r, c = r + dr, c + dc
        if run and 0 <= r < 8 and 0 <= c < 8 and cells[r * 8 + c] == side:
            out.extend(run)
    return out


def moves(cells, side):
    return [i for i in range(64) if flips(cells, side, i)]


def play(cells, side, idx):
    n = list(cells)
    for f in flips(cells, side, idx):
        n[f] = side
    n[idx] = side
    return n


def symmetric(idx, s):
    r, c = divmod(idx, 8)
    table = [
        (r, c), (c, 7 - r), (7 - r, 7 - c), (7 - c, r),
        (7 - r, c), (r, 7 - c), (c, r), (7 - c, 7 - r),
    ]
    nr, nc = table[s]
    return nr * 8 + nc


def play_game(chooser, rng, stop_after=None):
    """Returns (list of (cells, side, move)), final cells)."""
    cells, side = initial(), BLACK
    record = []
    while True:
        ms = moves(cells, side)
        if not ms:
            if not moves(cells, other(side)):
                break
            side = other(side)
            continue
        if stop_after is not None and len(record) >= stop_after:
            break
        m = chooser(cells, side, ms, len(record), rng)
        record.append((cells, side, m))
        cells = play(cells, side, m)
        side = other(side)
    return record, cells


def random_chooser(cells, side, ms, ply, rng):
    return rng.choice(ms)


def greedy_after(opening_plies):
    # random for the first plies, then most flips (lowest index on ties)
    def choose(cells, side, ms, ply, rng):
        if ply < opening_plies:
            return rng.choice(ms)
        return max(ms, key=lambda m: (len(flips(cells, side, m)), -m))
    return choose


def score_with_empties(cells):
    b = cells.count(BLACK)
    w = cells.count(WHITE)
    e = 64 - b - w
    if b > w:
        return b + e
    if b == w:
        return b + e // 2
    return b


def move_byte(idx):
    r, c = divmod(idx, 8)
    return 10 * (r + 1) + (c + 1)


def main(path):
    rng = random.Random(20240611)
    games = []
    for _ in range(55):
        games.append(play_game(random_chooser, rng))
    for i in range(35):
        games.append(play_game(greedy_after(2 + i % 3), rng))
    for i in range(10):
        games.append(play_game(random_chooser, rng, stop_after=20 + 3 * i))

    header = struct.pack("<BBBBIHHBBBB", 20, 24, 6, 11, len(games), 0, 2024, 8, 0, 22, 0)
    body = b""
    triples = []
    passes = 0
    for gi, (record, final) in enumerate(games):
        mv = [move_byte(m) for _, _, m in record] + [0] * (60 - len(record))
        body += struct.pack("<HHHBB", 1 + gi % 7, 100 + gi, 200 + gi, score_with_empties(final), 32) + bytes(mv)
        for k, (cells, side, m) in enumerate(record):
            if k > 0 and record[k - 1][1] == side:
                passes += 1
            mover = tuple(i for i in range(64) if cells[i] == side)
            opp = tuple(i for i in range(64) if cells[i] == other(side))
            triples.append((mover, opp, m))
    with open(path, "wb") as f:
        f.write(header + body)

    def images(t):
        mover, opp, m = t
        for s in range(8):
            yield (tuple(sorted(symmetric(i, s) for i in mover)),
                   tuple(sorted(symmetric(i, s) for i in opp)),
                   symmetric(m, s))

    def bound(ts):
        per_board = {}
        for mover, opp, m in ts:
            per_board.setdefault((mover, opp), Counter())[m] += 1
        return 100.0 * sum(max(c.values()) for c in per_board.values()) / len(ts)

    unique = set(triples)
    original_s = [im for t in triples for im in images(t)]
    unique_s = {im for t in unique for im in images(t)}
    print(f"games={len(games)}")
    print(f"pass_events={passes}")
    print(f"original={len(triples)}")
    print(f"unique={len(unique)}")
    print(f"original_s={len(original_s)}")
    print(f"unique_s={len(unique_s)}")
    print(f"bound_original={bound(triples):.6f}")
    print(f"bound_unique={bound(list(unique)):.6f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "synthetic100.wtb")
