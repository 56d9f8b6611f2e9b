"""Compiled inner loops: move generation, scoring and leave evaluation.

Board arrays are 15x15: ``letters`` holds 0..25 or -1 for empty, ``blanks``
marks squares covered by a blank. Racks are length-27 count vectors
(index 26 is the blank).

Moves are enumerated per (row, start column) by walking the word graph
rightwards; down moves reuse the same routine on the transposed board.
Each placement is emitted once:

* a word must start after an empty square (or the edge) and end before
  one, so its extent is maximal;
* a single-tile play that forms words both ways is reported as across.

Per-square codes in ``out_codes`` describe the whole main word:
``0..25`` existing tile, ``32+L`` new natural tile, ``64+L`` new blank as L.
``out_info`` columns: row, col, direction (0 across, 1 down), word length,
tiles placed.
"""

import numpy as np
from numba import njit

N = 15
FULL_MASK = (1 << 26) - 1
NO_ANCHOR = 99
CODE_NEW = 32
CODE_BLANK = 64


@njit(cache=True, inline="always")
def leave_value(rack, letter_values, dup_penalty, is_vowel, balance):
    total = 0.0
    v = 0
    c = 0
    for k in range(27):
        cnt = rack[k]
        if cnt > 0:
            total += cnt * letter_values[k]
            if cnt > 1:
                total += (cnt - 1) * dup_penalty[k]
            if k < 26:
                if is_vowel[k]:
                    v += cnt
                else:
                    c += cnt
    return total + balance[v, c]


@njit(cache=True)
def _cross_checks(letters, blanks, values, child, terminal, edge_mask):
    cmask = np.zeros((N, N), dtype=np.int64)
    csum = np.zeros((N, N), dtype=np.int64)
    has_cross = np.zeros((N, N), dtype=np.bool_)
    for r in range(N):
        for c in range(N):
            if letters[r, c] >= 0:
                continue
            up = r
            while up > 0 and letters[up - 1, c] >= 0:
                up -= 1
            down = r
            while down < N - 1 and letters[down + 1, c] >= 0:
                down += 1
            if up == r and down == r:
                cmask[r, c] = FULL_MASK
                continue
            has_cross[r, c] = True
            s = 0
            node = 0
            for k in range(up, r):
                lt = letters[k, c]
                if not blanks[k, c]:
                    s += values[lt]
                if node >= 0:
                    node = child[node, lt]
            for k in range(r + 1, down + 1):
                if not blanks[k, c]:
                    s += values[letters[k, c]]
            csum[r, c] = s
            m = 0
            if node >= 0:
                em = edge_mask[node]
                for lt in range(26):
                    if (em >> lt) & 1:
                        n2 = child[node, lt]
                        for k in range(r + 1, down + 1):
                            n2 = child[n2, letters[k, c]]
                            if n2 < 0:
                                break
                        if n2 >= 0 and terminal[n2]:
                            m |= 1 << lt
            cmask[r, c] = m
    return cmask, csum, has_cross


@njit(cache=True)
def _anchors(letters, board_empty):
    anchor = np.zeros((N, N), dtype=np.bool_)
    if board_empty:
        anchor[7, 7] = True
    else:
        for r in range(N):
            for c in range(N):
                if letters[r, c] >= 0:
                    continue
                if ((r > 0 and letters[r - 1, c] >= 0) or (r < N - 1 and letters[r + 1, c] >= 0)
                        or (c > 0 and letters[r, c - 1] >= 0) or (c < N - 1 and letters[r, c + 1] >= 0)):
                    anchor[r, c] = True
    nxt = np.full((N, N + 1), NO_ANCHOR, dtype=np.int64)
    for r in range(N):
        for c in range(N - 1, -1, -1):
            nxt[r, c] = c if anchor[r, c] else nxt[r, c + 1]
    return anchor, nxt


@njit(cache=True, inline="always")
def _record(r, start, end, direction, placed, single_col, score, rack, codes, has_cross,
            letter_values, dup_penalty, is_vowel, balance,
            out_info, out_codes, out_score, out_leave, n):
    if placed == 1 and direction == 1 and has_cross[r, single_col]:
        return n
    if n < out_info.shape[0]:
        if direction == 0:
            out_info[n, 0] = r
            out_info[n, 1] = start
        else:
            out_info[n, 0] = start
            out_info[n, 1] = r
        out_info[n, 2] = direction
        out_info[n, 3] = end - start + 1
        out_info[n, 4] = placed
        for k in range(start, end + 1):
            out_codes[n, k - start] = codes[k]
        out_score[n] = score
        out_leave[n] = leave_value(rack, letter_values, dup_penalty, is_vowel, balance)
    return n + 1


@njit(cache=True)
def _scan_row(r, s, ntiles, rack, letters, blanks, lmul, wmulgrid, values, child, terminal,
              edge_mask, cmask, csum, has_cross, anchor, next_anchor, direction, rack_size, bingo,
              letter_values, dup_penalty, is_vowel, balance,
              out_info, out_codes, out_score, out_leave, n):
    """Depth-first search over words starting at column ``s`` of row ``r``.

    One stack slot per column holds the search state on entry to that
    square; ``cand`` enumerates (letter, natural/blank) choices as
    ``2 * letter + kind``.
    """
    codes = np.zeros(N, dtype=np.int64)
    node = np.zeros(N + 1, dtype=np.int64)
    placed = np.zeros(N + 1, dtype=np.int64)
    msum = np.zeros(N + 1, dtype=np.int64)
    wmul = np.ones(N + 1, dtype=np.int64)
    ctot = np.zeros(N + 1, dtype=np.int64)
    conn = np.zeros(N + 1, dtype=np.bool_)
    scol = np.full(N + 1, -1, dtype=np.int64)
    cand = np.zeros(N + 1, dtype=np.int64)
    allowed = np.zeros(N + 1, dtype=np.int64)
    undo = np.full(N + 1, -1, dtype=np.int64)

    c = s
    while c >= s:
        if undo[c] >= 0:
            rack[undo[c]] += 1
            undo[c] = -1
        pl = placed[c]
        if letters[r, c] >= 0:
            if cand[c] > 0:
                c -= 1
                continue
            cand[c] = 1
            lt = letters[r, c]
            nxt = child[node[c], lt]
            if nxt < 0:
                c -= 1
                continue
            codes[c] = lt
            ms = msum[c] + (0 if blanks[r, c] else values[lt])
            at_end = c == N - 1 or letters[r, c + 1] < 0
            if at_end and pl > 0 and terminal[nxt]:
                score = ms * wmul[c] + ctot[c]
                if pl == rack_size:
                    score += bingo
                n = _record(r, s, c, direction, pl, scol[c], score, rack, codes, has_cross,
                            letter_values, dup_penalty, is_vowel, balance,
                            out_info, out_codes, out_score, out_leave, n)
            if c < N - 1 and (not at_end or pl < ntiles):
                d = c + 1
                node[d] = nxt
                placed[d] = pl
                msum[d] = ms
                wmul[d] = wmul[c]
                ctot[d] = ctot[c]
                conn[d] = True
                scol[d] = scol[c]
                cand[d] = 0
                undo[d] = -1
                c = d
                continue
            c -= 1
            continue

        if cand[c] == 0:
            ok = pl < ntiles
            if ok and not conn[c]:
                a = next_anchor[r, c]
                ok = a != NO_ANCHOR and a - c + 1 <= ntiles - pl
            allowed[c] = (edge_mask[node[c]] & cmask[r, c]) if ok else 0
        al = allowed[c]
        k = cand[c]
        found = -1
        while k < 52:
            lt = k >> 1
            if (al >> lt) & 1:
                if k & 1:
                    if rack[26] > 0:
                        found = k
                        break
                elif rack[lt] > 0:
                    found = k
                    break
                k += 1
            else:
                k = (lt + 1) << 1
        if found < 0:
            c -= 1
            continue
        cand[c] = found + 1
        lt = found >> 1
        if found & 1:
            rack[26] -= 1
            undo[c] = 26
            tv = 0
            codes[c] = CODE_BLANK + lt
        else:
            rack[lt] -= 1
            undo[c] = lt
            tv = values[lt]
            codes[c] = CODE_NEW + lt
        nxt = child[node[c], lt]
        lv = tv * lmul[r, c]
        wm = wmul[c] * wmulgrid[r, c]
        ct = ctot[c]
        if has_cross[r, c]:
            ct += (csum[r, c] + lv) * wmulgrid[r, c]
        cn = conn[c] or anchor[r, c]
        sc = c if pl == 0 else scol[c]
        ms = msum[c] + lv
        at_end = c == N - 1 or letters[r, c + 1] < 0
        if at_end and cn and terminal[nxt]:
            score = ms * wm + ct
            if pl + 1 == rack_size:
                score += bingo
            n = _record(r, s, c, direction, pl + 1, sc, score, rack, codes, has_cross,
                        letter_values, dup_penalty, is_vowel, balance,
                        out_info, out_codes, out_score, out_leave, n)
        if c < N - 1 and (not at_end or pl + 1 < ntiles):
            d = c + 1
            node[d] = nxt
            placed[d] = pl + 1
            msum[d] = ms
            wmul[d] = wm
            ctot[d] = ct
            conn[d] = cn
            scol[d] = sc
            cand[d] = 0
            undo[d] = -1
            c = d
    return n


@njit(cache=True)
def generate_moves(letters, blanks, lmul, wmulgrid, values, child, terminal, edge_mask,
                   rack, rack_size, bingo, letter_values, dup_penalty, is_vowel, balance,
                   out_info, out_codes, out_score, out_leave):
    """Fill the output arrays with every legal placement; return the count.

    If the count exceeds the output capacity, only the first rows are
    written and the caller should retry with larger buffers.
    """
    ntiles = 0
    for k in range(27):
        ntiles += rack[k]
    board_empty = True
    for r in range(N):
        for c in range(N):
            if letters[r, c] >= 0:
                board_empty = False
    work = rack.copy()
    n = 0
    if ntiles == 0:
        return n
    for direction in range(2):
        if direction == 0:
            L = letters
            B = blanks
            LM = lmul
            WM = wmulgrid
        else:
            L = np.ascontiguousarray(letters.T)
            B = np.ascontiguousarray(blanks.T)
            LM = np.ascontiguousarray(lmul.T)
            WM = np.ascontiguousarray(wmulgrid.T)
        cmask, csum, has_cross = _cross_checks(L, B, values, child, terminal, edge_mask)
        anchor, next_anchor = _anchors(L, board_empty)
        for r in range(N):
            for s in range(N):
                if s > 0 and L[r, s - 1] >= 0:
                    continue
                if L[r, s] < 0:
                    a = next_anchor[r, s]
                    if a == NO_ANCHOR or a - s + 1 > ntiles:
                        continue
                n = _scan_row(r, s, ntiles, work, L, B, LM, WM, values, child, terminal, edge_mask,
                              cmask, csum, has_cross, anchor, next_anchor, direction, rack_size, bingo,
                              letter_values, dup_penalty, is_vowel, balance,
                              out_info, out_codes, out_score, out_leave, n)
    return n
