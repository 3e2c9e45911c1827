"""Brute-force word oracles that never call the normal-form code they check.

Everything here works on raw letter sequences by exhaustive rewriting, so it is slow
but independent of the ShortLex reduction in ``coxeter``.
"""
from collections import deque
from itertools import product

from graphprod.coxeter import CoxeterGroup


def closure_normal_form(seq, adj):
    """ShortLex-least minimal-length word in the closure of ``seq`` under
    deleting an adjacent equal pair and swapping adjacent commuting letters."""
    start = tuple(seq)
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for i in range(len(s) - 1):
            a, b = s[i], s[i + 1]
            if a == b:
                nxt = s[:i] + s[i + 2:]
            elif adj[a][b]:
                nxt = s[:i] + (b, a) + s[i + 2:]
            else:
                continue
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    best = min(len(s) for s in seen)
    return min(s for s in seen if len(s) == best)


def all_sequences(n_letters, max_len):
    for k in range(max_len + 1):
        yield from product(range(n_letters), repeat=k)


def brute_elements(W: CoxeterGroup, max_len):
    """Group elements reachable from sequences of length ≤ max_len, via the closure oracle."""
    return {closure_normal_form(s, W.adj) for s in all_sequences(W.n, max_len)}


def brute_length(W, seq):
    return len(closure_normal_form(seq, W.adj))


def brute_mul(W, *ws):
    return closure_normal_form(tuple(x for w in ws for x in w), W.adj)


def brute_is_clique_word(W, w):
    return len(set(w)) == len(w) and all(W.adj[a][b] for i, a in enumerate(w) for b in w[i + 1:])


def brute_triple_splittings(W, w):
    words = brute_elements(W, len(w))
    out = set()
    for w1 in words:
        for w2 in words:
            if not brute_is_clique_word(W, w2):
                continue
            for w3 in words:
                if len(w1) + len(w2) + len(w3) != len(w):
                    continue
                if brute_mul(W, w1, w2, w3) == w:
                    out.add((w1, w2, w3))
    return out


def brute_clique_triples(W):
    """Filter all word triples of length ≤ vertex count by the defining conditions."""
    words = brute_elements(W, W.n)
    out = set()
    for u_l, u_r, t in product(words, repeat=3):
        if not brute_is_clique_word(W, brute_mul(W, u_l, t)):
            continue
        if not brute_is_clique_word(W, brute_mul(W, t, u_r)):
            continue
        if len(brute_mul(W, u_l, t, u_r)) == len(u_l) + len(t) + len(u_r):
            out.add((u_l, u_r, t))
    return out


def brute_s_left(W, w):
    """Letters v with |vw| < |w|."""
    return tuple(v for v in range(W.n) if brute_length(W, (v,) + tuple(w)) < len(w))


def brute_s_right(W, w):
    return tuple(v for v in range(W.n) if brute_length(W, tuple(w) + (v,)) < len(w))
