"""Rank computation for finite bisimulation games.

A game is given by a root position and a function ``moves(pos)`` returning
the Attacker moves available at ``pos``, each as ``(move, responses)`` with
``responses`` a list of ``(response, successor)`` pairs for the Defender.
The rank of a position is the least number of rounds the Attacker needs to
force a position where the Defender cannot respond; positions without a
rank are Defender wins (up to the depth explored).
"""

from collections import deque
from dataclasses import dataclass, field


@dataclass
class GameVerdict:
    bisimilar: bool
    attacker_depth: int = None
    witness: list = None
    method: str = ""
    stats: dict = field(default_factory=dict)

    def to_json(self):
        out = {"verdict": "bisimilar" if self.bisimilar else "not bisimilar",
               "bisimilar": self.bisimilar, "method": self.method,
               "attacker_depth": self.attacker_depth}
        if self.witness is not None:
            out["witness"] = [[side, list(label) if isinstance(label, tuple) else label, tr]
                              for side, label, tr in self.witness]
        out.update(self.stats)
        return out


class Game:
    def __init__(self, root, moves):
        self.root = root
        self.graph = {}
        queue = deque([root])
        self.graph[root] = None
        while queue:
            p = queue.popleft()
            mv = moves(p)
            self.graph[p] = mv
            for _, responses in mv:
                for _, s in responses:
                    if s not in self.graph:
                        self.graph[s] = None
                        queue.append(s)
        self.rank = {}

    def solve(self, depth=None):
        """Compute ranks up to ``depth`` rounds (unbounded when None)."""
        rank = {}
        pending = {}
        preds = {}
        bucket = {1: []}
        for p, mv in self.graph.items():
            for mi, (_, responses) in enumerate(mv):
                succ = {s for _, s in responses}
                pending[(p, mi)] = len(succ)
                if not succ:
                    bucket[1].append(p)
                for s in succ:
                    preds.setdefault(s, []).append((p, mi))
        d = 1
        while bucket.get(d) and (depth is None or d <= depth):
            nxt = bucket.setdefault(d + 1, [])
            for p in bucket[d]:
                if p in rank:
                    continue
                rank[p] = d
                for pp, mi in preds.get(p, ()):
                    pending[(pp, mi)] -= 1
                    if pending[(pp, mi)] == 0 and pp not in rank:
                        nxt.append(pp)
            d += 1
        self.rank = rank
        return rank

    def best_move(self, p):
        """The first Attacker move realising rank(p), with its worst response
        (highest-ranked Defender answer, first among ties), or None."""
        k = self.rank.get(p)
        if k is None:
            return None
        for move, responses in self.graph[p]:
            rs = [self.rank.get(s) for _, s in responses]
            if all(x is not None and x <= k - 1 for x in rs):
                if not responses:
                    return move, None
                best = max(range(len(responses)), key=lambda j: (rs[j], -j))
                return move, responses[best]
        return None

    def line(self, p=None):
        """Principal variation from p: list of (move, response-or-None)."""
        p = self.root if p is None else p
        out = []
        while True:
            bm = self.best_move(p)
            if bm is None:
                return out
            move, resp = bm
            out.append((move, resp))
            if resp is None:
                return out
            p = resp[1]
