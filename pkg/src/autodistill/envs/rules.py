"""Item rules of the three tasks.

Every rule set works on a small integer inventory and reacts to the agent
arriving at an object.  ``arrive`` returns the proposition bits that fire
and the number of items gained (each pays +1).  Grid and continuous worlds
share these rules; they differ only in movement and in what counts as
arriving at an object.
"""

from __future__ import annotations

from .objectives import GOLD_LEVELS, objective

WOOD_CAP = 2
TOOLS_GOAL = 3
IRON_FOR_PICKAXE = 30


def _scaled(at7: int, at10: int, area: float) -> int:
    """Object count interpolated between the 7x7 and 10x10 defaults."""
    return max(1, round(at7 + (at10 - at7) * (area - 49) / 51))


class Rules:
    kind = ""
    slots: tuple[str, ...] = ()
    rewarded: tuple[str, ...] = ()
    # features are inventory counters divided by these scales (then clipped to 1)
    scales: tuple[float, ...] = ()

    def __init__(self):
        self.ap = objective(self.kind).ap
        self.bits = {name: self.ap.bit(name) for name in self.ap}

    def objects(self, area: float) -> list[str]:
        raise NotImplementedError

    def fresh(self) -> list[int]:
        return [0] * len(self.slots)

    def arrive(self, obj: str, inv: list[int]) -> tuple[int, int]:
        raise NotImplementedError

    def level(self, inv: list[int]) -> int:
        """Bits of propositions that hold while a condition persists."""
        return 0

    def features(self, inv) -> list[float]:
        return [min(v / s, 1.0) for v, s in zip(inv, self.scales)]


class BlindCraftsman(Rules):
    kind = "blind_craftsman"
    slots = ("wood", "tools")
    rewarded = ("wood", "tools")
    scales = (WOOD_CAP, TOOLS_GOAL)

    def objects(self, area):
        return ["wood"] * _scaled(5, 8, area) + ["factory", "home"]

    def arrive(self, obj, inv):
        b = self.bits
        if obj == "wood":
            if inv[0] < WOOD_CAP:
                inv[0] += 1
                return b["wood"], 1
            return 0, 0
        if obj == "factory":
            # carried wood becomes tools until the goal is met; the rest stays carried
            made = min(inv[0], TOOLS_GOAL - inv[1])
            inv[1] += made
            inv[0] -= made
            return b["factory"], made
        if obj == "home":
            return b["home"], 0
        return 0, 0

    def level(self, inv):
        return self.bits["tools3"] if inv[1] >= TOOLS_GOAL else 0


class DungeonQuest(Rules):
    kind = "dungeon_quest"
    slots = ("key", "shield", "sword", "dragon")
    rewarded = ("key", "shield", "sword")
    scales = (1, 1, 1, 1)

    def objects(self, area):
        return ["key", "chest", "shield", "dragon"]

    def arrive(self, obj, inv):
        b = self.bits
        if obj == "key" and not inv[0]:
            inv[0] = 1
            return b["key"], 1
        if obj == "shield" and not inv[1]:
            inv[1] = 1
            return b["shield"], 1
        if obj == "chest" and inv[0] and not inv[2]:
            inv[2] = 1
            return b["sword"], 1
        if obj == "dragon" and inv[1] and inv[2] and not inv[3]:
            inv[3] = 1
            return b["dragon"], 0
        return 0, 0


class DiamondMine(Rules):
    kind = "diamond_mine"
    slots = ("wood", "iron", "gold", "diamond", "pickaxe")
    rewarded = ("wood", "iron", "gold", "diamond")
    scales = (1, IRON_FOR_PICKAXE, GOLD_LEVELS, 1, 1)

    def objects(self, area):
        n = _scaled(3, 4, area)
        return ["wood", "diamond"] + ["gold"] * n + ["iron"] * n + ["home"]

    def arrive(self, obj, inv):
        b = self.bits
        wood, iron, gold, diamond, pickaxe = inv
        bits, items = 0, 0
        if obj == "wood" and not wood and not gold:
            inv[0] = 1
            bits, items = b["wood"], 1
        elif obj == "iron" and iron < IRON_FOR_PICKAXE:
            inv[1] += 1
            items = 1
        elif obj == "gold" and gold < GOLD_LEVELS and not wood and not diamond:
            inv[2] += 1
            bits, items = b[f"gold{inv[2]}"], 1
        elif obj == "diamond" and pickaxe and not diamond and not gold:
            inv[3] = 1
            bits, items = b["diamond"], 1
        elif obj == "home" and (diamond or gold >= GOLD_LEVELS):
            bits = b["home"]
        if not inv[4] and inv[0] and inv[1] >= IRON_FOR_PICKAXE:
            inv[4] = 1  # crafted on the spot, no reward
        return bits, items


RULES = {r.kind: r for r in (BlindCraftsman, DungeonQuest, DiamondMine)}


def rules_for(kind: str) -> Rules:
    return RULES[kind]()
