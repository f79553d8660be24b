#!/usr/bin/env python3
"""Walk one fan through a blow-up, a blow-down and a flop, showing how
the primitive relations change at each step.
"""

from toricfan import (
    Fan,
    blow_down,
    blow_down_candidates,
    blow_up,
    flop,
    is_extremal,
    is_fano,
    is_weak_fano,
    primitive_relation,
    primitive_relations,
    projective_space_fan,
)


def show(label: str, fan: Fan) -> None:
    kind = "Fano" if is_fano(fan) else ("weak Fano" if is_weak_fano(fan) else "not weak Fano")
    print(f"{label}: {fan.n_rays} rays, picard number {fan.picard_number}, {kind}")
    for rel in primitive_relations(fan):
        print(f"    {rel}   degree {rel.degree}")
    print()


def main() -> None:
    p3 = projective_space_fan(3)
    show("projective 3-space", p3)

    up = blow_up(p3, (0, 1))
    show("after blowing up the surface orb{x0,x1}", up)

    down = blow_down(up, blow_down_candidates(up)[0], verified=True)
    assert down == p3
    print("blowing the exceptional relation back down restores the fan exactly\n")

    # a weak Fano fan with a degree-0 two-by-two relation admits a flop
    base = Fan(
        3,
        [(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -1), (1, 1, 1), (0, -1, -1)],
        [(0, 1, 4), (0, 1, 5), (0, 2, 4), (0, 2, 5), (1, 2, 3), (1, 2, 4), (1, 3, 5), (2, 3, 5)],
    )
    fan = blow_up(base, (0, 1))
    show("a weak Fano 3-fold with a floppable relation", fan)

    rel = next(
        r
        for r in primitive_relations(fan)
        if r.degree == 0 and len(r.collection) == 2 and is_extremal(fan, r)
    )
    flipped = flop(fan, rel.collection)
    show(f"after flopping {rel}", flipped)

    assert flop(flipped, rel.sigma) == fan
    print("flopping the flipped relation restores the original fan exactly")


if __name__ == "__main__":
    main()
