"""Separating sets for disjoint subsets of a finite metric space."""

from __future__ import annotations

from dataclasses import dataclass

from .space import AmbientSpace, ClassLabel, SubsetMask, ValidationError


class ContractViolation(ValueError):
    """Raised when a caller breaks an operation's precondition."""


@dataclass(frozen=True)
class SeparatingSet:
    members: SubsetMask
    label: ClassLabel = ClassLabel()

    def __post_init__(self):
        if self.label.kind != "ambiguous":
            raise ValidationError(f"separating sets carry an ambiguous label, got {self.label.kind!r}")

    def __contains__(self, x) -> bool:
        return x in self.members.members

    def sorted_ids(self) -> list[int]:
        return self.members.sorted_ids()


def separate(space: AmbientSpace, M: SubsetMask, N: SubsetMask, alpha: ClassLabel = ClassLabel()) -> SeparatingSet:
    """Return ``H = {x : d(x, M) < d(x, N)}``.

    The strict inequality puts M inside H and keeps N out of it. An empty M
    yields the empty set, an empty N (with M nonempty) yields the whole space.
    """
    overlap = M.members & N.members
    if overlap:
        raise ContractViolation(f"sets to separate overlap at ids {sorted(overlap)}")
    for S in (M, N):
        if S.space_size != space.size:
            raise ContractViolation(f"subset indexes a space of size {S.space_size}, not {space.size}")

    m, n = M.members, N.members
    if not m:
        return SeparatingSet(space.empty(), alpha)
    if not n:
        return SeparatingSet(space.full(), alpha)

    inside = []
    for x, shells in enumerate(space.neighbour_shells):
        # first shell touching M or N decides; a tie counts against H
        for shell in shells:
            hits_n = not shell.isdisjoint(n)
            if hits_n or not shell.isdisjoint(m):
                if not hits_n:
                    inside.append(x)
                break
    return SeparatingSet(space.subset(inside), alpha)


def complement(space: AmbientSpace, H: SeparatingSet) -> SeparatingSet:
    return SeparatingSet(space.subset(set(space.points) - H.members.members), H.label)
