"""Author identity resolution: merging (name, email) aliases into canonical developers."""

from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConfigError, IngestionError
from .ingest import CommitRecord


@dataclass(frozen=True)
class AliasMap:
    """Explicit merge directives: (alias email-or-name, canonical email) pairs.

    Directives override heuristics and force the alias into the canonical
    email's group. Matching against aliases is case-insensitive.
    """

    directives: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class CanonicalDeveloper:
    developer_id: str
    primary_email: str
    aliases: frozenset[tuple[str, str]]  # observed (name, email) pairs


ALIAS_HEADER = ("alias_email_or_name", "canonical_email")


def load_alias_map(path: str) -> AliasMap:
    """Read alias directives from a two-column CSV; an optional header row is skipped."""
    directives: list[tuple[str, str]] = []
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            for row_no, row in enumerate(csv.reader(handle), start=1):
                if not row or not any(cell.strip() for cell in row):
                    continue
                if row[0].strip().startswith("#"):
                    continue
                cells = [cell.strip() for cell in row]
                if row_no == 1 and tuple(cells[:2]) == ALIAS_HEADER:
                    continue
                if len(cells) < 2 or not cells[0] or not cells[1]:
                    raise ConfigError(
                        f"alias file {path} row {row_no}: expected alias,canonical_email"
                    )
                directives.append((cells[0], cells[1]))
    except OSError as exc:
        raise IngestionError(f"cannot read alias file {path}: {exc}") from exc
    return AliasMap(tuple(directives))


def normalize_name(name: str) -> str:
    """Lowercase, collapse internal whitespace, and strip diacritics."""
    decomposed = unicodedata.normalize("NFKD", name)
    stripped = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    return " ".join(stripped.lower().split())


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[object, object] = {}

    def find(self, item: object) -> object:
        self.parent.setdefault(item, item)
        while self.parent[item] != item:
            self.parent[item] = self.parent[self.parent[item]]
            item = self.parent[item]
        return item

    def union(self, a: object, b: object) -> None:
        root_a, root_b = self.find(a), self.find(b)
        if root_a != root_b:
            self.parent[root_b] = root_a


def _checked_directives(aliases: AliasMap) -> list[tuple[str, str]]:
    lowered: list[tuple[str, str]] = []
    canonical_for: dict[str, str] = {}
    for alias, canonical in aliases.directives:
        token = alias.lower()
        target = canonical.lower()
        previous = canonical_for.get(token)
        if previous is not None and previous != target:
            raise ConfigError(
                f"alias {alias!r} maps to both {previous!r} and {target!r}"
            )
        canonical_for[token] = target
        lowered.append((token, target))
    return lowered


def resolve_identities(
    commits: Sequence[CommitRecord],
    aliases: AliasMap | None = None,
    name_merging: bool = False,
) -> tuple[dict[str, str], list[CanonicalDeveloper]]:
    """Group observed (name, email) pairs into canonical developers.

    Pairs merge when they share a non-empty lowercased email, when
    ``name_merging`` is on and they share a normalized name, or when an alias
    directive forces them together. The developer id is the lexicographically
    smallest email in the group (directive canonical emails included), or
    ``name:<smallest raw name>`` for groups with no email at all.

    Returns (commit hash -> developer id, roster sorted by developer id).
    """
    directives = _checked_directives(aliases or AliasMap())

    pairs: list[tuple[str, str]] = []
    seen_pairs: set[tuple[str, str]] = set()
    for commit in commits:
        pair = (commit.author_name, commit.author_email)
        if pair not in seen_pairs:
            seen_pairs.add(pair)
            pairs.append(pair)

    uf = _UnionFind()
    for name, email in pairs:
        node = ("pair", name, email)
        uf.find(node)
        if email:
            uf.union(("email", email.lower()), node)
        if name_merging:
            normalized = normalize_name(name)
            if normalized:
                uf.union(("name", normalized), node)

    directive_emails: dict[object, set[str]] = {}
    for token, canonical in directives:
        target = ("email", canonical)
        uf.find(target)
        directive_emails.setdefault(target, set()).add(canonical)
        for name, email in pairs:
            if email.lower() == token or name.lower() == token:
                uf.union(target, ("pair", name, email))

    groups: dict[object, list[tuple[str, str]]] = {}
    for name, email in pairs:
        groups.setdefault(uf.find(("pair", name, email)), []).append((name, email))

    group_of_pair: dict[tuple[str, str], str] = {}
    roster: list[CanonicalDeveloper] = []
    for root, members in groups.items():
        emails = {email.lower() for _, email in members if email}
        for target, canonicals in directive_emails.items():
            if uf.find(target) == root:
                emails.update(canonicals)
        if emails:
            developer_id = min(emails)
            primary_email = developer_id
        else:
            developer_id = "name:" + min(name for name, _ in members)
            primary_email = ""
        roster.append(CanonicalDeveloper(developer_id, primary_email, frozenset(members)))
        for pair in members:
            group_of_pair[pair] = developer_id

    roster.sort(key=lambda dev: dev.developer_id)
    assignments = {
        commit.hash: group_of_pair[(commit.author_name, commit.author_email)]
        for commit in commits
    }
    return assignments, roster


def email_index(roster: Iterable[CanonicalDeveloper]) -> dict[str, str]:
    """Map every observed (lowercased) email, plus each primary email, to its developer id."""
    index: dict[str, str] = {}
    for developer in roster:
        if developer.primary_email:
            index[developer.primary_email] = developer.developer_id
        for _, email in developer.aliases:
            if email:
                index[email.lower()] = developer.developer_id
    return index
