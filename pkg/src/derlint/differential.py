"""Differential analysis of chain validation outcomes.

External validators report one outcome label per (chain, validator)
pair.  A chain is named by its certificate ids joined with '>', so the
chain for a leaf's issuing CA is the same id with the last segment
dropped.  Comparing a chain's outcome with its parent chain's outcome
tells whether the leaf certificate itself caused an error: an error
label that already appears on the parent chain is shadowed by the CA
and says nothing about the leaf.

The cross tabulation then joins those per-validator leaf verdicts
against this package's own reports, counting the certificates we
reject that a given validator still considers fine.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .diagnostics import Code, rejects

CSV_COLUMNS = ("chain_id", "leaf_cert_id", "validator_id", "outcome_label")

RULE_LEAF_VALID = "leaf-valid"
RULE_CA_SHADOWED = "ca-shadowed"
RULE_DISTINCT_ERROR = "distinct-error"

_VALID_LABEL = "valid"


@dataclass(frozen=True)
class ChainOutcomeRecord:
    chain_id: str
    leaf_cert_id: str
    validator_id: str
    outcome_label: str


@dataclass(frozen=True)
class ChainVerdict:
    chain_id: str
    leaf_cert_id: str
    validator_id: str
    verdict: str
    rule_applied: str
    leaf_label: str
    parent_label: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "chain_id": self.chain_id,
            "leaf_cert_id": self.leaf_cert_id,
            "validator_id": self.validator_id,
            "verdict": self.verdict,
            "rule_applied": self.rule_applied,
            "leaf_label": self.leaf_label,
            "parent_label": self.parent_label,
        }


@dataclass(frozen=True)
class MissingCaRecord:
    """A multi-segment chain whose parent chain was never measured."""

    chain_id: str
    validator_id: str
    parent_chain_id: str


@dataclass(frozen=True)
class UnjoinedRecord:
    """A verdict whose leaf certificate has no report on our side."""

    chain_id: str
    validator_id: str
    leaf_cert_id: str


def is_valid_label(label: str) -> bool:
    return label.strip().lower() == _VALID_LABEL


def parent_chain_id(chain_id: str) -> str | None:
    """The chain id with the leaf segment removed, or None for roots."""
    if ">" not in chain_id:
        return None
    return chain_id.rsplit(">", 1)[0]


def classify_differential(leaf_label: str, parent_label: str | None) -> tuple[str, str]:
    """Decide what a chain outcome says about the leaf certificate.

    A validated chain vouches for the leaf.  An error label is pinned on
    the leaf only when the parent chain does not show the identical
    label; the same error on both means the CA alone triggers it.
    """
    if is_valid_label(leaf_label):
        return ("valid", RULE_LEAF_VALID)
    if parent_label is not None and not is_valid_label(parent_label):
        if parent_label.strip() == leaf_label.strip():
            return ("valid", RULE_CA_SHADOWED)
    return ("invalid", RULE_DISTINCT_ERROR)


def _check_chain_id(chain_id: str) -> None:
    if not chain_id or any(not seg for seg in chain_id.split(">")):
        raise ValueError(f"malformed chain id {chain_id!r}")


def read_records(text: str) -> list[ChainOutcomeRecord]:
    """Parse the outcome table from CSV with a fixed header."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty outcome table") from None
    if tuple(h.strip() for h in header) != CSV_COLUMNS:
        raise ValueError(f"outcome table header must be {','.join(CSV_COLUMNS)}")
    records = []
    for i, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ValueError(f"row {i}: expected {len(CSV_COLUMNS)} columns, found {len(row)}")
        record = ChainOutcomeRecord(*(cell.strip() for cell in row))
        _check_chain_id(record.chain_id)
        if not record.validator_id or not record.outcome_label:
            raise ValueError(f"row {i}: validator and outcome must be non-empty")
        records.append(record)
    return records


@dataclass
class AnalysisResult:
    verdicts: list[ChainVerdict] = field(default_factory=list)
    missing: list[MissingCaRecord] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "verdicts": [v.to_json_dict() for v in self.verdicts],
            "missing_parent_chains": [
                {
                    "chain_id": m.chain_id,
                    "validator_id": m.validator_id,
                    "parent_chain_id": m.parent_chain_id,
                }
                for m in self.missing
            ],
        }


def analyze(records: Iterable[ChainOutcomeRecord]) -> AnalysisResult:
    """Classify every measured chain against its parent chain.

    Duplicate (chain, validator) measurements are contradictory input
    and raise.  An errored chain whose parent chain was not measured
    cannot be classified and is reported as missing instead.
    """
    by_key: dict[tuple[str, str], ChainOutcomeRecord] = {}
    ordered: list[ChainOutcomeRecord] = []
    for record in records:
        _check_chain_id(record.chain_id)
        key = (record.chain_id, record.validator_id)
        if key in by_key:
            raise ValueError(f"duplicate outcome for chain {record.chain_id!r} under {record.validator_id!r}")
        by_key[key] = record
        ordered.append(record)

    result = AnalysisResult()
    for record in ordered:
        parent_id = parent_chain_id(record.chain_id)
        parent_label: str | None = None
        if parent_id is not None:
            parent = by_key.get((parent_id, record.validator_id))
            if parent is None:
                if not is_valid_label(record.outcome_label):
                    result.missing.append(
                        MissingCaRecord(
                            chain_id=record.chain_id,
                            validator_id=record.validator_id,
                            parent_chain_id=parent_id,
                        )
                    )
                    continue
            else:
                parent_label = parent.outcome_label
        verdict, rule = classify_differential(record.outcome_label, parent_label)
        result.verdicts.append(
            ChainVerdict(
                chain_id=record.chain_id,
                leaf_cert_id=record.leaf_cert_id,
                validator_id=record.validator_id,
                verdict=verdict,
                rule_applied=rule,
                leaf_label=record.outcome_label.strip(),
                parent_label=None if parent_label is None else parent_label.strip(),
            )
        )
    result.verdicts.sort(key=lambda v: (v.validator_id, v.chain_id))
    result.missing.sort(key=lambda m: (m.validator_id, m.chain_id))
    return result


@dataclass
class CrossTab:
    """Disagreement counts: certificates we reject, others accept."""

    disagreements: dict[str, int] = field(default_factory=dict)
    by_code: dict[str, dict[str, int]] = field(default_factory=dict)
    agreements: int = 0
    accepted_here_rejected_there: int = 0
    unjoined: list[UnjoinedRecord] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "disagreements": dict(sorted(self.disagreements.items())),
            "by_code": {
                v: dict(sorted(codes.items())) for v, codes in sorted(self.by_code.items())
            },
            "agreements": self.agreements,
            "accepted_here_rejected_there": self.accepted_here_rejected_there,
            "unjoined": [
                {"chain_id": u.chain_id, "validator_id": u.validator_id, "leaf_cert_id": u.leaf_cert_id}
                for u in self.unjoined
            ],
        }


def cross_tabulate(
    verdicts: Iterable[ChainVerdict],
    rejecting_codes_by_leaf: Mapping[str, Sequence[str]],
) -> CrossTab:
    """Join validator verdicts against our reports.

    rejecting_codes_by_leaf maps a leaf certificate id to the rejecting
    code names our recognizer found (empty means we accept it).  For
    every verdict that calls a leaf valid while we reject it, one
    disagreement is counted for the validator under each code.
    """
    out = CrossTab()
    for verdict in verdicts:
        ours = rejecting_codes_by_leaf.get(verdict.leaf_cert_id)
        if ours is None:
            out.unjoined.append(
                UnjoinedRecord(
                    chain_id=verdict.chain_id,
                    validator_id=verdict.validator_id,
                    leaf_cert_id=verdict.leaf_cert_id,
                )
            )
            continue
        we_reject = len(ours) > 0
        they_accept = verdict.verdict == "valid"
        if they_accept and we_reject:
            out.disagreements[verdict.validator_id] = out.disagreements.get(verdict.validator_id, 0) + 1
            per_code = out.by_code.setdefault(verdict.validator_id, {})
            for code in ours:
                per_code[code] = per_code.get(code, 0) + 1
        elif we_reject != they_accept:
            # Same answer on both sides: rejected there and here, or
            # accepted there and here.
            out.agreements += 1
        else:
            out.accepted_here_rejected_there += 1
    out.unjoined.sort(key=lambda u: (u.validator_id, u.chain_id))
    return out


def load_report_lines(text: str) -> dict[str, list[str]]:
    """Read our own JSON Lines lint output into the cross_tabulate shape.

    Returns a map from document id to the rejecting code names of that
    report.  Lines that are not report objects (the trailing summary
    line) are skipped.
    """
    out: dict[str, list[str]] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {line_number}: not JSON: {exc}") from None
        if not isinstance(obj, dict) or "id" not in obj:
            continue
        codes = []
        for entry in obj.get("diagnostics", []):
            name = entry.get("code", "")
            try:
                code = Code(name)
            except ValueError:
                raise ValueError(f"line {line_number}: unknown code {name!r}") from None
            if rejects(code):
                codes.append(code.value)
        if obj["id"] in out:
            raise ValueError(f"line {line_number}: duplicate report id {obj['id']!r}")
        out[obj["id"]] = codes
    return out
