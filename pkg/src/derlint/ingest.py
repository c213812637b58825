"""Input handling and the linting pipeline.

Container handling is as strict as the certificate grammar itself: the
armored text form is recognized exactly (fixed labels, canonical base64,
64-column body lines), and anything else must already be the raw binary
form.  Container problems are ordinary diagnostics, so a batch over a
mixed directory never aborts on one bad file.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .der import CONTENT_MAX
from .diagnostics import Code, Diagnostic, Histogram, diag
from .grammar import ParsedCertificate, parse_certificate
from .registry import Registry

_BEGIN = "-----BEGIN CERTIFICATE-----"
_END = "-----END CERTIFICATE-----"
_BEGIN_PREFIX = "-----BEGIN "
_MAX_LINE = 64


@dataclass
class LintOptions:
    fmt: str = "auto"  # pem | der | auto
    max_size: int = CONTENT_MAX
    registry: Registry | None = None
    timing: bool = True


@dataclass
class InputDocument:
    """One certificate candidate extracted from a file.

    data holds the binary certificate when the container was sound;
    otherwise container_error carries the diagnostic and data is empty.
    """

    doc_id: str
    data: bytes = b""
    container_error: Diagnostic | None = None


@dataclass
class CertificateReport:
    doc_id: str
    sha256: str
    outcome: str
    size_bytes: int
    parse_time_micros: int | None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    parsed: ParsedCertificate | None = None

    def to_json_dict(self) -> dict:
        out = {
            "id": self.doc_id,
            "sha256": self.sha256,
            "outcome": self.outcome,
            "size_bytes": self.size_bytes,
            "diagnostics": [d.to_json_dict() for d in self.diagnostics],
        }
        if self.parse_time_micros is not None:
            out["parse_time_micros"] = self.parse_time_micros
        return out


def _armor_error(code: Code, message: str, line: int | None = None) -> Diagnostic:
    where = f"line {line}" if line is not None else ""
    return diag(code, path="container", message=f"{message} ({where})" if where else message)


def _split_pem(text: str) -> list[bytes | Diagnostic]:
    """Split armored text into decoded blocks, in order of appearance.

    Each element is either the decoded bytes of one block or the
    diagnostic that block (or the surrounding layout) produced.
    """
    out: list[bytes | Diagnostic] = []
    lines = text.split("\n")
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i].rstrip("\r")
        if line.strip() == "":
            i += 1
            continue
        if not line.startswith(_BEGIN_PREFIX):
            out.append(_armor_error(Code.BAD_PEM_ARMOR, f"text outside an armored block: {line[:40]!r}", i + 1))
            return out
        if line != _BEGIN:
            out.append(_armor_error(Code.UNRECOGNIZED_FORMAT, f"unsupported armor label {line!r}", i + 1))
            return out
        i += 1
        body: list[str] = []
        closed = False
        while i < n:
            line = lines[i].rstrip("\r")
            if line == _END:
                closed = True
                i += 1
                break
            if line.startswith("-----"):
                out.append(_armor_error(Code.BAD_PEM_ARMOR, f"unexpected armor line {line!r}", i + 1))
                return out
            if line.strip() == "":
                out.append(_armor_error(Code.BAD_PEM_ARMOR, "blank line inside an armored block", i + 1))
                return out
            if len(line) > _MAX_LINE:
                out.append(_armor_error(Code.BAD_PEM_ARMOR, f"body line of {len(line)} columns", i + 1))
                return out
            body.append(line)
            i += 1
        if not closed:
            out.append(_armor_error(Code.BAD_PEM_ARMOR, "armored block never closed"))
            return out
        joined = "".join(body)
        try:
            decoded = base64.b64decode(joined, validate=True)
        except (binascii.Error, ValueError) as exc:
            out.append(_armor_error(Code.BAD_BASE64, f"base64 body rejected: {exc}"))
            continue
        if base64.b64encode(decoded).decode("ascii") != joined:
            out.append(_armor_error(Code.BAD_BASE64, "base64 body is not canonical"))
            continue
        out.append(decoded)
    return out


def load_documents(raw: bytes, doc_id: str, fmt: str = "auto") -> list[InputDocument]:
    """Turn one file's bytes into certificate candidates.

    Armored files may carry several certificates; ids then gain a #k
    suffix in order of appearance.  Binary input is always one document.
    """
    if fmt not in ("auto", "pem", "der"):
        raise ValueError(f"unknown input format {fmt!r}")

    if fmt == "auto":
        head = raw.lstrip(b" \t\r\n")
        if head.startswith(b"-----BEGIN"):
            fmt = "pem"
        elif head[:1] == b"\x30":
            fmt = "der"
        else:
            return [
                InputDocument(
                    doc_id=doc_id,
                    container_error=diag(
                        Code.UNRECOGNIZED_FORMAT,
                        path="container",
                        message="input is neither armored text nor a DER SEQUENCE",
                    ),
                )
            ]

    if fmt == "der":
        return [InputDocument(doc_id=doc_id, data=raw)]

    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError:
        return [
            InputDocument(
                doc_id=doc_id,
                container_error=diag(Code.BAD_PEM_ARMOR, path="container", message="armored input must be ASCII"),
            )
        ]
    blocks = _split_pem(text)
    if not blocks:
        return [
            InputDocument(
                doc_id=doc_id,
                container_error=diag(Code.BAD_PEM_ARMOR, path="container", message="no armored block found"),
            )
        ]
    many = len(blocks) > 1
    docs = []
    for k, block in enumerate(blocks, 1):
        sub_id = f"{doc_id}#{k}" if many else doc_id
        if isinstance(block, Diagnostic):
            docs.append(InputDocument(doc_id=sub_id, container_error=block))
        else:
            docs.append(InputDocument(doc_id=sub_id, data=block))
    return docs


def load_input(raw: bytes, doc_id: str, fmt: str = "auto") -> InputDocument:
    """Single-document variant of load_documents."""
    docs = load_documents(raw, doc_id, fmt)
    if len(docs) != 1:
        raise ValueError(f"{doc_id}: expected one certificate, found {len(docs)}")
    return docs[0]


def lint(doc: InputDocument, options: LintOptions | None = None) -> CertificateReport:
    """Run the recognizer over one document and build its report."""
    options = options or LintOptions()
    digest = hashlib.sha256(doc.data).hexdigest()

    if doc.container_error is not None:
        diagnostics = [doc.container_error]
        return CertificateReport(
            doc_id=doc.doc_id,
            sha256=digest,
            outcome="rejected",
            size_bytes=len(doc.data),
            parse_time_micros=0 if options.timing else None,
            diagnostics=diagnostics,
        )

    started = time.perf_counter_ns()
    if len(doc.data) > options.max_size:
        parsed = ParsedCertificate(raw=doc.data)
        parsed.diagnostics.append(
            diag(
                Code.LENGTH_TOO_LARGE,
                path="certificate",
                offset=options.max_size,
                message=f"input of {len(doc.data)} bytes exceeds the {options.max_size} byte bound",
            )
        )
    else:
        parsed = parse_certificate(doc.data, options.registry)
    elapsed_micros = (time.perf_counter_ns() - started) // 1000

    return CertificateReport(
        doc_id=doc.doc_id,
        sha256=digest,
        outcome="accepted" if parsed.accepted else "rejected",
        size_bytes=len(doc.data),
        parse_time_micros=elapsed_micros if options.timing else None,
        diagnostics=list(parsed.diagnostics),
        parsed=parsed,
    )


def lint_bytes(data: bytes, doc_id: str = "<input>", options: LintOptions | None = None) -> CertificateReport:
    options = options or LintOptions()
    return lint(load_input(data, doc_id, options.fmt), options)


@dataclass
class BatchResult:
    reports: list[CertificateReport] = field(default_factory=list)
    histogram: Histogram = field(default_factory=Histogram)
    io_errors: list[tuple[str, str]] = field(default_factory=list)

    @property
    def any_rejected(self) -> bool:
        return any(r.outcome == "rejected" for r in self.reports)


def _collect_paths(inputs: list[str]) -> tuple[list[str], list[tuple[str, str]]]:
    files: list[str] = []
    errors: list[tuple[str, str]] = []
    for item in inputs:
        if os.path.isdir(item):
            for dirpath, dirnames, filenames in os.walk(item):
                dirnames.sort()
                for name in sorted(filenames):
                    files.append(os.path.join(dirpath, name))
        elif os.path.exists(item):
            files.append(item)
        else:
            errors.append((item, "no such file or directory"))
    return files, errors


def run_batch(inputs: list[str], options: LintOptions | None = None, jobs: int = 1) -> BatchResult:
    """Lint every file under the given paths.

    Directories are walked in sorted order.  A file that cannot be read
    is recorded as an IO error and skipped; it never aborts the batch.
    """
    options = options or LintOptions()
    result = BatchResult()
    files, missing = _collect_paths(inputs)
    result.io_errors.extend(missing)

    docs: list[InputDocument] = []
    for path in files:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            result.io_errors.append((path, str(exc)))
            continue
        docs.extend(load_documents(raw, path, options.fmt))

    if jobs > 1 and len(docs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(lambda d: lint(d, options), docs))
    else:
        reports = [lint(d, options) for d in docs]

    reports.sort(key=lambda r: r.doc_id)
    result.reports = reports
    for report in reports:
        result.histogram.add(report.diagnostics)
    return result
