"""Certificate extension recognition.

The extension block is the part of a certificate that regular or
context-free machinery cannot finish alone: each extnValue is an OCTET
STRING whose payload must itself parse under the grammar selected by the
extnID.  Payload parsing therefore re-enters the structural layer on the
payload slice.  The outer walk deliberately does not require extension
OIDs to be unique while scanning; uniqueness is a separate post-check so
a duplicated extension is reported as exactly that instead of a generic
shape mismatch.

All bodies listed in the extension registry are parsed in full.  Unknown
extnIDs keep their payload opaque; their critical flag is surfaced so the
caller can decide what an unrecognized critical extension means.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .der import TlvNode, parse_tlv_tree
from .diagnostics import Code, Diagnostic, RecognitionError, diag
from .names import parse_name
from .registry import Registry
from .values import (
    TAG_BIT_STRING,
    TAG_BMP_STRING,
    TAG_BOOLEAN,
    TAG_IA5_STRING,
    TAG_INTEGER,
    TAG_OCTET_STRING,
    TAG_OID,
    TAG_SEQUENCE,
    TAG_SET,
    TAG_UTF8_STRING,
    TAG_VISIBLE_STRING,
    decode_bit_string,
    decode_boolean,
    decode_integer,
    decode_oid,
    dotted,
    validate_charset,
)

OID_AUTHORITY_KEY_IDENTIFIER = "2.5.29.35"
OID_SUBJECT_KEY_IDENTIFIER = "2.5.29.14"
OID_KEY_USAGE = "2.5.29.15"
OID_CERTIFICATE_POLICIES = "2.5.29.32"
OID_POLICY_MAPPINGS = "2.5.29.33"
OID_SUBJECT_ALT_NAME = "2.5.29.17"
OID_ISSUER_ALT_NAME = "2.5.29.18"
OID_SUBJECT_DIRECTORY_ATTRIBUTES = "2.5.29.9"
OID_BASIC_CONSTRAINTS = "2.5.29.19"
OID_NAME_CONSTRAINTS = "2.5.29.30"
OID_POLICY_CONSTRAINTS = "2.5.29.36"
OID_EXTENDED_KEY_USAGE = "2.5.29.37"
OID_CRL_DISTRIBUTION_POINTS = "2.5.29.31"
OID_INHIBIT_ANY_POLICY = "2.5.29.54"
OID_FRESHEST_CRL = "2.5.29.46"
OID_AUTHORITY_INFO_ACCESS = "1.3.6.1.5.5.7.1.1"
OID_SUBJECT_INFO_ACCESS = "1.3.6.1.5.5.7.1.11"

_OID_QT_CPS = "1.3.6.1.5.5.7.2.1"
_OID_QT_UNOTICE = "1.3.6.1.5.5.7.2.2"

KEY_USAGE_BITS = (
    "digitalSignature",
    "nonRepudiation",
    "keyEncipherment",
    "dataEncipherment",
    "keyAgreement",
    "keyCertSign",
    "cRLSign",
    "encipherOnly",
    "decipherOnly",
)
BIT_KEY_CERT_SIGN = 5

# Key usage bits a public key algorithm family cannot honor.
_FORBIDDEN_USAGE = {
    "rsa": frozenset(),
    "dh": frozenset({0, 1, 5, 6}),
    "kea": frozenset({0, 1, 5, 6}),
    "dsa": frozenset({2, 3}),
    "ec": frozenset({2, 3}),
    "gost": frozenset({2, 3}),
}

_REASON_FLAG_COUNT = 9  # ReasonFlags named bits

_DISPLAY_TEXT_TAGS = frozenset(
    {TAG_IA5_STRING, TAG_VISIBLE_STRING, TAG_BMP_STRING, TAG_UTF8_STRING}
)


@dataclass
class KeyUsageValue:
    bits: frozenset[int]

    def has(self, bit: int) -> bool:
        return bit in self.bits

    def names(self) -> list[str]:
        return [KEY_USAGE_BITS[b] for b in sorted(self.bits) if b < len(KEY_USAGE_BITS)]


@dataclass
class BasicConstraintsValue:
    ca: bool = False
    ca_explicit: bool = False
    path_len: int | None = None


@dataclass
class AkiValue:
    key_id: bytes | None = None
    has_issuer: bool = False
    has_serial: bool = False


@dataclass
class GeneralNameValue:
    kind: str
    text: str | None = None
    raw: bytes = b""


@dataclass
class ExtensionEntry:
    index: int
    oid: str | None
    critical: bool
    node: TlvNode
    payload: bytes = b""
    payload_offset: int = 0
    body: object | None = None
    known: bool = False


@dataclass
class ExtensionSet:
    entries: list[ExtensionEntry] = field(default_factory=list)

    def get(self, oid: str) -> ExtensionEntry | None:
        for e in self.entries:
            if e.oid == oid:
                return e
        return None

    def has(self, oid: str) -> bool:
        return self.get(oid) is not None

    def unknown_critical_oids(self) -> list[str]:
        return [e.oid for e in self.entries if e.critical and not e.known and e.oid]


def parse_extensions(
    wrapper: TlvNode,
    reg: Registry,
    diags: list[Diagnostic],
    path: str = "tbsCertificate.extensions",
) -> ExtensionSet | None:
    """Parse the [3] EXPLICIT extensions wrapper into an ExtensionSet.

    Returns None when the wrapper itself has the wrong shape.  Individual
    extension entries that fail to parse are recorded and skipped; the
    rest of the block is still examined.
    """
    if len(wrapper.children) != 1 or not wrapper.children[0].is_universal(TAG_SEQUENCE, True):
        diags.append(
            diag(
                Code.STRUCTURAL_MISMATCH,
                path=path,
                offset=wrapper.header_offset,
                message="extensions wrapper must hold exactly one SEQUENCE",
            )
        )
        return None
    seq = wrapper.children[0]
    out = ExtensionSet()
    if not seq.children:
        diags.append(
            diag(Code.EMPTY_EXTENSION_SEQUENCE, path=path, offset=seq.header_offset)
        )
        return out
    for i, node in enumerate(seq.children):
        entry = _parse_extension_entry(node, i, reg, diags, f"{path}[{i}]")
        if entry is not None:
            out.entries.append(entry)
    # Uniqueness is checked over the finished scan: report the second and
    # later occurrences of each OID.
    seen: set[str] = set()
    for e in out.entries:
        if e.oid is None:
            continue
        if e.oid in seen:
            diags.append(
                diag(
                    Code.DUPLICATED_EXTENSION,
                    path=f"{path}[{e.index}]",
                    offset=e.node.header_offset,
                    message=f"extension {e.oid} appears more than once",
                )
            )
        seen.add(e.oid)
    return out


def _parse_extension_entry(
    node: TlvNode, index: int, reg: Registry, diags: list[Diagnostic], path: str
) -> ExtensionEntry | None:
    if not node.is_universal(TAG_SEQUENCE, True):
        diags.append(
            diag(
                Code.STRUCTURAL_MISMATCH,
                path=path,
                offset=node.header_offset,
                message=f"extension must be a SEQUENCE, found {node.describe_tag()}",
            )
        )
        return None
    kids = node.children
    if not 2 <= len(kids) <= 3:
        diags.append(
            diag(
                Code.STRUCTURAL_MISMATCH,
                path=path,
                offset=node.header_offset,
                message=f"extension with {len(kids)} fields",
            )
        )
        return None

    oid_str: str | None = None
    if not kids[0].is_universal(TAG_OID, False):
        diags.append(
            diag(
                Code.WRONG_EXTN_ID,
                path=f"{path}.extnID",
                offset=kids[0].header_offset,
                message=f"extnID must be an OID, found {kids[0].describe_tag()}",
            )
        )
    else:
        try:
            oid_str = dotted(decode_oid(kids[0]))
        except RecognitionError as err:
            code = Code.WRONG_EXTN_ID if err.code == Code.WRONG_OID else err.code
            diags.append(diag(code, path=f"{path}.extnID", offset=err.offset, message=err.message))

    critical = False
    value_node = kids[-1]
    if len(kids) == 3:
        if not kids[1].is_universal(TAG_BOOLEAN, False):
            diags.append(
                diag(
                    Code.STRUCTURAL_MISMATCH,
                    path=f"{path}.critical",
                    offset=kids[1].header_offset,
                    message=f"critical must be a BOOLEAN, found {kids[1].describe_tag()}",
                )
            )
            return None
        try:
            critical = decode_boolean(kids[1])
        except RecognitionError as err:
            diags.append(diag(err.code, path=f"{path}.critical", offset=err.offset, message=err.message))
        else:
            if critical is False:
                diags.append(
                    diag(
                        Code.DEFAULT_VALUE_ENCODED,
                        path=f"{path}.critical",
                        offset=kids[1].header_offset,
                        message="critical FALSE explicitly encoded",
                    )
                )

    if not value_node.is_universal(TAG_OCTET_STRING, False):
        diags.append(
            diag(
                Code.STRUCTURAL_MISMATCH,
                path=f"{path}.extnValue",
                offset=value_node.header_offset,
                message=f"extnValue must be a primitive OCTET STRING, found {value_node.describe_tag()}",
            )
        )
        return None

    entry = ExtensionEntry(
        index=index,
        oid=oid_str,
        critical=critical,
        node=node,
        payload=value_node.content,
        payload_offset=value_node.content_offset,
    )
    if len(entry.payload) == 0:
        diags.append(
            diag(
                Code.EMPTY_VALUE_FIELD,
                path=f"{path}.extnValue",
                offset=value_node.header_offset,
                message="empty extnValue",
            )
        )
        return entry

    grammar = reg.lookup("extension", oid_str) if oid_str else None
    if grammar is None:
        return entry
    entry.known = True

    try:
        body_root = parse_tlv_tree(entry.payload)
    except RecognitionError as err:
        code = Code.REDUNDANT_TRAILING_BYTES if err.code == Code.TRAILING_BYTES else err.code
        offset = entry.payload_offset + (err.offset or 0)
        diags.append(
            diag(code, path=f"{path}.extnValue", offset=offset, message=err.message)
        )
        return entry

    ctx = _BodyContext(reg=reg, diags=diags, base=entry.payload_offset, path=f"{path}.extnValue")
    parser = _BODY_PARSERS[grammar]
    entry.body = parser(body_root, ctx)
    return entry


@dataclass
class _BodyContext:
    """Shared state for body parsers: registry, sink, offset rebasing.

    Payload nodes carry offsets relative to the payload slice; base maps
    them back to positions in the whole input document.
    """

    reg: Registry
    diags: list[Diagnostic]
    base: int
    path: str

    def add(self, code: Code, node_or_offset, message: str = "", sub: str = "") -> None:
        if isinstance(node_or_offset, TlvNode):
            offset = self.base + node_or_offset.header_offset
        elif node_or_offset is None:
            offset = None
        else:
            offset = self.base + node_or_offset
        where = f"{self.path}.{sub}" if sub else self.path
        self.diags.append(diag(code, path=where, offset=offset, message=message))

    def add_err(self, err: RecognitionError, sub: str = "") -> None:
        offset = None if err.offset is None else self.base + err.offset
        where = f"{self.path}.{sub}" if sub else self.path
        self.diags.append(diag(err.code, path=where, offset=offset, message=err.message))


def _expect(ctx: _BodyContext, node: TlvNode, tag: int, constructed: bool, what: str, sub: str = "") -> bool:
    if node.is_universal(tag, constructed):
        return True
    ctx.add(
        Code.MALFORMED_EXTENSION_BODY,
        node,
        message=f"{what}: expected {'constructed' if constructed else 'primitive'} tag {tag}, found {node.describe_tag()}",
        sub=sub,
    )
    return False


# --- individual bodies ------------------------------------------------------


def _body_subject_key_identifier(root: TlvNode, ctx: _BodyContext) -> bytes | None:
    if not _expect(ctx, root, TAG_OCTET_STRING, False, "subjectKeyIdentifier"):
        return None
    if root.content_length == 0:
        ctx.add(Code.EMPTY_VALUE_FIELD, root, message="empty key identifier")
        return None
    return root.content


def _body_authority_key_identifier(root: TlvNode, ctx: _BodyContext) -> AkiValue | None:
    if not _expect(ctx, root, TAG_SEQUENCE, True, "authorityKeyIdentifier"):
        return None
    value = AkiValue()
    last_tag = -1
    for child in root.children:
        if child.tag_class != "context" or child.tag_number > 2:
            ctx.add(
                Code.MALFORMED_EXTENSION_BODY,
                child,
                message=f"unexpected field {child.describe_tag()} in authorityKeyIdentifier",
            )
            return value
        if child.tag_number <= last_tag:
            ctx.add(
                Code.MALFORMED_EXTENSION_BODY,
                child,
                message="authorityKeyIdentifier fields out of order or repeated",
            )
            return value
        last_tag = child.tag_number
        if child.tag_number == 0:
            if child.constructed:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="keyIdentifier must be primitive")
                continue
            if child.content_length == 0:
                ctx.add(Code.EMPTY_VALUE_FIELD, child, message="empty keyIdentifier")
                continue
            value.key_id = child.content
        elif child.tag_number == 1:
            if not child.constructed:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="authorityCertIssuer must be constructed")
                continue
            value.has_issuer = True
            if not child.children:
                ctx.add(Code.EMPTY_GENERAL_NAMES, child, message="empty authorityCertIssuer")
            for gn in child.children:
                parse_general_name(gn, ctx, sub="authorityCertIssuer")
        else:
            if child.constructed:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="authorityCertSerialNumber must be primitive")
                continue
            value.has_serial = True
            try:
                decode_integer(child)
            except RecognitionError as err:
                ctx.add_err(err, sub="authorityCertSerialNumber")
    if value.has_issuer != value.has_serial:
        ctx.add(
            Code.MALFORMED_EXTENSION_BODY,
            root,
            message="authorityCertIssuer and authorityCertSerialNumber must appear together",
        )
    return value


def _body_key_usage(root: TlvNode, ctx: _BodyContext) -> KeyUsageValue | None:
    if not _expect(ctx, root, TAG_BIT_STRING, False, "keyUsage"):
        return None
    try:
        bs = decode_bit_string(root, named=True)
    except RecognitionError as err:
        ctx.add_err(err)
        return None
    assert bs.named_bits is not None
    if bs.named_bits and max(bs.named_bits) >= len(KEY_USAGE_BITS):
        ctx.add(
            Code.MALFORMED_EXTENSION_BODY,
            root,
            message=f"keyUsage bit {max(bs.named_bits)} beyond the named range",
        )
        return None
    if not bs.named_bits:
        ctx.add(Code.EMPTY_KEY_USAGE, root)
    return KeyUsageValue(bits=bs.named_bits)


def _body_basic_constraints(root: TlvNode, ctx: _BodyContext) -> BasicConstraintsValue | None:
    if not _expect(ctx, root, TAG_SEQUENCE, True, "basicConstraints"):
        return None
    value = BasicConstraintsValue()
    kids = list(root.children)
    if kids and kids[0].is_universal(TAG_BOOLEAN, False):
        value.ca_explicit = True
        try:
            value.ca = decode_boolean(kids[0])
        except RecognitionError as err:
            ctx.add_err(err, sub="cA")
        else:
            if value.ca is False:
                ctx.add(
                    Code.DEFAULT_VALUE_ENCODED,
                    kids[0],
                    message="cA FALSE explicitly encoded",
                    sub="cA",
                )
        kids = kids[1:]
    if kids and kids[0].is_universal(TAG_INTEGER, False):
        try:
            value.path_len = decode_integer(kids[0])
        except RecognitionError as err:
            ctx.add_err(err, sub="pathLenConstraint")
        else:
            if value.path_len < 0:
                ctx.add(
                    Code.NEGATIVE_PATH_LEN,
                    kids[0],
                    message=f"pathLenConstraint {value.path_len}",
                    sub="pathLenConstraint",
                )
        kids = kids[1:]
    if kids:
        ctx.add(
            Code.MALFORMED_EXTENSION_BODY,
            kids[0],
            message=f"unexpected field {kids[0].describe_tag()} in basicConstraints",
        )
    return value


def _parse_display_text(node: TlvNode, ctx: _BodyContext, sub: str) -> None:
    try:
        validate_charset(node, _DISPLAY_TEXT_TAGS)
    except RecognitionError as err:
        ctx.add_err(err, sub=sub)


def _body_certificate_policies(root: TlvNode, ctx: _BodyContext) -> list[str]:
    policies: list[str] = []
    if not _expect(ctx, root, TAG_SEQUENCE, True, "certificatePolicies"):
        return policies
    if not root.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, root, message="certificatePolicies must name at least one policy")
        return policies
    for i, pi in enumerate(root.children):
        sub = f"policy[{i}]"
        if not _expect(ctx, pi, TAG_SEQUENCE, True, "policyInformation", sub):
            continue
        if not 1 <= len(pi.children) <= 2:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, pi, message="policyInformation with wrong field count", sub=sub)
            continue
        if not pi.children[0].is_universal(TAG_OID, False):
            ctx.add(Code.WRONG_OID, pi.children[0], message="policyIdentifier must be an OID", sub=sub)
        else:
            try:
                policies.append(dotted(decode_oid(pi.children[0])))
            except RecognitionError as err:
                ctx.add_err(err, sub=sub)
        if len(pi.children) == 2:
            _parse_policy_qualifiers(pi.children[1], ctx, sub)
    return policies


def _parse_policy_qualifiers(node: TlvNode, ctx: _BodyContext, sub: str) -> None:
    if not _expect(ctx, node, TAG_SEQUENCE, True, "policyQualifiers", sub):
        return
    if not node.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="empty policyQualifiers", sub=sub)
        return
    for j, pqi in enumerate(node.children):
        qsub = f"{sub}.qualifier[{j}]"
        if not _expect(ctx, pqi, TAG_SEQUENCE, True, "policyQualifierInfo", qsub):
            continue
        if len(pqi.children) != 2 or not pqi.children[0].is_universal(TAG_OID, False):
            ctx.add(Code.MALFORMED_EXTENSION_BODY, pqi, message="policyQualifierInfo must be (OID, qualifier)", sub=qsub)
            continue
        try:
            qid = dotted(decode_oid(pqi.children[0]))
        except RecognitionError as err:
            ctx.add_err(err, sub=qsub)
            continue
        qualifier = pqi.children[1]
        if qid == _OID_QT_CPS:
            if qualifier.is_universal(TAG_IA5_STRING, False):
                try:
                    text = validate_charset(qualifier)
                except RecognitionError as err:
                    ctx.add_err(err, sub=qsub)
                else:
                    _check_uri(text, qualifier, ctx, qsub)
            else:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, qualifier, message="CPS qualifier must be an IA5String", sub=qsub)
        elif qid == _OID_QT_UNOTICE:
            _parse_user_notice(qualifier, ctx, qsub)
        else:
            ctx.add(Code.WRONG_OID, pqi.children[0], message=f"unknown policy qualifier {qid}", sub=qsub)


def _parse_user_notice(node: TlvNode, ctx: _BodyContext, sub: str) -> None:
    if not _expect(ctx, node, TAG_SEQUENCE, True, "userNotice", sub):
        return
    kids = list(node.children)
    if len(kids) > 2:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="userNotice with too many fields", sub=sub)
        return
    if kids and kids[0].is_universal(TAG_SEQUENCE, True):
        ref = kids.pop(0)
        if len(ref.children) != 2:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, ref, message="noticeRef must be (organization, noticeNumbers)", sub=sub)
        else:
            _parse_display_text(ref.children[0], ctx, sub)
            numbers = ref.children[1]
            if _expect(ctx, numbers, TAG_SEQUENCE, True, "noticeNumbers", sub):
                for n in numbers.children:
                    if not n.is_universal(TAG_INTEGER, False):
                        ctx.add(Code.MALFORMED_EXTENSION_BODY, n, message="noticeNumbers entry must be an INTEGER", sub=sub)
                        continue
                    try:
                        decode_integer(n)
                    except RecognitionError as err:
                        ctx.add_err(err, sub=sub)
    if kids:
        _parse_display_text(kids.pop(0), ctx, sub)
    if kids:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, kids[0], message="unexpected field in userNotice", sub=sub)


def _body_policy_mappings(root: TlvNode, ctx: _BodyContext) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    if not _expect(ctx, root, TAG_SEQUENCE, True, "policyMappings"):
        return out
    if not root.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, root, message="policyMappings must hold at least one mapping")
        return out
    for i, pair in enumerate(root.children):
        sub = f"mapping[{i}]"
        if not _expect(ctx, pair, TAG_SEQUENCE, True, "policy mapping", sub):
            continue
        if len(pair.children) != 2:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, pair, message="mapping must be (issuerDomainPolicy, subjectDomainPolicy)", sub=sub)
            continue
        oids = []
        for part in pair.children:
            if not part.is_universal(TAG_OID, False):
                ctx.add(Code.WRONG_OID, part, message="mapping member must be an OID", sub=sub)
                break
            try:
                oids.append(dotted(decode_oid(part)))
            except RecognitionError as err:
                ctx.add_err(err, sub=sub)
                break
        if len(oids) == 2:
            out.append((oids[0], oids[1]))
    return out


def _general_names_body(root: TlvNode, ctx: _BodyContext, what: str) -> list[GeneralNameValue]:
    names: list[GeneralNameValue] = []
    if not _expect(ctx, root, TAG_SEQUENCE, True, what):
        return names
    if not root.children:
        ctx.add(Code.EMPTY_GENERAL_NAMES, root, message=f"empty {what}")
        return names
    for i, gn in enumerate(root.children):
        value = parse_general_name(gn, ctx, sub=f"name[{i}]")
        if value is not None:
            names.append(value)
    return names


def _body_subject_alt_name(root: TlvNode, ctx: _BodyContext) -> list[GeneralNameValue]:
    return _general_names_body(root, ctx, "subjectAltName")


def _body_issuer_alt_name(root: TlvNode, ctx: _BodyContext) -> list[GeneralNameValue]:
    return _general_names_body(root, ctx, "issuerAltName")


def _body_subject_directory_attributes(root: TlvNode, ctx: _BodyContext) -> int:
    if not _expect(ctx, root, TAG_SEQUENCE, True, "subjectDirectoryAttributes"):
        return 0
    if not root.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, root, message="subjectDirectoryAttributes must hold at least one attribute")
        return 0
    for i, attr in enumerate(root.children):
        sub = f"attribute[{i}]"
        if not _expect(ctx, attr, TAG_SEQUENCE, True, "attribute", sub):
            continue
        if len(attr.children) != 2 or not attr.children[0].is_universal(TAG_OID, False):
            ctx.add(Code.MALFORMED_EXTENSION_BODY, attr, message="attribute must be (OID, SET OF values)", sub=sub)
            continue
        try:
            decode_oid(attr.children[0])
        except RecognitionError as err:
            ctx.add_err(err, sub=sub)
        values = attr.children[1]
        if not values.is_universal(TAG_SET, True):
            ctx.add(Code.MALFORMED_EXTENSION_BODY, values, message="attribute values must be a SET", sub=sub)
            continue
        if not values.children:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, values, message="attribute with no values", sub=sub)
        # Value syntax depends on the attribute type; values stay opaque.
    return len(root.children)


def _body_name_constraints(root: TlvNode, ctx: _BodyContext) -> None:
    if not _expect(ctx, root, TAG_SEQUENCE, True, "nameConstraints"):
        return
    if not root.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, root, message="nameConstraints with neither permitted nor excluded subtrees")
        return
    last = -1
    for child in root.children:
        if child.tag_class != "context" or child.tag_number > 1 or not child.constructed:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message=f"unexpected field {child.describe_tag()} in nameConstraints")
            return
        if child.tag_number <= last:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="nameConstraints fields out of order or repeated")
            return
        last = child.tag_number
        which = "permittedSubtrees" if child.tag_number == 0 else "excludedSubtrees"
        if not child.children:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message=f"empty {which}")
            continue
        for i, subtree in enumerate(child.children):
            _parse_general_subtree(subtree, ctx, f"{which}[{i}]")


def _parse_general_subtree(node: TlvNode, ctx: _BodyContext, sub: str) -> None:
    if not _expect(ctx, node, TAG_SEQUENCE, True, "generalSubtree", sub):
        return
    if not node.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="empty generalSubtree", sub=sub)
        return
    parse_general_name(node.children[0], ctx, sub=sub, in_name_constraints=True)
    last = -1
    for extra in node.children[1:]:
        if extra.tag_class != "context" or extra.tag_number > 1 or extra.constructed:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, extra, message=f"unexpected field {extra.describe_tag()} in generalSubtree", sub=sub)
            return
        if extra.tag_number <= last:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, extra, message="generalSubtree fields out of order or repeated", sub=sub)
            return
        last = extra.tag_number
        try:
            value = decode_integer(extra)
        except RecognitionError as err:
            ctx.add_err(err, sub=sub)
            continue
        if extra.tag_number == 0 and value == 0:
            ctx.add(Code.DEFAULT_VALUE_ENCODED, extra, message="minimum 0 explicitly encoded", sub=sub)
        if value < 0:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, extra, message=f"negative subtree bound {value}", sub=sub)


def _body_policy_constraints(root: TlvNode, ctx: _BodyContext) -> None:
    if not _expect(ctx, root, TAG_SEQUENCE, True, "policyConstraints"):
        return
    if not root.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, root, message="policyConstraints with no fields")
        return
    last = -1
    for child in root.children:
        if child.tag_class != "context" or child.tag_number > 1 or child.constructed:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message=f"unexpected field {child.describe_tag()} in policyConstraints")
            return
        if child.tag_number <= last:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="policyConstraints fields out of order or repeated")
            return
        last = child.tag_number
        try:
            value = decode_integer(child)
        except RecognitionError as err:
            ctx.add_err(err)
            continue
        if value < 0:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message=f"negative skipCerts {value}")


def _body_extended_key_usage(root: TlvNode, ctx: _BodyContext) -> list[str]:
    purposes: list[str] = []
    if not _expect(ctx, root, TAG_SEQUENCE, True, "extendedKeyUsage"):
        return purposes
    if not root.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, root, message="extendedKeyUsage must name at least one purpose")
        return purposes
    for i, child in enumerate(root.children):
        sub = f"purpose[{i}]"
        if not child.is_universal(TAG_OID, False):
            ctx.add(Code.WRONG_OID, child, message=f"key purpose must be an OID, found {child.describe_tag()}", sub=sub)
            continue
        try:
            purposes.append(dotted(decode_oid(child)))
        except RecognitionError as err:
            ctx.add_err(err, sub=sub)
    return purposes


def _body_crl_distribution_points(root: TlvNode, ctx: _BodyContext) -> None:
    if not _expect(ctx, root, TAG_SEQUENCE, True, "cRLDistributionPoints"):
        return
    if not root.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, root, message="cRLDistributionPoints must hold at least one point")
        return
    for i, dp in enumerate(root.children):
        _parse_distribution_point(dp, ctx, f"point[{i}]")


def _parse_distribution_point(node: TlvNode, ctx: _BodyContext, sub: str) -> None:
    if not _expect(ctx, node, TAG_SEQUENCE, True, "distributionPoint", sub):
        return
    if not node.children:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="empty distributionPoint", sub=sub)
        return
    seen: set[int] = set()
    last = -1
    for child in node.children:
        if child.tag_class != "context" or child.tag_number > 2:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message=f"unexpected field {child.describe_tag()} in distributionPoint", sub=sub)
            return
        if child.tag_number <= last:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="distributionPoint fields out of order or repeated", sub=sub)
            return
        last = child.tag_number
        seen.add(child.tag_number)
        if child.tag_number == 0:
            if not child.constructed or len(child.children) != 1:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="distributionPoint name must hold one choice", sub=sub)
                continue
            choice = child.children[0]
            if choice.is_context(0, True):
                if not choice.children:
                    ctx.add(Code.EMPTY_GENERAL_NAMES, choice, message="empty fullName", sub=sub)
                for k, gn in enumerate(choice.children):
                    parse_general_name(gn, ctx, sub=f"{sub}.fullName[{k}]")
            elif choice.is_context(1, True):
                for atv in choice.children:
                    if not atv.is_universal(TAG_SEQUENCE, True) or len(atv.children) != 2:
                        ctx.add(Code.MALFORMED_EXTENSION_BODY, atv, message="relative name attribute must be a two-element SEQUENCE", sub=sub)
            else:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, choice, message=f"unknown distributionPointName choice {choice.describe_tag()}", sub=sub)
        elif child.tag_number == 1:
            if child.constructed:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="reasons must be a primitive BIT STRING", sub=sub)
                continue
            try:
                bs = decode_bit_string(child, named=True)
            except RecognitionError as err:
                ctx.add_err(err, sub=sub)
                continue
            if bs.named_bits and max(bs.named_bits) >= _REASON_FLAG_COUNT:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="reason flag beyond the named range", sub=sub)
        else:
            if not child.constructed:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="cRLIssuer must be constructed", sub=sub)
                continue
            if not child.children:
                ctx.add(Code.EMPTY_GENERAL_NAMES, child, message="empty cRLIssuer", sub=sub)
            for k, gn in enumerate(child.children):
                parse_general_name(gn, ctx, sub=f"{sub}.cRLIssuer[{k}]")
    if seen == {1}:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="distributionPoint with only a reasons field", sub=sub)


def _body_inhibit_any_policy(root: TlvNode, ctx: _BodyContext) -> int | None:
    if not _expect(ctx, root, TAG_INTEGER, False, "inhibitAnyPolicy"):
        return None
    try:
        value = decode_integer(root)
    except RecognitionError as err:
        ctx.add_err(err)
        return None
    if value < 0:
        ctx.add(Code.MALFORMED_EXTENSION_BODY, root, message=f"negative skipCerts {value}")
    return value


def _info_access_body(root: TlvNode, ctx: _BodyContext, what: str) -> None:
    if not _expect(ctx, root, TAG_SEQUENCE, True, what):
        return
    if not root.children:
        ctx.add(Code.EMPTY_SEQUENCE_IN_INFO_ACCESS, root, message=f"empty {what}")
        return
    for i, ad in enumerate(root.children):
        sub = f"accessDescription[{i}]"
        if not _expect(ctx, ad, TAG_SEQUENCE, True, "accessDescription", sub):
            continue
        if len(ad.children) != 2 or not ad.children[0].is_universal(TAG_OID, False):
            ctx.add(Code.MALFORMED_EXTENSION_BODY, ad, message="accessDescription must be (OID, GeneralName)", sub=sub)
            continue
        try:
            decode_oid(ad.children[0])
        except RecognitionError as err:
            ctx.add_err(err, sub=sub)
        parse_general_name(ad.children[1], ctx, sub=sub)


def _body_authority_info_access(root: TlvNode, ctx: _BodyContext) -> None:
    _info_access_body(root, ctx, "authorityInfoAccess")


def _body_subject_info_access(root: TlvNode, ctx: _BodyContext) -> None:
    _info_access_body(root, ctx, "subjectInfoAccess")


_BODY_PARSERS = {
    "authority-key-identifier": _body_authority_key_identifier,
    "subject-key-identifier": _body_subject_key_identifier,
    "key-usage": _body_key_usage,
    "certificate-policies": _body_certificate_policies,
    "policy-mappings": _body_policy_mappings,
    "subject-alt-name": _body_subject_alt_name,
    "issuer-alt-name": _body_issuer_alt_name,
    "subject-directory-attributes": _body_subject_directory_attributes,
    "basic-constraints": _body_basic_constraints,
    "name-constraints": _body_name_constraints,
    "policy-constraints": _body_policy_constraints,
    "extended-key-usage": _body_extended_key_usage,
    "crl-distribution-points": _body_crl_distribution_points,
    "inhibit-any-policy": _body_inhibit_any_policy,
    "freshest-crl": _body_crl_distribution_points,
    "authority-info-access": _body_authority_info_access,
    "subject-info-access": _body_subject_info_access,
}


# --- GeneralName ------------------------------------------------------------

# Host name labels: 1-63 alphanumerics and hyphens, no hyphen at either
# end, full name capped at 253 octets.
_LABEL_RE = re.compile(r"^[A-Za-z0-9](?:[A-Za-z0-9-]{0,61}[A-Za-z0-9])?$")
_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*$")


def valid_dns_name(text: str) -> bool:
    if not text or len(text) > 253:
        return False
    return all(_LABEL_RE.match(label) for label in text.split("."))


def valid_email(text: str) -> bool:
    if text.count("@") != 1:
        return False
    local, domain = text.split("@")
    if not local or not valid_dns_name(domain):
        return False
    return all(0x21 <= ord(ch) <= 0x7E and ch != "@" for ch in local)


def valid_uri(text: str) -> bool:
    scheme, sep, rest = text.partition(":")
    if not sep or not rest:
        return False
    return bool(_SCHEME_RE.match(scheme))


def _check_uri(text: str, node: TlvNode, ctx: _BodyContext, sub: str) -> None:
    if not valid_uri(text):
        ctx.add(Code.BAD_DNS_URI_EMAIL_FORMAT, node, message=f"URI without scheme: {text!r}", sub=sub)


def parse_general_name(
    node: TlvNode,
    ctx: _BodyContext,
    sub: str = "",
    in_name_constraints: bool = False,
) -> GeneralNameValue | None:
    """Parse and validate one GeneralName choice.

    Inside nameConstraints an iPAddress carries an address plus netmask,
    doubling its length; everywhere else it is a bare address.
    """
    if node.tag_class != "context":
        ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message=f"GeneralName must be context-tagged, found {node.describe_tag()}", sub=sub)
        return None

    tag = node.tag_number
    if tag == 0:  # otherName
        if not node.constructed or len(node.children) != 2:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="otherName must be (type-id, [0] value)", sub=sub)
            return None
        type_node, value_wrap = node.children
        if not type_node.is_universal(TAG_OID, False):
            ctx.add(Code.WRONG_OID, type_node, message="otherName type-id must be an OID", sub=sub)
            return None
        try:
            decode_oid(type_node)
        except RecognitionError as err:
            ctx.add_err(err, sub=sub)
            return None
        if not value_wrap.is_context(0, True) or len(value_wrap.children) != 1:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, value_wrap, message="otherName value must be one explicitly tagged element", sub=sub)
            return None
        return GeneralNameValue(kind="otherName", raw=node.raw)

    if tag in (1, 2, 6):  # rfc822Name, dNSName, uniformResourceIdentifier
        kind = {1: "rfc822Name", 2: "dNSName", 6: "uniformResourceIdentifier"}[tag]
        if node.constructed:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message=f"{kind} must be primitive", sub=sub)
            return None
        content = node.content
        for i, b in enumerate(content):
            if b == 0x00 or b > 0x7F:
                ctx.add(Code.CHAR_SET_VIOLATION, node.content_offset + i, message=f"byte 0x{b:02x} in {kind}", sub=sub)
                return GeneralNameValue(kind=kind, raw=node.raw)
        text = content.decode("ascii")
        ok = {
            "rfc822Name": valid_email,
            "dNSName": valid_dns_name,
            "uniformResourceIdentifier": valid_uri,
        }[kind](text)
        if not ok:
            ctx.add(
                Code.BAD_DNS_URI_EMAIL_FORMAT,
                node,
                message=f"malformed {kind}: {text!r}",
                sub=sub,
            )
        return GeneralNameValue(kind=kind, text=text, raw=node.raw)

    if tag == 3:  # x400Address, parsed for shape only
        if not node.constructed:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="x400Address must be constructed", sub=sub)
            return None
        return GeneralNameValue(kind="x400Address", raw=node.raw)

    if tag == 4:  # directoryName, explicit because Name is a CHOICE
        if not node.constructed or len(node.children) != 1:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="directoryName must hold one Name", sub=sub)
            return None
        inner = node.children[0]
        rebased: list[Diagnostic] = []
        parse_name(inner, ctx.reg, rebased, f"{ctx.path}.{sub}" if sub else ctx.path, role="general")
        for d in rebased:
            if d.byte_offset is not None:
                d.byte_offset += ctx.base
            ctx.diags.append(d)
        return GeneralNameValue(kind="directoryName", raw=node.raw)

    if tag == 5:  # ediPartyName
        if not node.constructed:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="ediPartyName must be constructed", sub=sub)
            return None
        kids = list(node.children)
        last = -1
        saw_party = False
        for child in kids:
            if child.tag_class != "context" or child.tag_number > 1 or not child.constructed or len(child.children) != 1:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="ediPartyName field must be an explicitly tagged DirectoryString", sub=sub)
                return None
            if child.tag_number <= last:
                ctx.add(Code.MALFORMED_EXTENSION_BODY, child, message="ediPartyName fields out of order or repeated", sub=sub)
                return None
            last = child.tag_number
            saw_party = saw_party or child.tag_number == 1
            _parse_display_text(child.children[0], ctx, sub)
        if not saw_party:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="ediPartyName without partyName", sub=sub)
        return GeneralNameValue(kind="ediPartyName", raw=node.raw)

    if tag == 7:  # iPAddress
        if node.constructed:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="iPAddress must be primitive", sub=sub)
            return None
        allowed = (8, 32) if in_name_constraints else (4, 16)
        if len(node.content) not in allowed:
            ctx.add(
                Code.BAD_DNS_URI_EMAIL_FORMAT,
                node,
                message=f"iPAddress of {len(node.content)} octets, expected {allowed[0]} or {allowed[1]}",
                sub=sub,
            )
        return GeneralNameValue(kind="iPAddress", raw=node.raw)

    if tag == 8:  # registeredID
        if node.constructed:
            ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message="registeredID must be primitive", sub=sub)
            return None
        try:
            arcs = decode_oid(node)
        except RecognitionError as err:
            ctx.add_err(err, sub=sub)
            return None
        return GeneralNameValue(kind="registeredID", text=dotted(arcs), raw=node.raw)

    ctx.add(Code.MALFORMED_EXTENSION_BODY, node, message=f"unknown GeneralName tag [{tag}]", sub=sub)
    return None


# --- cross-extension rules ---------------------------------------------------


def check_key_usage_rules(
    extset: ExtensionSet,
    key_family: str | None,
    diags: list[Diagnostic],
    path: str = "tbsCertificate.extensions",
) -> None:
    """Rules tying keyUsage, basicConstraints and the key algorithm together.

    A subject may only sign certificates when it is marked as an
    authority: keyCertSign without basicConstraints, or with
    basicConstraints not asserting cA, flags the certificate.  An
    authority in turn must be a deliberate one: cA certificates want a
    critical basicConstraints and a subjectKeyIdentifier.  Finally the
    asserted usage bits must be ones the public key algorithm can honor.
    """
    ku_entry = extset.get(OID_KEY_USAGE)
    bc_entry = extset.get(OID_BASIC_CONSTRAINTS)
    ku = ku_entry.body if ku_entry and isinstance(ku_entry.body, KeyUsageValue) else None
    bc = bc_entry.body if bc_entry and isinstance(bc_entry.body, BasicConstraintsValue) else None

    if ku is not None and ku.has(BIT_KEY_CERT_SIGN):
        where = f"{path}[{ku_entry.index}]"
        if bc_entry is None:
            diags.append(
                diag(
                    Code.KEY_CERT_SIGN_WITHOUT_BASIC_CONSTRAINTS,
                    path=where,
                    offset=ku_entry.node.header_offset,
                    message="keyCertSign asserted without a basicConstraints extension",
                )
            )
        elif bc is not None and not bc.ca:
            diags.append(
                diag(
                    Code.KEY_CERT_SIGN_IN_LEAF,
                    path=where,
                    offset=ku_entry.node.header_offset,
                    message="keyCertSign asserted but basicConstraints does not mark a CA",
                )
            )

    if bc_entry is not None and bc is not None:
        where = f"{path}[{bc_entry.index}]"
        if bc.ca:
            if not bc_entry.critical:
                diags.append(
                    diag(
                        Code.NOT_CRITICAL_BASIC_CONSTRAINTS,
                        path=where,
                        offset=bc_entry.node.header_offset,
                        message="cA asserted in a non-critical basicConstraints",
                    )
                )
                if bc.path_len is not None:
                    diags.append(
                        diag(
                            Code.PATH_LEN_IN_NON_CRITICAL_BC,
                            path=where,
                            offset=bc_entry.node.header_offset,
                            message="pathLenConstraint in a non-critical basicConstraints",
                        )
                    )
            if not extset.has(OID_SUBJECT_KEY_IDENTIFIER):
                diags.append(
                    diag(
                        Code.MISSING_SUBJECT_KEY_ID,
                        path=path,
                        offset=bc_entry.node.header_offset,
                        message="CA certificate without a subjectKeyIdentifier extension",
                    )
                )
        elif bc.path_len is not None:
            diags.append(
                diag(
                    Code.PATH_LEN_IN_LEAF,
                    path=where,
                    offset=bc_entry.node.header_offset,
                    message="pathLenConstraint without cA",
                )
            )

    if ku is not None and key_family is not None:
        forbidden = _FORBIDDEN_USAGE.get(key_family, frozenset())
        bad = sorted(ku.bits & forbidden)
        if bad:
            names = ", ".join(KEY_USAGE_BITS[b] for b in bad)
            diags.append(
                diag(
                    Code.KEY_USAGE_VIOLATION_ON_PK_ALGORITHM,
                    path=f"{path}[{ku_entry.index}]",
                    offset=ku_entry.node.header_offset,
                    message=f"{names} asserted for a {key_family} key",
                )
            )
