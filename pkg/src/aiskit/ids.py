"""Intrusion-detection adapter: packet logs, self sets, alert evaluation.

Packets can be matched either as signatures (exact fields with wildcards)
or as 98-bit strings under r-contiguous matching. Bit layout, most
significant first::

    protocol(2) | src_ip(32) | src_port(16) | dst_ip(32) | dst_port(16)

with protocol codes tcp=00, udp=01, icmp=10.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ._csvio import read_lines, read_rows
from .core import BitPattern, PacketSignature
from .errors import DataFormatError, EmptySelfError, EvaluationError, InvalidObservationError
from .negative_selection import Alert, DetectorSet, SelfSet, monitor

PACKET_BITS = 98
PROTO_CODES = {"tcp": 0, "udp": 1, "icmp": 2}
PROTO_NAMES = {v: k for k, v in PROTO_CODES.items()}
LABELS = ("self", "nonself")
PACKET_HEADER = ("proto", "src_ip", "src_port", "dst_ip", "dst_port")
PATTERN_HEADER = ("pattern",)


def encode_packet(pkt: PacketSignature) -> BitPattern:
    if not pkt.is_concrete:
        raise InvalidObservationError(f"cannot bit-encode a wildcard packet {pkt}")
    value = PROTO_CODES[pkt.protocol]
    value = (value << 32) | int(ipaddress.IPv4Address(pkt.src_ip))
    value = (value << 16) | pkt.src_port
    value = (value << 32) | int(ipaddress.IPv4Address(pkt.dst_ip))
    value = (value << 16) | pkt.dst_port
    return BitPattern.from_int(value, PACKET_BITS)


def decode_packet(bits: BitPattern) -> PacketSignature:
    if len(bits) != PACKET_BITS:
        raise ValueError(f"expected {PACKET_BITS} bits, got {len(bits)}")
    v = bits.value
    dst_port = v & 0xFFFF
    dst_ip = (v >> 16) & 0xFFFFFFFF
    src_port = (v >> 48) & 0xFFFF
    src_ip = (v >> 64) & 0xFFFFFFFF
    code = v >> 96
    if code not in PROTO_NAMES:
        raise ValueError(f"unused protocol code {code:02b}")
    return PacketSignature(PROTO_NAMES[code], str(ipaddress.IPv4Address(src_ip)), src_port,
                           str(ipaddress.IPv4Address(dst_ip)), dst_port)


@dataclass
class PacketLog:
    """Ordered concrete observations with optional ``self``/``nonself`` labels.

    Records are normally :class:`PacketSignature`; bit-pattern logs are
    accepted too so the same pipeline runs on abstract fixtures.
    """

    records: list
    labels: list[str | None] = field(default_factory=list)

    def __post_init__(self):
        if not self.labels:
            self.labels = [None] * len(self.records)
        if len(self.labels) != len(self.records):
            raise ValueError("one label per record is required")
        for i, rec in enumerate(self.records):
            if isinstance(rec, PacketSignature) and not rec.is_concrete:
                raise InvalidObservationError(f"record {i} contains wildcards")
        for lab in self.labels:
            if lab is not None and lab not in LABELS:
                raise ValueError(f"unknown label {lab!r}")

    @property
    def labeled(self) -> bool:
        return all(lab is not None for lab in self.labels)

    def self_records(self) -> list:
        """Records labelled ``self``; every record when the log is unlabelled."""
        if not any(lab is not None for lab in self.labels):
            return list(self.records)
        return [r for r, lab in zip(self.records, self.labels) if lab == "self"]

    def __len__(self):
        return len(self.records)


@dataclass
class EvaluationReport:
    true_positives: int
    false_positives: int
    true_negatives: int
    false_negatives: int

    @property
    def detection_rate(self) -> float:
        positives = self.true_positives + self.false_negatives
        return self.true_positives / positives if positives else 0.0

    @property
    def false_alarm_rate(self) -> float:
        negatives = self.false_positives + self.true_negatives
        return self.false_positives / negatives if negatives else 0.0

    def to_lines(self) -> str:
        rows = [
            ("true_positives", self.true_positives),
            ("false_positives", self.false_positives),
            ("true_negatives", self.true_negatives),
            ("false_negatives", self.false_negatives),
            ("detection_rate", repr(self.detection_rate)),
            ("false_alarm_rate", repr(self.false_alarm_rate)),
        ]
        return "".join(f"{k}={v}\n" for k, v in rows)


def build_self_set(log: PacketLog | Sequence, mode: str = "signatures") -> SelfSet:
    """Deduplicated self set, either as signatures or as 98-bit patterns."""
    records = log.self_records() if isinstance(log, PacketLog) else list(log)
    if not records:
        raise EmptySelfError("log contains no self records")
    if mode not in ("signatures", "bits"):
        raise ValueError(f"mode must be 'signatures' or 'bits', got {mode!r}")
    unique = list(dict.fromkeys(records))
    if mode == "bits":
        unique = [encode_packet(r) if isinstance(r, PacketSignature) else r for r in unique]
        unique = list(dict.fromkeys(unique))
    return SelfSet(tuple(unique))


def observations_for(detectors: DetectorSet, records: Iterable) -> list:
    """Convert packets to bit patterns when the detectors are bit-shaped."""
    if detectors.shape == "bits":
        return [encode_packet(r) if isinstance(r, PacketSignature) else r for r in records]
    return list(records)


def detect(detectors: DetectorSet, log: PacketLog) -> list[Alert]:
    return monitor(detectors, observations_for(detectors, log.records))


def evaluate(detectors: DetectorSet, log: PacketLog) -> EvaluationReport:
    """Tally alerts against labels; a record is predicted non-self iff alerted."""
    if not log.labeled:
        raise EvaluationError("evaluation needs every record labelled self or nonself")
    alerted = {a.index for a in detect(detectors, log)}
    tp = fp = tn = fn = 0
    for i, label in enumerate(log.labels):
        hit = i in alerted
        if label == "nonself":
            tp += hit
            fn += not hit
        else:
            fp += hit
            tn += not hit
    return EvaluationReport(tp, fp, tn, fn)


# -- CSV -------------------------------------------------------------------

def read_log(path) -> PacketLog:
    """Read a packet log (``proto,src_ip,src_port,dst_ip,dst_port[,label]``)
    or a bit-pattern log (``pattern[,label]``); the header decides which."""
    lines = read_lines(path)
    first = lines[0] if lines else ""
    header = PATTERN_HEADER if first.split(",")[0] == "pattern" else PACKET_HEADER
    records, labels = [], []
    for lineno, row in read_rows(path, header, ("label",)):
        try:
            if header is PATTERN_HEADER:
                rec = BitPattern.from_string(row[0])
            else:
                rec = PacketSignature.from_fields(row[:5])
                if not rec.is_concrete:
                    raise ValueError("observed packets may not contain wildcards")
        except ValueError as exc:
            raise DataFormatError(str(exc), path, lineno) from None
        if records and isinstance(rec, BitPattern) and len(rec) != len(records[0]):
            raise DataFormatError("bit patterns differ in length", path, lineno)
        label = row[len(header)] if len(row) > len(header) else None
        if label is not None and label not in LABELS:
            raise DataFormatError(f"label must be self or nonself, got {label!r}", path, lineno)
        records.append(rec)
        labels.append(label)
    return PacketLog(records, labels)


def write_log(log: PacketLog, fh) -> None:
    labeled = log.labeled
    is_bits = bool(log.records) and isinstance(log.records[0], BitPattern)
    header = list(PATTERN_HEADER if is_bits else PACKET_HEADER) + (["label"] if labeled else [])
    fh.write(",".join(header) + "\n")
    for rec, label in zip(log.records, log.labels):
        fields = [str(rec)] if is_bits else rec.to_fields()
        if labeled:
            fields.append(label)
        fh.write(",".join(fields) + "\n")


def write_alerts(alerts: Iterable[Alert], fh) -> None:
    fh.write("record_index,detector_indices\n")
    for a in alerts:
        fh.write(f"{a.index},{';'.join(map(str, a.detectors))}\n")
