"""
Parser for CARO-style malware names.

Accepted surface forms::

    Trojan://Win32/Zbot.A            (URI form)
    Trojan:Win32/Reveton.A!lnk       (colon form, vendor style)
    Trojan-Spy.Win32.Zbot.wijf       (dotted form)

Only the family is mandatory.  Vendor lists are noisy (stray spaces,
file extensions, platform glued to family), so the parser repairs what it
can and records each repair in ``CaroName.notes``.  A name is
nonconforming when something had to be set aside as residue or its
components were out of order.
"""

import re
from dataclasses import dataclass, field

from .dataset import Class
from .errors import Unparseable

PLATFORMS = {
    "win32": "Win32",
    "w32": "Win32",
    "win64": "Win64",
    "w64": "Win64",
    "msil": "MSIL",
    "vbs": "VBS",
    "js": "JS",
    "html": "HTML",
    "java": "Java",
    "androidos": "AndroidOS",
    "linux": "Linux",
    "macos": "MacOS",
    "dos": "DOS",
    "generic": "Generic",
}
# Platforms that can be recognized when glued to the next token ("Win32Mole").
_GLUABLE = re.compile(r"^(win32|win64|w32|w64)(.+)$", re.IGNORECASE)

TYPE_WORDS = (
    "trojan",
    "worm",
    "backdoor",
    "virus",
    "ransom",
    "adware",
    "spyware",
    "pws",
    "exploit",
    "rootkit",
    "hacktool",
    "riskware",
    "downloader",
    "dropper",
)

FILE_EXTENSIONS = frozenset(
    {"exe", "dll", "doc", "docx", "xls", "js", "vbs", "htm", "html", "hta",
     "pdf", "msi", "scr", "bat", "cmd", "com", "jar", "zip", "pe32"}
)

_SPLIT_RE = re.compile(r"://|[:/.]")


@dataclass(frozen=True)
class CaroName:
    family: str
    malware_type: str = None
    platform: str = None
    variant: str = None
    suffixes: tuple = ()
    residue: str = None
    conforming: bool = True
    notes: tuple = field(default=(), compare=False)

    def format(self):
        """Dotted form; re-parses to an equal value when ``conforming``."""
        head = [t for t in (self.malware_type, self.platform, self.family, self.variant) if t]
        return ".".join(head) + "".join("!" + s for s in self.suffixes)

    def to_dict(self):
        return {
            "malware_type": self.malware_type,
            "platform": self.platform,
            "family": self.family,
            "variant": self.variant,
            "suffixes": list(self.suffixes),
            "residue": self.residue,
            "conforming": self.conforming,
            "notes": list(self.notes),
        }


def is_type_word(token):
    parts = token.lower().split("-")
    return any(p.startswith(w) for p in parts for w in TYPE_WORDS)


def parse_caro(name):
    """Parse ``name`` into a :class:`CaroName`; raises :class:`Unparseable` without a family."""
    if name is None or not name.strip():
        raise Unparseable("empty malware name")
    notes = []
    text = name.strip()

    head, *suffixes = text.split("!")
    suffixes = tuple(s.strip() for s in suffixes if s.strip())

    tokens = []
    residue = []
    for raw in _SPLIT_RE.split(head):
        tok = raw.strip()
        if not tok:
            continue
        if raw != tok:
            notes.append(f"trimmed whitespace around {tok!r}")
        words = tok.split()
        if len(words) > 1:
            notes.append(f"embedded whitespace in {tok!r}")
            residue.extend(words[1:])
        tokens.append(words[0])

    malware_type = platform = None
    i = 0
    if i < len(tokens) and is_type_word(tokens[i]) and len(tokens) > 1:
        malware_type = tokens[i]
        i += 1
    if i < len(tokens):
        tok = tokens[i]
        glued = _GLUABLE.match(tok)
        if tok.lower() in PLATFORMS and i + 1 < len(tokens):
            platform = PLATFORMS[tok.lower()]
            i += 1
        elif glued and glued.group(2).strip("-_"):
            platform = PLATFORMS[glued.group(1).lower()]
            rest = glued.group(2).strip("-_")
            notes.append(f"platform glued to next token in {tok!r}")
            if rest.lower() in PLATFORMS:
                notes.append(f"repeated platform {rest!r} dropped")
                del tokens[i]
            else:
                tokens[i] = rest
    misordered = False
    if malware_type is None and i < len(tokens) - 1 and is_type_word(tokens[i]):
        malware_type = tokens[i]
        notes.append("type after platform")
        misordered = True
        i += 1

    rest = tokens[i:]
    if len(rest) > 1 and rest[-1].lower() in FILE_EXTENSIONS:
        residue.insert(0, rest.pop())
        notes.append(f"file extension {residue[0]!r} in name")
    if malware_type is None and len(rest) > 1 and is_type_word(rest[-1]):
        malware_type = rest.pop()
        notes.append("type given after family")
        misordered = True
    if not rest:
        raise Unparseable(f"no family token in {name!r}")

    family, variant_chain = rest[0], rest[1:]
    return CaroName(
        family=family,
        malware_type=malware_type,
        platform=platform,
        variant=".".join(variant_chain) or None,
        suffixes=suffixes,
        residue=" ".join(residue) or None,
        conforming=not residue and not misordered,
        notes=tuple(notes),
    )


def coarse_class(name):
    """
    Map a parsed name onto a malware family class, or None when the name
    itself does not say.

    Precedence: a Trojan type wins, then a capitalised "Bot" inside the type
    or family (IrcBot, NanoBot, SdBot), then a Worm type.  Bot is checked
    before Worm so ``WORM/IrcBot`` is a botnet.  The match is
    case-sensitive: lower-case "bot" in names like Lolbot is too weak a
    signal on its own.
    """
    raw_type = name.malware_type or ""
    mtype = raw_type.lower()
    if mtype.startswith("trojan"):
        return Class.TROJAN
    if "Bot" in raw_type or "Bot" in name.family or mtype == "bot":
        return Class.BOTNET
    if "worm" in mtype:
        return Class.WORM
    return None
