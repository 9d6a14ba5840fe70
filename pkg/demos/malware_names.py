"""
Reading vendor malware names
============================

Antivirus vendors name samples in a dotted ``type.platform.family.variant``
style, but real lists are messy: stray spaces, file extensions, platforms
glued to the family.  The parser repairs what it can, notes every repair,
and flags a name as nonconforming when something had to be set aside.
"""

from regscope.caro import coarse_class, parse_caro

names = [
    "Trojan-Spy.Win32.Zbot.wijf",
    "Trojan.GenericKD.3015891",
    "Trojan:Win32/Reveton.A!lnk",
    "Trojan. Win32Mole.exe",
    "W32.Cridex.A.worm",
    "Email-Worm.Win32.Naked",
    "WORM/IrcBot.tlq",
    "Win32.Lolbot.aoi",
]

for text in names:
    n = parse_caro(text)
    cls = coarse_class(n)
    print(f"{text!r}")
    print(f"    type={n.malware_type} platform={n.platform} family={n.family} variant={n.variant}")
    print(f"    class={cls.name if cls is not None else '-'} conforming={n.conforming}")
    for note in n.notes:
        print(f"    note: {note}")

# The family is the only mandatory part, so a bare name still parses.
print(parse_caro("Trickbot"))

# Conforming names survive a format/parse round trip.
n = parse_caro("Trojan/W32.KRBanker")
print(n.format(), parse_caro(n.format()) == n)
