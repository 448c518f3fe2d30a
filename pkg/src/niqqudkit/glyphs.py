"""Embedded deterministic bitmap face for Hebrew letters and niqqud marks.

Every cluster renders into a square cell (16x16 at scale 1).  The cell is
divided into fixed zones so that mark ink never collides with letter ink:

    rows  0..1   shin/sin dots
    rows  2..10  base letter box (9 rows x 12 cols, offset (2, 2))
    row   11     dagesh
    rows 12..15  vowel-class marks

Zone separation guarantees that two clusters differing in any mark differ in
at least one pixel.  The shapes are stylized; typographic fidelity is a
non-goal, substitutable via the provider interface in :mod:`rendering`.
"""

from __future__ import annotations

from . import hebrew

_BOX_ROWS = 9
_BOX_COLS = 12
_BOX_OFFSET = (2, 2)

Pixels = frozenset


def _art(*rows: str) -> frozenset[tuple[int, int]]:
    """Letter-box art ('#' = ink) into absolute cell coordinates."""
    if len(rows) > _BOX_ROWS:
        raise ValueError("glyph art taller than the letter box")
    pixels = set()
    for r, row in enumerate(rows):
        if len(row) > _BOX_COLS:
            raise ValueError(f"glyph art wider than the letter box: {row!r}")
        for c, ch in enumerate(row):
            if ch == "#":
                pixels.add((r + _BOX_OFFSET[0], c + _BOX_OFFSET[1]))
    return frozenset(pixels)


# --- base letters (alef..tav), stylized square forms ------------------------

LETTER_ART: dict[str, frozenset[tuple[int, int]]] = {
    # alef: crossing diagonal with detached arms
    "א": _art(
        "##.......##.",
        ".##......##.",
        "..##.....##.",
        "...##...##..",
        "....##.##...",
        ".....###....",
        "...##..##...",
        "..##....##..",
        ".##......##.",
    ),
    # bet: top bar, right vertical, bottom bar
    "ב": _art(
        "############",
        "############",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "############",
        "############",
    ),
    # gimel: right vertical with a leg kicking bottom-left
    "ג": _art(
        ".....#######",
        "........####",
        ".........##.",
        ".........##.",
        ".........##.",
        ".......####.",
        ".....##..##.",
        "...##....##.",
        ".##......###",
    ),
    # dalet: full top bar, inset vertical (overhanging corner)
    "ד": _art(
        "############",
        "############",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
    ),
    # he: top bar, flush right vertical, detached left leg
    "ה": _art(
        "############",
        "############",
        "..........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
    ),
    # vav: short head, right vertical
    "ו": _art(
        "......######",
        "......######",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
    ),
    # zayin: top bar, center vertical
    "ז": _art(
        "############",
        "############",
        "......##....",
        "......##....",
        "......##....",
        "......##....",
        "......##....",
        "......##....",
        "......##....",
    ),
    # het: top bar with both legs attached
    "ח": _art(
        "############",
        "############",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
    ),
    # tet: open-top bowl with an inward curl at the right
    "ט": _art(
        "##.....##...",
        "##......##..",
        "##.......##.",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "############",
        "############",
    ),
    # yod: small high mark
    "י": _art(
        ".......####.",
        ".......####.",
        ".........##.",
        ".........##.",
    ),
    # final kaf: top bar, right vertical reaching the box bottom, bare left
    "ך": _art(
        "############",
        "############",
        "........##..",
        "........##..",
        "........##..",
        "........##..",
        "........##..",
        "........##..",
        "........##..",
    ),
    # kaf: rounded open box (short bars)
    "כ": _art(
        "..##########",
        "..##########",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..##########",
        "..##########",
    ),
    # lamed: high staff at the right, body flowing bottom-left
    "ל": _art(
        ".........##.",
        ".........##.",
        "..#########.",
        "..#########.",
        "..##........",
        "..##........",
        "...##.......",
        "....##......",
        ".....##.....",
    ),
    # final mem: closed box
    "ם": _art(
        "############",
        "############",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "############",
        "############",
    ),
    # mem: open at the bottom-left corner
    "מ": _art(
        "#.##########",
        "############",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "..........##",
        "..##########",
        "..##########",
    ),
    # final nun: bare right vertical
    "ן": _art(
        "........####",
        "........####",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
    ),
    # nun: right vertical onto a bottom bar
    "נ": _art(
        ".......####.",
        ".......####.",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
        ".........##.",
        "..#########.",
        "..#########.",
    ),
    # samekh: rounded closed loop
    "ס": _art(
        "..########..",
        ".##########.",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        "##........##",
        ".##########.",
        "..########..",
    ),
    # ayin: two branches joining into a low stroke
    "ע": _art(
        "##.......##.",
        "##.......##.",
        ".##......##.",
        ".##......##.",
        "..##....##..",
        "..##...##...",
        "...##.##....",
        "...####.....",
        ".####.......",
    ),
    # final pe: top bar, right vertical, inner nub, open bottom
    "ף": _art(
        "..##########",
        "..##########",
        "..........##",
        "....###...##",
        "....###...##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
    ),
    # pe: kaf shape with an inner nub
    "פ": _art(
        "..##########",
        "..##########",
        "..........##",
        "....###...##",
        "....###...##",
        "..........##",
        "..........##",
        "..##########",
        "..##########",
    ),
    # final tsadi: high diagonal meeting a long right vertical
    "ץ": _art(
        "##.......###",
        ".##......###",
        "..##......##",
        "...##.....##",
        "....##....##",
        ".....##...##",
        "......##..##",
        ".......##.##",
        "........####",
    ),
    # tsadi: diagonal into a bottom bar
    "צ": _art(
        "##........##",
        ".##.......##",
        "..##......##",
        "...##.....##",
        "....##...##.",
        ".....##.##..",
        "......###...",
        "..#########.",
        "..#########.",
    ),
    # qof: top bar, short right stroke, detached descending left leg
    "ק": _art(
        "############",
        "############",
        "..........##",
        "..##......##",
        "..##......##",
        "..##........",
        "..##........",
        "..##........",
        "..##........",
    ),
    # resh: top bar with a flush rounded corner
    "ר": _art(
        "##########..",
        "############",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
        "..........##",
    ),
    # shin: three prongs on a bottom bar
    "ש": _art(
        "##...##...##",
        "##...##...##",
        "##...##...##",
        "##...##...##",
        "##...##...##",
        "##...##...##",
        "##...##...##",
        "############",
        "############",
    ),
    # tav: het-like frame with a left foot
    "ת": _art(
        "############",
        "############",
        "...##.....##",
        "...##.....##",
        "...##.....##",
        "...##.....##",
        "...##.....##",
        "..###.....##",
        "####......##",
    ),
}

# --- niqqud marks: fixed anchors outside the letter box ----------------------

MARK_PIXELS: dict[str, frozenset[tuple[int, int]]] = {
    hebrew.SHEVA: Pixels({(12, 7), (14, 7)}),
    hebrew.HATAF_SEGOL: Pixels({(12, 2), (14, 2), (12, 8), (12, 12), (14, 10)}),
    hebrew.HATAF_PATAH: Pixels({(12, 2), (14, 2)} | {(13, c) for c in range(7, 13)}),
    hebrew.HATAF_QAMATS: Pixels({(12, 2), (14, 2)} | {(12, c) for c in range(7, 13)}
                                | {(13, 9), (14, 9)}),
    hebrew.HIRIQ: Pixels({(13, 7)}),
    hebrew.TSERE: Pixels({(13, 5), (13, 9)}),
    hebrew.SEGOL: Pixels({(12, 5), (12, 9), (14, 7)}),
    hebrew.PATAH: Pixels({(13, c) for c in range(5, 11)}),
    hebrew.QAMATS: Pixels({(12, c) for c in range(5, 11)} | {(13, 7), (14, 7)}),
    hebrew.HOLAM: Pixels({(12, 7)}),
    hebrew.QUBUTS: Pixels({(12, 5), (13, 7), (14, 9)}),
    hebrew.QAMATS_QATAN: Pixels({(12, c) for c in range(5, 11)}
                                | {(13, 7), (14, 7), (15, 7)}),
    hebrew.DAGESH: Pixels({(11, 7), (11, 8)}),
    hebrew.SHIN_DOT: Pixels({(0, 12), (1, 12), (0, 13), (1, 13)}),
    hebrew.SIN_DOT: Pixels({(0, 2), (1, 2), (0, 3), (1, 3)}),
}

# --- digits, basic punctuation, replacement box ------------------------------

_SEG = {
    "top": {(0, c) for c in range(3, 9)},
    "mid": {(4, c) for c in range(3, 9)},
    "bot": {(8, c) for c in range(3, 9)},
    "tl": {(r, 3) for r in range(0, 5)},
    "tr": {(r, 8) for r in range(0, 5)},
    "bl": {(r, 3) for r in range(4, 9)},
    "br": {(r, 8) for r in range(4, 9)},
}

_DIGIT_SEGMENTS = {
    "0": "top tl tr bl br bot", "1": "tr br", "2": "top tr mid bl bot",
    "3": "top tr mid br bot", "4": "tl tr mid br", "5": "top tl mid br bot",
    "6": "top tl mid bl br bot", "7": "top tr br",
    "8": "top tl tr mid bl br bot", "9": "top tl tr mid br bot",
}


def _segments(names: str) -> frozenset[tuple[int, int]]:
    pixels: set[tuple[int, int]] = set()
    for name in names.split():
        pixels |= _SEG[name]
    return frozenset((r + _BOX_OFFSET[0], c + _BOX_OFFSET[1]) for r, c in pixels)


SYMBOL_ART: dict[str, frozenset[tuple[int, int]]] = {
    " ": frozenset(),
    ".": frozenset({(9, 7), (9, 8), (10, 7), (10, 8)}),
    ",": frozenset({(9, 7), (9, 8), (10, 8)}),
    ":": frozenset({(4, 7), (4, 8), (9, 7), (9, 8)}),
    ";": frozenset({(4, 7), (4, 8), (9, 7), (9, 8), (10, 8)}),
    "-": frozenset({(6, c) for c in range(5, 11)}),
    "־": frozenset({(4, c) for c in range(4, 12)}),  # maqaf, higher bar
    "'": frozenset({(2, 7), (3, 7)}),
    '"': frozenset({(2, 5), (3, 5), (2, 9), (3, 9)}),
    "׳": frozenset({(2, 8), (3, 7)}),  # geresh, slanted
    "״": frozenset({(2, 6), (3, 5), (2, 10), (3, 9)}),  # gershayim
    "!": frozenset({(r, 7) for r in range(2, 8)} | {(10, 7)}),
    "?": frozenset({(2, 5), (2, 6), (2, 7), (3, 8), (4, 8), (5, 7), (6, 7), (10, 7)}),
    "(": frozenset({(2, 8), (3, 7), (4, 6), (5, 6), (6, 6), (7, 6), (8, 7), (9, 8)}),
    ")": frozenset({(2, 6), (3, 7), (4, 8), (5, 8), (6, 8), (7, 8), (8, 7), (9, 6)}),
}
SYMBOL_ART.update({d: _segments(s) for d, s in _DIGIT_SEGMENTS.items()})

# hollow rectangle for characters without a glyph
REPLACEMENT_BOX: frozenset[tuple[int, int]] = frozenset(
    {(2, c) for c in range(3, 13)} | {(10, c) for c in range(3, 13)}
    | {(r, 3) for r in range(2, 11)} | {(r, 12) for r in range(2, 11)}
)


def has_glyph(ch: str) -> bool:
    return ch in LETTER_ART or ch in MARK_PIXELS or ch in SYMBOL_ART


def base_pixels(ch: str) -> frozenset[tuple[int, int]] | None:
    """Cell pixels for a base character; None when only the replacement box
    applies."""
    if ch in LETTER_ART:
        return LETTER_ART[ch]
    if ch in SYMBOL_ART:
        return SYMBOL_ART[ch]
    return None
