"""Regenerate the keyboard layout data files under src/typobench/noise/data."""

from pathlib import Path

from typobench.noise.layouts import format_layout

STAGGER = (1.5, 1.75, 2.25)

LAYOUTS = {
    "qwerty": dict(rows=("qwertyuiop", "asdfghjkl", "zxcvbnm"), comment="US QWERTY letter block"),
    "qwertz": dict(rows=("qwertzuiopü", "asdfghjklöä", "yxcvbnm"), comment="German QWERTZ letter block"),
    "azerty": dict(rows=("azertyuiop", "qsdfghjklmù", "wxcvbn"), comment="French AZERTY letter block"),
    "dubeolsik": dict(
        rows=("ㅂㅈㄷㄱㅅㅛㅕㅑㅐㅔ", "ㅁㄴㅇㄹㅎㅗㅓㅏㅣ", "ㅋㅌㅊㅍㅠㅜㅡ"),
        shift={"ㅃ": "ㅂ", "ㅉ": "ㅈ", "ㄸ": "ㄷ", "ㄲ": "ㄱ", "ㅆ": "ㅅ", "ㅒ": "ㅐ", "ㅖ": "ㅔ"},
        comment="South Korean Dubeolsik, compatibility jamo on the QWERTY key grid.\n"
        "Shifted jamo share their base key; replacements insert the base jamo.",
    ),
}


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "src" / "typobench" / "noise" / "data"
    out.mkdir(parents=True, exist_ok=True)
    for layout_id, spec in LAYOUTS.items():
        text = format_layout(layout_id, 1, spec["rows"], STAGGER, spec.get("shift"), spec["comment"])
        (out / f"{layout_id}.layout").write_text(text, encoding="utf-8")
        print(f"wrote {layout_id}.layout")


if __name__ == "__main__":
    main()
