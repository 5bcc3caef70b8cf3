import re

from colorama import Fore, Style, init

from sphere_structures.verify import Residual, ResidualReport

init(autoreset=True)

TABLE_WIDTH = 96

COLOR_PASS = Fore.GREEN
COLOR_FAIL = Fore.RED + Style.BRIGHT
COLOR_MEASURED = Fore.LIGHTBLACK_EX
COLOR_TITLE = Fore.CYAN + Style.BRIGHT
COLOR_BORDER = Fore.WHITE

_ANSI_ESCAPE = re.compile(r"\x1B\[[0-?]*[ -/]*[@-~]")


def strip_ansi(text: str) -> str:
    """Removes ANSI escape codes from a string."""
    return _ANSI_ESCAPE.sub("", text)


def get_visible_length(text: str) -> int:
    return len(strip_ansi(text))


def pad_visible(text: str, width: int, align_right: bool = False) -> str:
    """Pads a string containing ANSI codes to a specific visual width."""
    padding_needed = max(0, width - get_visible_length(text))
    if align_right:
        return (" " * padding_needed) + text
    return text + (" " * padding_needed)


def draw_box(
    lines: list[str],
    width: int = TABLE_WIDTH,
    padding: int = 1,
    title: str | None = None,
    color: str = COLOR_BORDER,
) -> list[str]:
    """Draws a box around the given lines of text."""
    inner_width = width - 2 - (2 * padding)

    top_border = "╔" + "═" * (width - 2) + "╗"
    if title:
        clean_title = f" {title} "
        title_len = get_visible_length(clean_title)
        if title_len < width - 4:
            left = (width - 2 - title_len) // 2
            right = (width - 2) - left - title_len
            top_border = "╔" + "═" * left + clean_title + "═" * right + "╗"
    box_lines = [color + top_border + Style.RESET_ALL]

    for line in lines:
        if get_visible_length(line) > inner_width:
            line = strip_ansi(line)[:inner_width]
        box_lines.append(
            color
            + "║"
            + " " * padding
            + pad_visible(line, inner_width)
            + " " * padding
            + color
            + "║"
            + Style.RESET_ALL
        )

    box_lines.append(color + "╚" + "═" * (width - 2) + "╝" + Style.RESET_ALL)
    return box_lines


def _status(res: Residual) -> str:
    if not res.asserted:
        return COLOR_MEASURED + "measured" + Style.RESET_ALL
    if res.passed:
        return COLOR_PASS + "pass" + Style.RESET_ALL
    return COLOR_FAIL + "FAIL" + Style.RESET_ALL


def residual_lines(report: ResidualReport) -> list[str]:
    header = (
        pad_visible("identity", 44)
        + pad_visible("max err", 12, align_right=True)
        + pad_visible("tol", 10, align_right=True)
        + pad_visible("n", 8, align_right=True)
        + "  status"
    )
    lines = [header, "─" * get_visible_length(header)]
    for name, res in report.residuals.items():
        lines.append(
            pad_visible(name, 44)
            + pad_visible(f"{res.max_abs_err:.3e}", 12, align_right=True)
            + pad_visible(f"{res.tol:.0e}", 10, align_right=True)
            + pad_visible(str(res.samples), 8, align_right=True)
            + "  "
            + _status(res)
        )
    return lines


def render_report(report: ResidualReport, title: str) -> str:
    verdict = COLOR_PASS + "PASSED" if report.passed else COLOR_FAIL + "FAILED"
    lines = residual_lines(report) + ["", verdict + Style.RESET_ALL]
    return "\n".join(draw_box(lines, title=COLOR_TITLE + title + Style.RESET_ALL))


def render_key_values(rows: list[tuple[str, str]], title: str) -> str:
    """Two-column table, used for the structure at a single point."""
    key_width = max((len(key) for key, _ in rows), default=0) + 2
    lines = [pad_visible(key, key_width) + value for key, value in rows]
    return "\n".join(draw_box(lines, title=title))


def render_sweep(rows: list[dict], param: str, title: str) -> str:
    header = (
        pad_visible(param, 14)
        + pad_visible("worst identity", 36)
        + pad_visible("max err", 12, align_right=True)
        + pad_visible("normality", 12, align_right=True)
        + pad_visible("min |det|", 12, align_right=True)
        + "  status"
    )
    lines = [header, "─" * len(header)]
    for row in rows:
        normality = row.get("normality_residual")
        det = row.get("min_abs_det")
        status = COLOR_PASS + "pass" if row["passed"] else COLOR_FAIL + "FAIL"
        lines.append(
            pad_visible(str(row["value"]), 14)
            + pad_visible(row["worst_identity"], 36)
            + pad_visible(f"{row['worst_max_abs_err']:.3e}", 12, align_right=True)
            + pad_visible("-" if normality is None else f"{normality:.3e}", 12, align_right=True)
            + pad_visible("-" if det is None else f"{det:.3e}", 12, align_right=True)
            + "  "
            + status
            + Style.RESET_ALL
        )
    return "\n".join(draw_box(lines, title=title))
