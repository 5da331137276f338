"""SVG rendering of a slab configuration.

Levels are drawn top-down with unit spacing; open edges are solid, closed
edges dashed; the leftmost and rightmost open crossings are overlaid as
colored polylines (a single polyline when they coincide).  Site models draw
filled circles for open sites and hollow ones for closed sites.
"""

from __future__ import annotations

from .paths import Configuration, leftmost_open_path, rightmost_open_path

SCALE = 40
PAD = 30


def _xy(site, m):
    return (site.x * SCALE, (site.y - m) * SCALE)


def render_svg(config: Configuration) -> str:
    support = config.support
    m, n = support.m, support.n
    pts = []
    body = []
    if support.kind == "edge":
        seen_sites = set()
        for i, e in enumerate(support.items):
            x1, y1 = _xy(e.src, m)
            x2, y2 = _xy(e.dst, m)
            pts += [(x1, y1), (x2, y2)]
            seen_sites.update([e.src, e.dst])
            state = "open" if (config.bits >> i) & 1 else "closed"
            dash = "" if state == "open" else ' stroke-dasharray="6 4"'
            body.append(
                f'<line class="edge {state}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"'
                f' stroke="{"#222" if state == "open" else "#999"}" stroke-width="2"{dash} />'
            )
        for s in sorted(seen_sites):
            x, y = _xy(s, m)
            body.append(f'<circle class="site" cx="{x}" cy="{y}" r="3" fill="#444" />')
    else:
        for k, trs in enumerate(support.transitions):
            for fp, tp, _ in trs:
                x1 = support.level_xs[k][fp] * SCALE
                y1 = k * SCALE
                x2 = support.level_xs[k + 1][tp] * SCALE
                y2 = (k + 1) * SCALE
                pts += [(x1, y1), (x2, y2)]
                body.append(
                    f'<line class="step" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"'
                    ' stroke="#ccc" stroke-width="1" />'
                )
        for i, s in enumerate(support.items):
            x, y = _xy(s, m)
            pts.append((x, y))
            state = "open" if (config.bits >> i) & 1 else "closed"
            fill = "#222" if state == "open" else "#fff"
            body.append(
                f'<circle class="site {state}" cx="{x}" cy="{y}" r="6" fill="{fill}"'
                ' stroke="#222" stroke-width="1.5" />'
            )
    left = leftmost_open_path(config)
    right = rightmost_open_path(config)

    def polyline(path, cls, color):
        coords = " ".join(
            f"{x * SCALE},{(yy - m) * SCALE}"
            for yy, x in zip(range(path.m, path.n + 1), path.xs)
        )
        return (
            f'<polyline class="{cls}" points="{coords}" fill="none"'
            f' stroke="{color}" stroke-width="4" opacity="0.7" />'
        )

    if left is not None and right is not None:
        if left == right:
            body.append(polyline(left, "path-extreme", "#7b3fb3"))
        else:
            body.append(polyline(left, "path-left", "#1f77b4"))
            body.append(polyline(right, "path-right", "#d62728"))
    xs = [p[0] for p in pts] or [0]
    ys = [p[1] for p in pts] or [0]
    min_x, max_x = min(xs) - PAD, max(xs) + PAD
    min_y, max_y = min(ys) - PAD, max(ys) + PAD
    header = (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{min_x} {min_y}'
        f' {max_x - min_x} {max_y - min_y}">'
    )
    return header + "\n" + "\n".join(body) + "\n</svg>\n"
